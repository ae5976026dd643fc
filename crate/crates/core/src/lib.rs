//! Exact uncertainty quantification for discrete Markov random fields.
//!
//! A baseline log-linear model and a perturbed alternative are related through
//! an excess factor; Gibbs variational bounds on any observable then follow
//! from the baseline cumulant generating function and the KL divergence.
//! The [`ising`] module applies the same machinery to lattice spin systems with
//! Kac and long-range interactions, and to their mean-field limit.

// `!(x > 0.0)` is used so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod graph;
pub mod ising;
pub mod model;
pub mod numeric;
pub mod perturbation;
pub mod uq;

pub use error::{Error, Result};
pub use graph::{CliqueSet, UndirectedGraph};
pub use model::{ExactDistribution, LogDensity, LogLinearModel, ReducedModel};
pub use perturbation::{ExcessFactor, PerturbationReport, PerturbationType};
pub use uq::{BoundReport, Direction, LambdaStar};
