//! Ising spin systems with generic, Kac, truncated and long-range pair
//! interactions: exact finite-box computations, the Lebowitz–Penrose
//! mean-field limit, magnetisation uncertainty bands and block averaging.
//!
//! Spins take values `±1`; as variables of a factor model they are binary
//! states with `0 ↦ −1` and `1 ↦ +1`.

pub mod bands;
pub mod coarse;
pub mod excess;
pub mod kernel;
pub mod lattice;
pub mod mean_field;

pub use bands::{finite_size_band, phase_band, BandMethod, BandPoint, FiniteBand, PhaseBand, PhasePerturbation};
pub use coarse::{coarse_grain_check, CoarseGrainReport};
pub use excess::{
    boundary_sum_bounds, excess_factor_ising, ising_linear_form, kappa, kappa_one_bound, long_range_kappa_bound,
    norm1_kl_upper, BoundaryRegime, BoundarySum, LongRangeTail,
};
pub use kernel::{Kernel, Profile};
pub use lattice::{spin, Boundary, LatticeSystem, McConfig};
pub use mean_field::{entropy, lp_pressure, mean_field_potential, LpPressure};
