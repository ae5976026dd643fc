//! Excess factors between a lattice system and its perturbation
//! `J̃ = J + F`, `h̃`, and the bounds on their pieces.

use serde::Serialize;

use super::kernel::Kernel;
use super::lattice::{boundary_volume, spin, LatticeSystem};
use crate::error::{Error, Result};
use crate::model::ExactDistribution;
use crate::perturbation::{ExcessFactor, ExcessTerm};
use crate::uq::QoILinearForm;

/// `log Φ(σ) = β[(h̃ − h)Σσ + Σ_{x<y} F σσ + Σ_x σ(x) b_F(x)]`, i.e. minus
/// `β` times the energy of `F` with field `h̃ − h` under the same exterior.
pub fn excess_factor_ising(sys: &LatticeSystem, f: &Kernel, h_tilde: f64) -> Result<ExcessFactor> {
    let fsys = sys.with_kernel(f.clone(), h_tilde - sys.field())?;
    let beta = sys.beta();
    let n = sys.volume();
    let mut terms = Vec::new();
    for x in 0..n {
        let g = beta * (fsys.field() + fsys.exterior_field()[x]);
        if g != 0.0 {
            terms.push(ExcessTerm {
                clique: vec![x],
                log_table: vec![-g, g],
            });
        }
    }
    for &(x, y, j) in fsys.pairs() {
        let v = beta * j;
        terms.push(ExcessTerm {
            clique: vec![x, y],
            log_table: vec![v, -v, -v, v],
        });
    }
    Ok(ExcessFactor {
        cards: vec![2; n],
        terms,
    })
}

/// Splits `log Φ = C·Σσ + κ` with `C = β(h̃ − h)`; requires `|C| < 1`.
pub fn ising_linear_form(
    sys: &LatticeSystem,
    ef: &ExcessFactor,
    h_tilde: f64,
    dist: &ExactDistribution,
) -> Result<QoILinearForm> {
    let c = sys.beta() * (h_tilde - sys.field());
    if !(c.abs() < 1.0) {
        return Err(Error::Precondition(format!(
            "β(h̃ − h) = {c} is outside (−1, 1); use the generic excess-factor bound instead"
        )));
    }
    let log_phi = ef.tabulate();
    let total = sys.total_spin_table(dist);
    Ok(QoILinearForm {
        c,
        kappa: log_phi.iter().zip(&total).map(|(l, s)| l - c * s).collect(),
    })
}

/// `κ(σ) = log Φ(σ) − β(h̃ − h)Σσ` at one configuration.
pub fn kappa(sys: &LatticeSystem, ef: &ExcessFactor, h_tilde: f64, states: &[usize]) -> f64 {
    let c = sys.beta() * (h_tilde - sys.field());
    ef.evaluate(states) - c * states.iter().map(|&s| spin(s)).sum::<f64>()
}

/// Upper bound `β|Δ|(1/2 + 2R_F|∂Δ|/|Δ|)Σ_{x≠0}|F(0,x)|` on `κ` for a
/// finite-range `F`.
pub fn kappa_one_bound(sys: &LatticeSystem, f: &Kernel) -> Result<f64> {
    let r = f
        .range(sys.dim())
        .ok_or_else(|| Error::Unsupported("the κ bound needs a finite-range F".into()))?;
    let n = sys.volume() as f64;
    let fs = f.abs_sum(sys.dim())?;
    Ok(sys.beta() * n * (0.5 + 2.0 * r * sys.boundary_volume() as f64 / n) * fs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryRegime {
    /// Exterior sites within distance `R_F` of the box.
    InsideRange,
    /// All exterior sites (for interactions acting beyond a range).
    OutsideRange,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundarySum {
    pub exact: f64,
    pub bound: f64,
}

/// `Σ_{x∈Δ} Σ_{y∈Δᶜ} |F(x,y)|` over the chosen exterior region, with its
/// bound: `R_F|∂Δ|𝓕` inside range (`R_F|Δ|𝓕` once `L ≤ 2R_F`, where every
/// site sees the exterior), and `R_F|Δ|𝓕` outside range, with `R_F` the inner
/// radius of `F` (at least 1).
pub fn boundary_sum_bounds(dim: usize, side: usize, f: &Kernel, which: BoundaryRegime) -> Result<BoundarySum> {
    f.validate(dim)?;
    let n = side.pow(dim as u32);
    let fs = f.abs_sum(dim)?;
    if fs == 0.0 {
        return Ok(BoundarySum { exact: 0.0, bound: 0.0 });
    }
    match which {
        BoundaryRegime::InsideRange => {
            let r = f
                .range(dim)
                .ok_or_else(|| Error::Unsupported("inside-range sums need a finite-range F".into()))?;
            let exact = exterior_abs_sum(dim, side, f)?;
            let sites = if (side as f64) <= 2.0 * r {
                n
            } else {
                boundary_volume(dim, side)
            };
            Ok(BoundarySum {
                exact,
                bound: r * sites as f64 * fs,
            })
        }
        BoundaryRegime::OutsideRange => {
            let exact = exterior_abs_sum(dim, side, f)?;
            Ok(BoundarySum {
                exact,
                bound: inner_radius(f).max(1.0) * n as f64 * fs,
            })
        }
    }
}

fn exterior_abs_sum(dim: usize, side: usize, f: &Kernel) -> Result<f64> {
    match f.range(dim) {
        Some(_) => {
            let pts = f.support_points(dim)?;
            let mut total = 0.0;
            let n = side.pow(dim as u32);
            for x in 0..n {
                let mut c = vec![0i64; dim];
                let mut idx = x;
                for v in c.iter_mut() {
                    *v = (idx % side) as i64;
                    idx /= side;
                }
                for (d, v) in &pts {
                    if c.iter().zip(d).any(|(a, b)| a + b < 0 || a + b >= side as i64) {
                        total += v.abs();
                    }
                }
            }
            Ok(total)
        }
        None => {
            if dim != 1 {
                return Err(Error::Unsupported("infinite-range F needs d = 1".into()));
            }
            // Single-signed tails, so |Σ| = Σ|·|.
            Ok((0..side)
                .map(|x| (f.tail_1d(x as u64 + 1) + f.tail_1d((side - x) as u64)).abs())
                .sum())
        }
    }
}

fn inner_radius(f: &Kernel) -> f64 {
    match f {
        Kernel::InverseSquare { cutoff, .. } => *cutoff,
        Kernel::Annulus { r_min, .. } => *r_min,
        Kernel::Scaled { inner, .. } => inner_radius(inner),
        Kernel::Sum { terms } => terms.iter().map(inner_radius).fold(f64::INFINITY, f64::min),
        _ => 1.0,
    }
}

/// `2β(|h̃ − h| + 𝓕)`, the norm-1 bound on the relative entropy per site.
pub fn norm1_kl_upper(beta: f64, h: f64, h_tilde: f64, script_f: f64) -> f64 {
    2.0 * beta * ((h_tilde - h).abs() + script_f)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LongRangeTail {
    /// `C = Σ_{u ∈ γZ, |u| > 1/2} γ a/u²`.
    pub c: f64,
    /// `γC = Σ_{|y| > (2γ)⁻¹} a/y²`, the total perturbation felt by one site.
    pub per_site: f64,
    /// `2βCγ|Δ|`.
    pub bound: f64,
}

/// Tail constant and `κ_II` bound for the `a/r²` perturbation of the
/// piecewise-constant Kac kernel in one dimension.
pub fn long_range_kappa_bound(dim: usize, side: usize, beta: f64, a: f64, gamma: f64) -> Result<LongRangeTail> {
    if dim != 1 {
        return Err(Error::Unsupported(format!("long-range tail bound needs d = 1, got d = {dim}")));
    }
    if !(gamma > 0.0) {
        return Err(Error::Input(format!("γ must be positive, got {gamma}")));
    }
    let per_site = Kernel::long_range(a, gamma).lattice_sum(1)?;
    let c = per_site / gamma;
    Ok(LongRangeTail {
        c,
        per_site,
        bound: 2.0 * beta * c.abs() * gamma * side as f64,
    })
}
