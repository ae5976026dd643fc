//! Uncertainty bands for the magnetisation of a perturbed system, in the
//! mean-field limit and on finite boxes.

use rayon::prelude::*;
use serde::Serialize;

use super::excess::long_range_kappa_bound;
use super::kernel::Kernel;
use super::lattice::LatticeSystem;
use super::mean_field::lp_pressure;
use crate::error::{input, Error, Result};
use crate::uq::{minimize_gibbs, uq_bound_eta, BoundReport, Direction, LambdaStar};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BandMethod {
    /// Linear-form bound: `η̂ = β𝓕`, prefactor `1/(1 − β(h̃ − h))`.
    Theorem,
    /// Norm-1 relative entropy bound: `η̂ = 2β(|h̃ − h| + 𝓕)`, prefactor 1.
    Norm1,
}

impl BandMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            BandMethod::Theorem => "theorem",
            BandMethod::Norm1 => "norm1",
        }
    }
}

/// Perturbation of the baseline interaction, reduced to its size `𝓕` in
/// the mean-field limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PhasePerturbation {
    /// `F = aJ`, so `𝓕 = |a|𝒥`.
    Kac { a: f64 },
    /// Cut beyond `(1 − ε)` of the range; `𝓕 ≤ ε‖J‖∞`.
    Truncation { epsilon: f64, j_sup: f64 },
    /// `a/r²` beyond `(2γ)⁻¹`; its per-site strength `γC` vanishes as `γ → 0`.
    LongRange { a: f64, gamma: f64 },
}

impl PhasePerturbation {
    pub fn script_f(&self, total_j: f64) -> f64 {
        match *self {
            PhasePerturbation::Kac { a } => a.abs() * total_j.abs(),
            PhasePerturbation::Truncation { epsilon, j_sup } => epsilon * j_sup.abs(),
            PhasePerturbation::LongRange { .. } => 0.0,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            PhasePerturbation::Kac { a } if !a.is_finite() => input("Kac perturbation needs finite a"),
            PhasePerturbation::Truncation { epsilon, j_sup } if !(epsilon > 0.0 && epsilon < 1.0) || !j_sup.is_finite() => {
                input("truncation needs 0 < ε < 1 and finite ‖J‖∞")
            }
            PhasePerturbation::LongRange { a, gamma } if !a.is_finite() || !(gamma > 0.0) => {
                input("long-range perturbation needs finite a and γ > 0")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BandPoint {
    pub h: f64,
    /// Baseline magnetisation from `h⁻` and from `h⁺` (equal off the jump).
    pub m_minus: f64,
    pub m_plus: f64,
    pub lower: f64,
    pub upper: f64,
    pub lambda_star_lower: LambdaStar,
    pub lambda_star_upper: LambdaStar,
    /// Set when the method's precondition fails at this point; the bounds
    /// are then NaN.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseBand {
    pub method: BandMethod,
    pub beta: f64,
    pub total_j: f64,
    pub h_offset: f64,
    pub script_f: f64,
    pub points: Vec<BandPoint>,
}

/// Mean-field band `±M̃ ≤ pre · inf_λ {(p(h ± λ/β) − p(h))/(λ/β) + η̂/λ}`.
pub fn phase_band(
    beta: f64,
    h_grid: &[f64],
    total_j: f64,
    pert: PhasePerturbation,
    h_offset: f64,
    method: BandMethod,
) -> Result<PhaseBand> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("β must be positive, got {beta}")));
    }
    if h_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return input("field grid must be strictly ascending");
    }
    if !h_offset.is_finite() {
        return input("field offset must be finite");
    }
    pert.validate()?;
    let script_f = pert.script_f(total_j);
    let points = h_grid
        .par_iter()
        .map(|&h| band_point(beta, h, total_j, script_f, h_offset, method))
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseBand {
        method,
        beta,
        total_j,
        h_offset,
        script_f,
        points,
    })
}

fn band_point(beta: f64, h: f64, total_j: f64, script_f: f64, h_offset: f64, method: BandMethod) -> Result<BandPoint> {
    let base = lp_pressure(beta, h, total_j)?;
    let (m_minus, m_plus) = (base.m_minus(), base.m_plus());
    let (eta, pre) = match method {
        BandMethod::Theorem => {
            let c = beta * h_offset;
            if c >= 1.0 {
                return Ok(BandPoint {
                    h,
                    m_minus,
                    m_plus,
                    lower: f64::NAN,
                    upper: f64::NAN,
                    lambda_star_lower: LambdaStar::ZeroLimit,
                    lambda_star_upper: LambdaStar::ZeroLimit,
                    error: Some(format!("β(h̃ − h) = {c} ≥ 1")),
                });
            }
            (beta * script_f, 1.0 / (1.0 - c))
        }
        BandMethod::Norm1 => (2.0 * beta * (h_offset.abs() + script_f), 1.0),
    };
    let p0 = base.pressure;
    let cgf = |s: f64, l: f64| {
        lp_pressure(beta, h + s * l / beta, total_j)
            .map(|p| beta * (p.pressure - p0))
            .unwrap_or(f64::NAN)
    };
    let up = minimize_gibbs(|l| cgf(1.0, l), eta, m_plus, 1.0);
    let lo = minimize_gibbs(|l| cgf(-1.0, l), eta, -m_minus, 1.0);
    Ok(BandPoint {
        h,
        m_minus,
        m_plus,
        lower: -pre * lo.value,
        upper: pre * up.value,
        lambda_star_lower: lo.lambda_star,
        lambda_star_upper: up.lambda_star,
        error: None,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiniteBand {
    pub method: BandMethod,
    /// `E_q[m]` for the baseline.
    pub baseline: f64,
    /// Bounds on `E_q̃[m]` (already divided by `|Δ|` and scaled by the prefactor).
    pub lower: BoundReport,
    pub upper: BoundReport,
    /// Ambiguity radius for `|Δ| m`.
    pub eta: f64,
    pub prefactor: f64,
    /// `𝓕 = Σ_{x≠0} |F(0,x)|` on the lattice.
    pub script_f: f64,
    /// Range of `F` (`None` for infinite range).
    pub r_f: Option<f64>,
}

/// Finite-volume band for `E_q̃[m]` with `J̃ = J + F` and field `h̃`.
///
/// Theorem method, finite-range `F`: `η = β𝓕(|Δ| + R_F|∂Δ|)`, prefactor
/// `1/(1 − β(h̃ − h))`. For the `a/r²` tail (infinite range) the same method
/// uses `η = 2βCγ|Δ|`. Norm-1 method: `η = 2β|Δ|(|h̃ − h| + 𝓕)`, prefactor 1.
pub fn finite_size_band(sys: &LatticeSystem, f: &Kernel, h_tilde: f64, method: BandMethod, cap: u64) -> Result<FiniteBand> {
    let d = sys.dim();
    f.validate(d)?;
    let beta = sys.beta();
    let n = sys.volume() as f64;
    let delta = h_tilde - sys.field();
    let script_f = f.abs_sum(d)?;
    let r_f = f.range(d);
    let (eta, pre) = match method {
        BandMethod::Theorem => {
            let c = beta * delta;
            if c >= 1.0 {
                return Err(Error::Precondition(format!("β(h̃ − h) = {c} ≥ 1")));
            }
            let eta = match (r_f, f) {
                (Some(r), _) => beta * script_f * (n + r * sys.boundary_volume() as f64),
                (None, Kernel::InverseSquare { a, cutoff }) => {
                    long_range_kappa_bound(d, sys.side(), beta, *a, 0.5 / cutoff)?.bound
                }
                (None, _) => 2.0 * beta * script_f * n,
            };
            (eta, 1.0 / (1.0 - c))
        }
        BandMethod::Norm1 => (2.0 * beta * n * (delta.abs() + script_f), 1.0),
    };
    let dist = sys.gibbs(cap)?;
    let total = sys.total_spin_table(&dist);
    let baseline = dist.expect(&total) / n;
    let scale = |mut r: BoundReport| {
        r.value *= pre / n;
        r
    };
    Ok(FiniteBand {
        method,
        baseline,
        lower: scale(uq_bound_eta(&dist, &total, eta, Direction::Lower)?),
        upper: scale(uq_bound_eta(&dist, &total, eta, Direction::Upper)?),
        eta,
        prefactor: pre,
        script_f,
        r_f,
    })
}
