//! KL divergence via excess factors, cumulant generating functions, Gibbs
//! variational bounds, and exponential tilting.
//!
//! Observables are passed as tables aligned with the configuration order of
//! the base [`ExactDistribution`] (see [`ExactDistribution::tabulate`]).

pub mod optimize;

use serde::Serialize;

pub use optimize::{minimize_gibbs, LambdaStar, Optimum};

use crate::error::{input, Error, Result};
use crate::model::ExactDistribution;
use crate::numeric::{bisect, pairwise_sum};
use crate::perturbation::ExcessFactor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Upper,
    Lower,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Direction::Upper => 1.0,
            Direction::Lower => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub direction: Direction,
    pub value: f64,
    pub lambda_star: LambdaStar,
    pub kl: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective_trace: Option<Vec<(f64, f64)>>,
}

/// `log Φ = C·f + κ`, tabulated over the base configurations.
#[derive(Clone, Debug, PartialEq)]
pub struct QoILinearForm {
    pub c: f64,
    pub kappa: Vec<f64>,
}

/// Tolerance used when checking a claimed linear decomposition of `log Φ`.
pub const DECOMPOSITION_TOL: f64 = 1e-10;

/// The alternative measure seen from the base: `q̃ = q · Φ / E_q[Φ]`.
#[derive(Clone, Debug)]
pub struct ChangeOfMeasure {
    /// `log E_q[Φ]`.
    pub log_partition_ratio: f64,
    /// `q̃(x)` for every configuration, obtained through the likelihood ratio.
    pub alt_probs: Vec<f64>,
    pub log_phi: Vec<f64>,
}

impl ChangeOfMeasure {
    pub fn new(base: &ExactDistribution, log_phi: Vec<f64>) -> Self {
        assert_eq!(log_phi.len(), base.len());
        let s = base.log_mean_exp(&log_phi);
        let alt_probs = base
            .log_probs()
            .iter()
            .zip(&log_phi)
            .map(|(&lp, &g)| (lp + g - s).exp())
            .collect();
        ChangeOfMeasure {
            log_partition_ratio: s,
            alt_probs,
            log_phi,
        }
    }

    pub fn from_excess(base: &ExactDistribution, ef: &ExcessFactor) -> Self {
        Self::new(base, ef.tabulate())
    }

    /// `E_q̃[g]`.
    pub fn alt_expect(&self, g: &[f64]) -> f64 {
        let t: Vec<f64> = self.alt_probs.iter().zip(g).map(|(p, v)| p * v).collect();
        pairwise_sum(&t)
    }

    /// `E_q[Φ log Φ]/E_q[Φ] − log E_q[Φ]`.
    pub fn kl(&self) -> f64 {
        let v = self.alt_expect(&self.log_phi) - self.log_partition_ratio;
        clamp_rounding(v)
    }
}

/// Removes negative rounding noise from quantities that are nonnegative in
/// exact arithmetic.
fn clamp_rounding(v: f64) -> f64 {
    if v < 0.0 && v > -1e-12 {
        0.0
    } else {
        v
    }
}

pub fn kl_divergence(base: &ExactDistribution, ef: &ExcessFactor) -> f64 {
    ChangeOfMeasure::from_excess(base, ef).kl()
}

/// KL divergence through a linear decomposition `log Φ = C f + κ`.
pub fn kl_linear_form(base: &ExactDistribution, ef: &ExcessFactor, f: &[f64], lf: &QoILinearForm) -> Result<f64> {
    let com = ChangeOfMeasure::from_excess(base, ef);
    check_decomposition(&com.log_phi, f, lf)?;
    let v = lf.c * com.alt_expect(f) + com.alt_expect(&lf.kappa) - com.log_partition_ratio;
    Ok(clamp_rounding(v))
}

fn check_decomposition(log_phi: &[f64], f: &[f64], lf: &QoILinearForm) -> Result<()> {
    if lf.kappa.len() != log_phi.len() || f.len() != log_phi.len() {
        return input("linear form tables do not match the state space");
    }
    for (i, ((&g, &fv), &k)) in log_phi.iter().zip(f).zip(&lf.kappa).enumerate() {
        let r = lf.c * fv + k;
        if (g - r).abs() > DECOMPOSITION_TOL * (1.0 + g.abs()) {
            return input(format!(
                "log Φ ≠ C·f + κ at configuration {i}: {g} vs {r}"
            ));
        }
    }
    Ok(())
}

/// `Λ(λ) = log E_q[exp(λ f)]`.
pub fn cgf(base: &ExactDistribution, f: &[f64], lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let scale = f.iter().fold(0.0f64, |m, v| m.max(v.abs())) * lambda.abs();
    if scale < 0.5 {
        // log1p/expm1 keeps full relative accuracy as λ → 0.
        let t: Vec<f64> = base
            .log_probs()
            .iter()
            .zip(f)
            .map(|(&lp, &v)| lp.exp() * (lambda * v).exp_m1())
            .collect();
        return pairwise_sum(&t).ln_1p();
    }
    let g: Vec<f64> = f.iter().map(|v| lambda * v).collect();
    base.log_mean_exp(&g)
}

fn check_observable(base: &ExactDistribution, f: &[f64]) -> Result<()> {
    if f.len() != base.len() {
        return input(format!(
            "observable has {} entries but the state space has {}",
            f.len(),
            base.len()
        ));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return input("observable takes non-finite values");
    }
    Ok(())
}

fn bound_with_eta(base: &ExactDistribution, f: &[f64], eta: f64, direction: Direction, kl: f64) -> BoundReport {
    let s = direction.sign();
    let mean = s * base.expect(f);
    let sup = f.iter().map(|v| s * v).fold(f64::NEG_INFINITY, f64::max);
    let opt = minimize_gibbs(|l| cgf(base, f, s * l), eta, mean, sup);
    BoundReport {
        direction,
        value: s * opt.value,
        lambda_star: opt.lambda_star,
        kl,
        objective_trace: if opt.trace.is_empty() { None } else { Some(opt.trace) },
    }
}

/// Bound on `E_q̃[f]` over all `q̃` with `R(q̃‖q) ≤ η`.
pub fn uq_bound_eta(base: &ExactDistribution, f: &[f64], eta: f64, direction: Direction) -> Result<BoundReport> {
    check_observable(base, f)?;
    if eta.is_nan() || eta < 0.0 {
        return input(format!("ambiguity radius must be nonnegative, got {eta}"));
    }
    Ok(bound_with_eta(base, f, eta, direction, eta))
}

/// Bound on `E_alt[f]` with `η` set to the exact divergence of the alternative.
pub fn uq_bound_model(base: &ExactDistribution, ef: &ExcessFactor, f: &[f64], direction: Direction) -> Result<BoundReport> {
    check_observable(base, f)?;
    let kl = kl_divergence(base, ef);
    Ok(bound_with_eta(base, f, kl, direction, kl))
}

/// The bound with prefactor `1/(1 − C)` built from `log Φ = C f + κ`:
///
/// `±E_q̃[f] ≤ 1/(1 − C) · inf_λ (Λ(±λ) − log E_q[Φ] + E_q[κΦ]/E_q[Φ]) / λ`.
///
/// When the constant `E_q[κΦ]/E_q[Φ] − log E_q[Φ]` is negative the infimum
/// is `−∞` (reached as `λ → 0`), so the reported value is infinite.
pub fn uq_bound_linear(
    base: &ExactDistribution,
    ef: &ExcessFactor,
    f: &[f64],
    lf: &QoILinearForm,
    direction: Direction,
) -> Result<BoundReport> {
    check_observable(base, f)?;
    if lf.c.abs() >= 1.0 || lf.c.is_nan() {
        return Err(Error::Precondition(format!("linear form needs |C| < 1, got C = {}", lf.c)));
    }
    let com = ChangeOfMeasure::from_excess(base, ef);
    check_decomposition(&com.log_phi, f, lf)?;
    let k = clamp_rounding(com.alt_expect(&lf.kappa) - com.log_partition_ratio);
    let kl = com.kl();
    let s = direction.sign();
    let pre = 1.0 / (1.0 - lf.c);
    if k < 0.0 {
        return Ok(BoundReport {
            direction,
            value: s * f64::NEG_INFINITY,
            lambda_star: LambdaStar::ZeroLimit,
            kl,
            objective_trace: None,
        });
    }
    let mean = s * base.expect(f);
    let sup = f.iter().map(|v| s * v).fold(f64::NEG_INFINITY, f64::max);
    let opt = minimize_gibbs(|l| cgf(base, f, s * l), k, mean, sup);
    Ok(BoundReport {
        direction,
        value: s * pre * opt.value,
        lambda_star: opt.lambda_star,
        kl,
        objective_trace: if opt.trace.is_empty() { None } else { Some(opt.trace) },
    })
}

/// `q^λ ∝ exp(λ f) q`.
pub fn tilt(base: &ExactDistribution, f: &[f64], lambda: f64) -> ExactDistribution {
    let g: Vec<f64> = f.iter().map(|v| lambda * v).collect();
    base.reweight(&g)
}

/// `R(q^λ ‖ q) = λ E_{q^λ}[f] − Λ(λ)`.
pub fn tilted_divergence(base: &ExactDistribution, f: &[f64], lambda: f64) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let t = tilt(base, f, lambda);
    clamp_rounding(lambda * t.expect(f) - cgf(base, f, lambda))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TightnessPair {
    /// Positive tilt attaining the upper bound.
    pub lambda_plus: f64,
    /// Negative tilt attaining the lower bound.
    pub lambda_minus: f64,
}

/// Largest tilt magnitude searched by [`tightness_lambda`].
pub const TILT_SEARCH_MAX: f64 = 1e8;

/// Solves `R(q^λ‖q) = η` on each side of zero.
pub fn tightness_lambda(base: &ExactDistribution, f: &[f64], eta: f64) -> Result<TightnessPair> {
    check_observable(base, f)?;
    if eta.is_nan() || eta < 0.0 {
        return input(format!("divergence level must be nonnegative, got {eta}"));
    }
    let (lo, hi) = f.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if lo == hi {
        return Err(Error::Precondition("observable is constant; tilting has no effect".into()));
    }
    if eta == 0.0 {
        return Ok(TightnessPair {
            lambda_plus: 0.0,
            lambda_minus: 0.0,
        });
    }
    let solve = |sign: f64| -> Result<f64> {
        let r = |l: f64| tilted_divergence(base, f, sign * l) - eta;
        let mut upper = 1.0;
        while r(upper) < 0.0 {
            if upper >= TILT_SEARCH_MAX {
                return Err(Error::Range(format!(
                    "divergence {eta} exceeds the maximum {} reachable by tilting in this direction",
                    tilted_divergence(base, f, sign * TILT_SEARCH_MAX)
                )));
            }
            upper = (upper * 2.0).min(TILT_SEARCH_MAX);
        }
        Ok(sign * bisect(r, 0.0, upper))
    };
    Ok(TightnessPair {
        lambda_plus: solve(1.0)?,
        lambda_minus: solve(-1.0)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::UndirectedGraph;
    use crate::model::{LogLinearModel, DEFAULT_ENUMERATION_CAP};
    use crate::perturbation::{classify, excess_factor};

    fn two_state(p: f64) -> ExactDistribution {
        ExactDistribution::from_log_weights(vec![2], vec![(1.0 - p).ln(), p.ln()])
    }

    fn indicator() -> Vec<f64> {
        vec![0.0, 1.0]
    }

    #[test]
    fn cgf_of_indicator() {
        let q = two_state(0.3);
        for &l in &[0.0, 1e-9, 0.4, -2.0, 30.0] {
            let want = (0.3 * f64::exp(l) + 0.7).ln();
            assert!((cgf(&q, &indicator(), l) - want).abs() < 1e-14 * (1.0 + want.abs()));
        }
    }

    #[test]
    fn zero_eta_gives_mean_both_sides() {
        let q = two_state(0.3);
        for d in [Direction::Upper, Direction::Lower] {
            let b = uq_bound_eta(&q, &indicator(), 0.0, d).unwrap();
            assert!((b.value - 0.3).abs() < 1e-15);
        }
        assert!(uq_bound_eta(&q, &indicator(), -0.1, Direction::Upper).is_err());
    }

    #[test]
    fn huge_eta_reaches_indicator_range() {
        let q = two_state(0.3);
        let up = uq_bound_eta(&q, &indicator(), 1e3, Direction::Upper).unwrap();
        let lo = uq_bound_eta(&q, &indicator(), 1e3, Direction::Lower).unwrap();
        assert!((up.value - 1.0).abs() < 1e-9);
        assert!(lo.value.abs() < 1e-9);
    }

    #[test]
    fn tilt_of_indicator() {
        let q = two_state(0.3);
        let t = tilt(&q, &indicator(), 0.8);
        let e = 0.8f64.exp();
        assert!((t.prob_at(1) - 0.3 * e / (0.3 * e + 0.7)).abs() < 1e-15);
        assert_eq!(tilt(&q, &indicator(), 0.0).log_probs(), q.log_probs());
    }

    #[test]
    fn tightness_zero_and_constant() {
        let q = two_state(0.3);
        let t = tightness_lambda(&q, &indicator(), 0.0).unwrap();
        assert_eq!((t.lambda_plus, t.lambda_minus), (0.0, 0.0));
        assert!(tightness_lambda(&q, &[1.0, 1.0], 0.1).is_err());
        // −log 0.3 ≈ 1.2 is the most a tilt towards A can spend.
        assert!(matches!(tightness_lambda(&q, &indicator(), 1.5), Err(Error::Range(_))));
    }

    #[test]
    fn linear_form_with_zero_c_equals_model_bound() {
        let g = UndirectedGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let mut base = LogLinearModel::zeros(g, vec![2; 3]).unwrap();
        base.set_factor(&[0, 1], 0.7, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let mut alt = base.clone();
        alt.set_factor(&[1, 2], -0.4, vec![0.0, 1.0, 1.0, 0.5]).unwrap();
        let ef = excess_factor(&base, &alt, &classify(&base, &alt)).unwrap();
        let q = ExactDistribution::from_density(&base, DEFAULT_ENUMERATION_CAP).unwrap();
        let f = q.tabulate(|x| x[0] as f64 + 0.5 * x[2] as f64);
        let lf = QoILinearForm {
            c: 0.0,
            kappa: ef.tabulate(),
        };
        for d in [Direction::Upper, Direction::Lower] {
            let a = uq_bound_model(&q, &ef, &f, d).unwrap();
            let b = uq_bound_linear(&q, &ef, &f, &lf, d).unwrap();
            assert_eq!(a.value, b.value);
        }
        assert_eq!(kl_linear_form(&q, &ef, &f, &lf).unwrap(), kl_divergence(&q, &ef));
        let bad = QoILinearForm { c: 1.0, kappa: lf.kappa.clone() };
        assert!(matches!(uq_bound_linear(&q, &ef, &f, &bad, Direction::Upper), Err(Error::Precondition(_))));
        let wrong = QoILinearForm { c: 0.1, kappa: lf.kappa.clone() };
        assert!(matches!(kl_linear_form(&q, &ef, &f, &wrong), Err(Error::Input(_))));
    }
}
