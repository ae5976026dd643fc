//! Minimisation of the Gibbs variational objective `(Λ(λ) + η) / λ` over
//! `λ > 0`.

use serde::Serialize;

use crate::numeric::{golden_section, logspace};

/// Where the infimum over `λ` was found.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "lambda")]
pub enum LambdaStar {
    Interior(f64),
    /// Infimum is the `λ → 0⁺` limit.
    ZeroLimit,
    /// Infimum is the `λ → ∞` limit.
    InfinityLimit,
}

impl LambdaStar {
    pub fn value(&self) -> Option<f64> {
        match self {
            LambdaStar::Interior(l) => Some(*l),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    pub value: f64,
    pub lambda_star: LambdaStar,
    pub trace: Vec<(f64, f64)>,
}

pub const GRID_POINTS: usize = 64;
pub const LAMBDA_MIN: f64 = 1e-8;
pub const LAMBDA_MAX: f64 = 1e8;
const EXPAND_FACTOR: f64 = 1e4;
const EXPAND_LIMIT_HI: f64 = 1e16;
const EXPAND_LIMIT_LO: f64 = 1e-200;
const SUP_SNAP: f64 = 1e-12;

/// Minimises `(cgf(λ) + eta) / λ` for `λ > 0`.
///
/// `mean` is `lim_{λ→0} cgf(λ)/λ` and `sup` is `lim_{λ→∞} cgf(λ)/λ`; both
/// limits are used directly when the infimum sits at an end of the range.
pub fn minimize_gibbs<F: Fn(f64) -> f64>(cgf: F, eta: f64, mean: f64, sup: f64) -> Optimum {
    if eta == 0.0 {
        // Λ(λ)/λ is nondecreasing, so the infimum is the λ → 0 limit.
        return Optimum {
            value: mean,
            lambda_star: LambdaStar::ZeroLimit,
            trace: vec![],
        };
    }
    if eta == f64::INFINITY {
        return Optimum {
            value: sup,
            lambda_star: LambdaStar::InfinityLimit,
            trace: vec![],
        };
    }
    let obj = |l: f64| (cgf(l) + eta) / l;
    let (mut lo, mut hi) = (LAMBDA_MIN, LAMBDA_MAX);
    let mut trace;
    let mut best;
    loop {
        let grid = logspace(lo, hi, GRID_POINTS);
        trace = grid.iter().map(|&l| (l, obj(l))).collect::<Vec<_>>();
        best = argmin(&trace);
        if best == GRID_POINTS - 1 && hi < EXPAND_LIMIT_HI {
            lo = trace[GRID_POINTS - 2].0;
            hi *= EXPAND_FACTOR;
        } else if best == 0 && lo > EXPAND_LIMIT_LO {
            hi = trace[1].0;
            lo /= EXPAND_FACTOR;
        } else {
            break;
        }
    }
    if best == GRID_POINTS - 1 {
        return Optimum {
            value: sup.min(trace[best].1),
            lambda_star: LambdaStar::InfinityLimit,
            trace,
        };
    }
    if best == 0 {
        return Optimum {
            value: trace[0].1,
            lambda_star: LambdaStar::ZeroLimit,
            trace,
        };
    }
    let (a, b) = (trace[best - 1].0.ln(), trace[best + 1].0.ln());
    let (u, v) = golden_section(|u| obj(u.exp()), a, b, 1e-13);
    let (lambda, value) = if v <= trace[best].1 { (u.exp(), v) } else { trace[best] };
    // Far out in λ the objective is flat up to rounding; a minimum that
    // only beats the λ → ∞ limit by noise is that limit.
    if sup.is_finite() && value >= sup - SUP_SNAP * (1.0 + sup.abs()) {
        return Optimum {
            value: sup,
            lambda_star: LambdaStar::InfinityLimit,
            trace,
        };
    }
    Optimum {
        value,
        lambda_star: LambdaStar::Interior(lambda),
        trace,
    }
}

fn argmin(trace: &[(f64, f64)]) -> usize {
    let mut best = 0;
    for (i, &(_, v)) in trace.iter().enumerate() {
        if v < trace[best].1 {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_cgf_has_closed_form_minimum() {
        // Λ(λ) = μλ + σ²λ²/2  ⇒  inf (Λ+η)/λ = μ + σ√(2η) at λ = √(2η)/σ.
        let (mu, s2, eta) = (0.3, 2.0, 0.1);
        let opt = minimize_gibbs(|l| mu * l + 0.5 * s2 * l * l, eta, mu, f64::INFINITY);
        assert!((opt.value - (mu + (s2 * 2.0 * eta).sqrt())).abs() < 1e-12);
        let l = opt.lambda_star.value().unwrap();
        assert!((l - (2.0 * eta / s2).sqrt()).abs() < 1e-5);
    }

    #[test]
    fn zero_eta_returns_mean() {
        let opt = minimize_gibbs(|l| (0.3 * l.exp() + 0.7).ln(), 0.0, 0.3, 1.0);
        assert_eq!(opt.value, 0.3);
        assert_eq!(opt.lambda_star, LambdaStar::ZeroLimit);
    }

    #[test]
    fn large_eta_hits_supremum() {
        let p: f64 = 0.3;
        let cgf = |l: f64| p.ln() + l + (1.0 + (1.0 - p) / p * (-l).exp()).ln();
        let opt = minimize_gibbs(cgf, 50.0, p, 1.0);
        assert_eq!(opt.lambda_star, LambdaStar::InfinityLimit);
        assert!((opt.value - 1.0).abs() < 1e-12);
    }
}
