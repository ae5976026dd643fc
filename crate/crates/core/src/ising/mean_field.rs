//! Mean-field free energy and the Lebowitz–Penrose pressure.
//!
//! Stationary points of `φ(m) = −𝒥m²/2 − hm − I(m)/β` are located in the
//! variable `u = atanh(m)`, where the condition reads `u/β − 𝒥 tanh u = h`.
//! That function is monotone on at most three intervals, so every
//! stationary point is bracketed and found by bisection; the global
//! minimisers are the stationary points with the lowest `φ`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::bisect;

/// `log(2 cosh u)` without overflow.
fn log_2cosh(u: f64) -> f64 {
    let a = u.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// `I(m) = −((1−m)/2) log((1−m)/2) − ((1+m)/2) log((1+m)/2)`, with `I(±1) = 0`.
pub fn entropy(m: f64) -> Result<f64> {
    if !(-1.0..=1.0).contains(&m) {
        return Err(Error::Domain(format!("magnetisation {m} is outside [−1, 1]")));
    }
    let term = |p: f64| if p <= 0.0 { 0.0 } else { -p * p.ln() };
    Ok(term((1.0 - m) / 2.0) + term((1.0 + m) / 2.0))
}

/// `φ_{𝒥,β,h}(m)`.
pub fn mean_field_potential(m: f64, beta: f64, h: f64, total_j: f64) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::Domain(format!("β must be positive, got {beta}")));
    }
    Ok(-0.5 * total_j * m * m - h * m - entropy(m)? / beta)
}

/// `φ` at `m = tanh u`, using `I(tanh u) = log(2 cosh u) − u tanh u`.
fn potential_at_u(u: f64, beta: f64, h: f64, total_j: f64) -> f64 {
    let m = u.tanh();
    -0.5 * total_j * m * m - h * m - (log_2cosh(u) - u * m) / beta
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LpPressure {
    /// `p = −min_m φ(m)`.
    pub pressure: f64,
    /// Global minimisers in ascending order (two at `h = 0` when `β𝒥 > 1`).
    pub minimizers: Vec<f64>,
}

impl LpPressure {
    /// Magnetisation approached from `h⁻`.
    pub fn m_minus(&self) -> f64 {
        self.minimizers[0]
    }

    /// Magnetisation approached from `h⁺`.
    pub fn m_plus(&self) -> f64 {
        *self.minimizers.last().unwrap()
    }
}

/// `p_{𝒥,β,h} = −inf_{m∈[−1,1]} φ_{𝒥,β,h}(m)` and its minimisers.
pub fn lp_pressure(beta: f64, h: f64, total_j: f64) -> Result<LpPressure> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Domain(format!("β must be positive and finite, got {beta}")));
    }
    if !h.is_finite() || !total_j.is_finite() {
        return Err(Error::Domain("h and 𝒥 must be finite".into()));
    }
    let g = |u: f64| u / beta - total_j * u.tanh() - h;
    // Every root satisfies u = β(h + 𝒥 tanh u), so |u| ≤ β(|h| + |𝒥|).
    let reach = beta * (h.abs() + total_j.abs()) + 1.0;
    let mut cuts = vec![-reach];
    if beta * total_j > 1.0 {
        let uc = (beta * total_j).sqrt().acosh();
        cuts.extend([-uc, uc]);
    }
    cuts.push(reach);
    let mut roots = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ga, gb) = (g(a), g(b));
        if ga == 0.0 {
            roots.push(a);
        } else if gb == 0.0 {
            roots.push(b);
        } else if ga.signum() != gb.signum() {
            roots.push(bisect(g, a, b));
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    if h == 0.0 && beta * total_j > 1.0 {
        // The two ordered phases are exact mirror images.
        let u = roots.iter().copied().fold(0.0f64, |m, r| m.max(r.abs()));
        let p = -potential_at_u(u, beta, h, total_j);
        let m = u.tanh();
        return Ok(LpPressure {
            pressure: p,
            minimizers: vec![-m, m],
        });
    }
    let values: Vec<f64> = roots.iter().map(|&u| potential_at_u(u, beta, h, total_j)).collect();
    let best = values.iter().copied().fold(f64::INFINITY, f64::min);
    let minimizers: Vec<f64> = roots
        .iter()
        .zip(&values)
        .filter(|(_, &v)| v == best)
        .map(|(&u, _)| u.tanh())
        .collect();
    Ok(LpPressure {
        pressure: -best,
        minimizers,
    })
}
