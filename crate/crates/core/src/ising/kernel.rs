//! Translation-invariant pair interactions on `Z^d`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::numeric::inverse_square_tail;

/// Slack used when comparing lattice distances against range cutoffs.
const DIST_EPS: f64 = 1e-9;

/// Macroscopic shape `J(r)` of a Kac interaction, supported on `r ≤ support`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    /// `c (1 − r²)³` on `r ≤ 1`, with `c` chosen so that `∫ J = 1`.
    Bump,
    /// `height · 1{r ≤ half_width}`.
    Uniform { half_width: f64, height: f64 },
}

impl Profile {
    /// The piecewise-constant profile `1{r ≤ 1/2}`.
    pub fn piecewise_constant() -> Self {
        Profile::Uniform {
            half_width: 0.5,
            height: 1.0,
        }
    }

    pub fn support(&self) -> f64 {
        match self {
            Profile::Bump => 1.0,
            Profile::Uniform { half_width, .. } => *half_width,
        }
    }

    fn bump_constant(d: usize) -> f64 {
        match d {
            1 => 35.0 / 32.0,
            2 => 4.0 / PI,
            3 => 315.0 / (64.0 * PI),
            _ => panic!("bump profile is only defined for d ≤ 3"),
        }
    }

    pub fn eval(&self, r: f64, d: usize) -> f64 {
        match self {
            Profile::Bump => {
                if r >= 1.0 {
                    0.0
                } else {
                    let u = 1.0 - r * r;
                    Self::bump_constant(d) * u * u * u
                }
            }
            Profile::Uniform { half_width, height } => {
                if r <= half_width + DIST_EPS {
                    *height
                } else {
                    0.0
                }
            }
        }
    }

    /// `∫_{R^d} J(|r|) dr`.
    pub fn integral(&self, d: usize) -> f64 {
        match self {
            Profile::Bump => 1.0,
            Profile::Uniform { half_width, height } => height * ball_volume(*half_width, d),
        }
    }

    /// `‖J‖_∞`.
    pub fn sup_norm(&self, d: usize) -> f64 {
        match self {
            Profile::Bump => Self::bump_constant(d),
            Profile::Uniform { height, .. } => height.abs(),
        }
    }

    /// `‖DJ‖_∞` on the interior of the support (zero for the uniform profile,
    /// whose only variation is the jump at the edge).
    pub fn derivative_sup(&self, d: usize) -> f64 {
        match self {
            // d/dr (1−r²)³ = −6r(1−r²)², extremal at r = 1/√5.
            Profile::Bump => Self::bump_constant(d) * 6.0 * 16.0 / (25.0 * 5f64.sqrt()),
            Profile::Uniform { .. } => 0.0,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            Profile::Bump if d == 0 || d > 3 => input(format!("bump profile needs 1 ≤ d ≤ 3, got {d}")),
            Profile::Uniform { half_width, height } if !(*half_width > 0.0) || !height.is_finite() => {
                input("uniform profile needs a positive half-width and a finite height")
            }
            _ => Ok(()),
        }
    }
}

fn ball_volume(r: f64, d: usize) -> f64 {
    match d {
        1 => 2.0 * r,
        2 => PI * r * r,
        3 => 4.0 / 3.0 * PI * r * r * r,
        _ => panic!("ball volume only implemented for d ≤ 3"),
    }
}

fn norm(disp: &[i64]) -> f64 {
    disp.iter().map(|&v| (v * v) as f64).sum::<f64>().sqrt()
}

/// Pair interaction `K(x, y) = K(x − y)`, symmetric under `x ↔ y`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    Zero,
    /// `j` between sites at Euclidean distance 1.
    NearestNeighbor { j: f64 },
    /// Explicit values by displacement; the opposite displacement is implied.
    Table { entries: Vec<(Vec<i64>, f64)> },
    /// `γ^d J(γ|x − y|)`.
    Kac { profile: Profile, gamma: f64 },
    Scaled { factor: f64, inner: Box<Kernel> },
    /// `inner` restricted to `r_min < |x − y| ≤ r_max`.
    Annulus { inner: Box<Kernel>, r_min: f64, r_max: f64 },
    /// `a / |x − y|²` for `|x − y| > cutoff`.
    InverseSquare { a: f64, cutoff: f64 },
    Sum { terms: Vec<Kernel> },
}

impl Kernel {
    pub fn kac(profile: Profile, gamma: f64) -> Self {
        Kernel::Kac { profile, gamma }
    }

    /// Builds a generic table, checking that it is finite and symmetric.
    pub fn table(entries: Vec<(Vec<i64>, f64)>) -> Result<Self> {
        let dim = entries.first().map(|e| e.0.len()).unwrap_or(0);
        for (i, (d, v)) in entries.iter().enumerate() {
            if d.len() != dim {
                return input("table displacements have mixed dimensions");
            }
            if d.iter().all(|&c| c == 0) {
                return input("table contains the zero displacement");
            }
            if !v.is_finite() {
                return input(format!("table value at {d:?} is not finite"));
            }
            for (e, w) in &entries[..i] {
                let neg: Vec<i64> = e.iter().map(|c| -c).collect();
                if (e == d || &neg == d) && w != v {
                    return input(format!("table is not symmetric at {d:?}"));
                }
            }
        }
        Ok(Kernel::Table { entries })
    }

    pub fn scaled(self, factor: f64) -> Self {
        Kernel::Scaled {
            factor,
            inner: Box::new(self),
        }
    }

    pub fn plus(self, other: Kernel) -> Self {
        Kernel::Sum { terms: vec![self, other] }
    }

    /// `−J` on `(1 − ε)·R < r ≤ R`, where `R` is the range of `base`: adding it
    /// to `base` truncates the interaction to the inner `(1 − ε)` fraction.
    pub fn truncation(base: &Kernel, epsilon: f64, d: usize) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return input(format!("truncation needs 0 < ε < 1, got {epsilon}"));
        }
        let r = base
            .range(d)
            .ok_or_else(|| Error::Unsupported("cannot truncate an infinite-range kernel".into()))?;
        Ok(Kernel::Annulus {
            inner: Box::new(base.clone()),
            r_min: (1.0 - epsilon) * r,
            r_max: f64::INFINITY,
        }
        .scaled(-1.0))
    }

    /// `a/|x − y|²` beyond the range `(2γ)⁻¹` of the piecewise-constant Kac
    /// kernel with the same `γ`.
    pub fn long_range(a: f64, gamma: f64) -> Self {
        Kernel::InverseSquare {
            a,
            cutoff: 0.5 / gamma,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            Kernel::Zero => Ok(()),
            Kernel::NearestNeighbor { j } if j.is_finite() => Ok(()),
            Kernel::NearestNeighbor { .. } => input("nearest-neighbour coupling must be finite"),
            Kernel::Table { entries } => {
                if entries.iter().any(|e| e.0.len() != d) {
                    input(format!("table displacements do not have dimension {d}"))
                } else {
                    Ok(())
                }
            }
            Kernel::Kac { profile, gamma } => {
                if !(*gamma > 0.0 && gamma.is_finite()) {
                    return input(format!("Kac scaling γ must be positive, got {gamma}"));
                }
                profile.validate(d)
            }
            Kernel::Scaled { factor, inner } => {
                if !factor.is_finite() {
                    return input("non-finite kernel scale");
                }
                inner.validate(d)
            }
            Kernel::Annulus { inner, r_min, r_max } => {
                if r_min.is_nan() || r_max.is_nan() || r_min > r_max {
                    return input("annulus needs r_min ≤ r_max");
                }
                inner.validate(d)
            }
            Kernel::InverseSquare { a, cutoff } => {
                if d != 1 {
                    return Err(Error::Unsupported(format!("a/r² interaction is not summable in d = {d}")));
                }
                if !a.is_finite() || !(*cutoff >= 0.0) {
                    return input("a/r² interaction needs finite a and cutoff ≥ 0");
                }
                Ok(())
            }
            Kernel::Sum { terms } => terms.iter().try_for_each(|t| t.validate(d)),
        }
    }

    /// `K(0, disp)`; zero at the origin.
    pub fn eval(&self, disp: &[i64]) -> f64 {
        if disp.iter().all(|&c| c == 0) {
            return 0.0;
        }
        self.eval_at(disp, norm(disp))
    }

    fn eval_at(&self, disp: &[i64], r: f64) -> f64 {
        match self {
            Kernel::Zero => 0.0,
            Kernel::NearestNeighbor { j } => {
                if (r - 1.0).abs() < DIST_EPS {
                    *j
                } else {
                    0.0
                }
            }
            Kernel::Table { entries } => {
                for (d, v) in entries {
                    if d.as_slice() == disp || d.iter().zip(disp).all(|(a, b)| *a == -*b) {
                        return *v;
                    }
                }
                0.0
            }
            Kernel::Kac { profile, gamma } => {
                let d = disp.len();
                gamma.powi(d as i32) * profile.eval(gamma * r, d)
            }
            Kernel::Scaled { factor, inner } => factor * inner.eval_at(disp, r),
            Kernel::Annulus { inner, r_min, r_max } => {
                if r > r_min + DIST_EPS && r <= r_max + DIST_EPS {
                    inner.eval_at(disp, r)
                } else {
                    0.0
                }
            }
            Kernel::InverseSquare { a, cutoff } => {
                if r > cutoff + DIST_EPS {
                    a / (r * r)
                } else {
                    0.0
                }
            }
            Kernel::Sum { terms } => terms.iter().map(|t| t.eval_at(disp, r)).sum(),
        }
    }

    /// Largest distance at which the kernel can be nonzero; `None` when the
    /// range is infinite.
    #[allow(clippy::only_used_in_recursion)]
    pub fn range(&self, d: usize) -> Option<f64> {
        match self {
            Kernel::Zero => Some(0.0),
            Kernel::NearestNeighbor { .. } => Some(1.0),
            Kernel::Table { entries } => Some(entries.iter().map(|e| norm(&e.0)).fold(0.0, f64::max)),
            Kernel::Kac { profile, gamma } => Some(profile.support() / gamma),
            Kernel::Scaled { inner, .. } => inner.range(d),
            Kernel::Annulus { inner, r_min, r_max } => {
                let r = match inner.range(d) {
                    Some(r) => r.min(*r_max),
                    None if r_max.is_finite() => *r_max,
                    None => return None,
                };
                Some(if r <= *r_min { 0.0 } else { r })
            }
            Kernel::InverseSquare { .. } => None,
            Kernel::Sum { terms } => terms.iter().try_fold(0.0f64, |m, t| t.range(d).map(|r| m.max(r))),
        }
    }

    /// Distance beyond which every component is either zero or a single
    /// `a/r²` tail.
    fn horizon(&self, d: usize) -> f64 {
        match self {
            Kernel::Scaled { inner, .. } => inner.horizon(d),
            Kernel::Annulus { inner, r_min, r_max } => {
                if r_max.is_finite() {
                    *r_max
                } else {
                    inner.horizon(d).max(*r_min)
                }
            }
            Kernel::InverseSquare { cutoff, .. } => *cutoff,
            Kernel::Sum { terms } => terms.iter().map(|t| t.horizon(d)).fold(0.0, f64::max),
            other => other.range(d).unwrap_or(0.0),
        }
    }

    /// Nonzero values within a finite range, as `(displacement, value)`.
    pub fn support_points(&self, d: usize) -> Result<Vec<(Vec<i64>, f64)>> {
        let r = self
            .range(d)
            .ok_or_else(|| Error::Unsupported("support of an infinite-range kernel".into()))?;
        let m = (r + DIST_EPS).floor() as i64;
        let mut out = Vec::new();
        let mut disp = vec![-m; d];
        if d == 0 {
            return Ok(out);
        }
        loop {
            let v = self.eval(&disp);
            if v != 0.0 {
                out.push((disp.clone(), v));
            }
            let mut k = 0;
            loop {
                if k == d {
                    return Ok(out);
                }
                if disp[k] < m {
                    disp[k] += 1;
                    break;
                }
                disp[k] = -m;
                k += 1;
            }
        }
    }

    /// One-sided tail `Σ_{k ≥ k0} K(k)` in one dimension.
    pub fn tail_1d(&self, k0: u64) -> f64 {
        let k0 = k0.max(1);
        match self {
            Kernel::Scaled { factor, inner } => factor * inner.tail_1d(k0),
            Kernel::Sum { terms } => terms.iter().map(|t| t.tail_1d(k0)).sum(),
            Kernel::InverseSquare { a, cutoff } => {
                let first = ((cutoff + DIST_EPS).floor() as u64 + 1).max(k0);
                a * inverse_square_tail(first)
            }
            Kernel::Annulus { inner, r_min, r_max } if !r_max.is_finite() => {
                let first = ((r_min + DIST_EPS).floor() as u64 + 1).max(k0);
                match inner.range(1) {
                    Some(_) => direct_tail(self, first),
                    None => inner.tail_1d(first),
                }
            }
            _ => direct_tail(self, k0),
        }
    }

    /// `Σ_{x≠0} K(0, x)`.
    pub fn lattice_sum(&self, d: usize) -> Result<f64> {
        if self.range(d).is_some() {
            return Ok(self.support_points(d)?.iter().map(|p| p.1).sum());
        }
        self.require_1d(d)?;
        Ok(2.0 * self.tail_1d(1))
    }

    /// `Σ_{x≠0} |K(0, x)|`. For infinite range in `d = 1` the kernel is
    /// assumed single-signed beyond its finite components.
    pub fn abs_sum(&self, d: usize) -> Result<f64> {
        if self.range(d).is_some() {
            return Ok(self.support_points(d)?.iter().map(|p| p.1.abs()).sum());
        }
        self.require_1d(d)?;
        let m = (self.horizon(d) + DIST_EPS).floor() as u64;
        let near: f64 = (1..=m).map(|k| self.eval(&[k as i64]).abs()).sum();
        Ok(2.0 * (near + self.tail_1d(m + 1).abs()))
    }

    fn require_1d(&self, d: usize) -> Result<()> {
        if d != 1 {
            return Err(Error::Unsupported(format!(
                "infinite-range interactions are only supported in d = 1 (got d = {d})"
            )));
        }
        Ok(())
    }
}

fn direct_tail(k: &Kernel, k0: u64) -> f64 {
    let r = k.range(1).expect("finite range");
    let last = (r + DIST_EPS).floor() as u64;
    (k0..=last).map(|j| k.eval(&[j as i64])).sum()
}
