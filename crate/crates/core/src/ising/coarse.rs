//! Block averaging of a one-dimensional Kac interaction on blocks of side
//! `ℓ = γ^{−1/2}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::kernel::{Kernel, Profile};
use super::lattice::{Boundary, LatticeSystem};
use crate::error::{input, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoarseGrainReport {
    pub gamma: f64,
    pub block_side: usize,
    pub side: usize,
    /// `δ₁ = γ^{3/2}‖DJ‖∞`.
    pub delta1: f64,
    /// `δ₂ = γ‖J‖∞`.
    pub delta2: f64,
    /// `max |J_γ(x,y) − J̄_γ(i,j)|` over pairs in distinct blocks with `|x − y| ≤ 2γ⁻¹`.
    pub max_offblock_deviation: f64,
    /// `max |J_γ(x,y) − J̄_γ(i,i)|` over distinct pairs in one block.
    pub max_diagonal_deviation: f64,
    pub pairs_checked: usize,
    /// Off-block pairs left out because their blocks straddle a jump of the profile.
    pub pairs_skipped: usize,
    /// `|H(σ) − H̄(σ)| / (|Δ| γ^{1/2})` for each sampled configuration.
    pub energy_ratios: Vec<f64>,
    /// `‖DJ‖∞(1 + 2γ^{1/2}) + ‖J‖∞/2` for smooth profiles.
    pub ratio_bound: Option<f64>,
}

impl CoarseGrainReport {
    pub fn delta1_holds(&self) -> bool {
        self.max_offblock_deviation <= self.delta1
    }

    pub fn delta2_holds(&self) -> bool {
        self.max_diagonal_deviation <= self.delta2
    }

    pub fn max_energy_ratio(&self) -> f64 {
        self.energy_ratios.iter().copied().fold(0.0, f64::max)
    }
}

/// Block side `γ^{−1/2}`, which must be an integer.
pub fn block_side(gamma: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return input(format!("γ must lie in (0, 1], got {gamma}"));
    }
    let l = (1.0 / gamma.sqrt()).round();
    if ((l * l) * gamma - 1.0).abs() > 1e-12 {
        return input(format!("γ^(-1/2) = {} is not an integer block side", 1.0 / gamma.sqrt()));
    }
    Ok(l as usize)
}

/// Compares `J_γ` with its block average and the microscopic energy with
/// the block-spin energy `H̄(σ) = −½ Σ_{x≠y} J̄(b(x), b(y)) σ(x)σ(y)` on
/// `samples` uniformly random configurations (free boundary, `h = 0`).
///
/// `side` defaults to the smallest multiple of `ℓ` that holds two full
/// interaction ranges plus two blocks.
pub fn coarse_grain_check(
    gamma: f64,
    profile: &Profile,
    side: Option<usize>,
    samples: usize,
    seed: u64,
) -> Result<CoarseGrainReport> {
    profile.validate(1)?;
    let l = block_side(gamma)?;
    if l < 2 {
        return input("block side must be at least 2 so that blocks contain distinct pairs");
    }
    let range = profile.support() / gamma;
    let side = match side {
        Some(s) if s == 0 || s % l != 0 => {
            return input(format!("box side {s} is not a positive multiple of the block side {l}"))
        }
        Some(s) => s,
        None => (((2.0 * range) as usize + 2 * l) / l + 1) * l,
    };
    let kernel = Kernel::kac(profile.clone(), gamma);
    let j = |k: i64| kernel.eval(&[k]);
    let blocks = side / l;
    let li = l as i64;
    // J̄ for block separation k ≥ 1, averaged over both blocks.
    let jbar_off: Vec<f64> = (0..blocks as i64)
        .map(|k| {
            if k == 0 {
                return f64::NAN;
            }
            let mut s = 0.0;
            for x in 0..li {
                for y in 0..li {
                    s += j(k * li + y - x);
                }
            }
            s / (l * l) as f64
        })
        .collect();
    let jbar_diag = {
        let mut s = 0.0;
        for x in 0..li {
            for y in 0..li {
                if x != y {
                    s += j(y - x);
                }
            }
        }
        s / (l * (l - 1)) as f64
    };
    // Off-block separations whose block pair sees a jump of the profile.
    let straddles: Vec<bool> = (0..blocks as i64)
        .map(|k| {
            if k == 0 || matches!(profile, Profile::Bump) {
                return false;
            }
            let vals: Vec<f64> = (0..li).flat_map(|x| (0..li).map(move |y| (x, y))).map(|(x, y)| j(k * li + y - x)).collect();
            vals.iter().any(|v| *v != vals[0])
        })
        .collect();

    let mut max_off = 0.0f64;
    let mut max_diag = 0.0f64;
    let (mut checked, mut skipped) = (0usize, 0usize);
    for x in 0..side {
        for y in x + 1..side {
            let (bi, bj) = (x / l, y / l);
            let jx = j((y - x) as i64);
            if bi == bj {
                max_diag = max_diag.max((jx - jbar_diag).abs());
                checked += 1;
            } else if ((y - x) as f64) <= 2.0 / gamma {
                if straddles[bj - bi] {
                    skipped += 1;
                } else {
                    max_off = max_off.max((jx - jbar_off[bj - bi]).abs());
                    checked += 1;
                }
            }
        }
    }

    let sys = LatticeSystem::new(1, side, Boundary::Free, kernel.clone(), 1.0, 0.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ratios = Vec::with_capacity(samples);
    for _ in 0..samples {
        let sigma: Vec<i8> = (0..side).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        let block_sum: Vec<f64> = (0..blocks)
            .map(|b| sigma[b * l..(b + 1) * l].iter().map(|&s| s as f64).sum())
            .collect();
        let mut hbar = 0.0;
        for bi in 0..blocks {
            // Σ_{x≠y in block} σσ = (Σσ)² − ℓ.
            hbar -= 0.5 * jbar_diag * (block_sum[bi] * block_sum[bi] - l as f64);
            for bj in 0..blocks {
                if bi != bj {
                    hbar -= 0.5 * jbar_off[bi.abs_diff(bj)] * block_sum[bi] * block_sum[bj];
                }
            }
        }
        let h = sys.hamiltonian(&sigma);
        ratios.push((h - hbar).abs() / (side as f64 * gamma.sqrt()));
    }

    let dj = profile.derivative_sup(1);
    let jsup = profile.sup_norm(1);
    Ok(CoarseGrainReport {
        gamma,
        block_side: l,
        side,
        delta1: gamma.powf(1.5) * dj,
        delta2: gamma * jsup,
        max_offblock_deviation: max_off,
        max_diagonal_deviation: max_diag,
        pairs_checked: checked,
        pairs_skipped: skipped,
        energy_ratios: ratios,
        ratio_bound: matches!(profile, Profile::Bump).then(|| dj * (1.0 + 2.0 * gamma.sqrt()) + 0.5 * jsup),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_side_must_be_integral() {
        assert_eq!(block_side(1.0 / 16.0).unwrap(), 4);
        assert!(block_side(0.3).is_err());
        assert!(coarse_grain_check(0.25, &Profile::Bump, Some(7), 1, 0).is_err());
    }

    #[test]
    fn constant_profile_has_no_interior_deviation() {
        let r = coarse_grain_check(1.0 / 16.0, &Profile::piecewise_constant(), None, 4, 1).unwrap();
        assert_eq!(r.max_offblock_deviation, 0.0);
        assert!(r.delta1_holds());
        assert!(r.delta2_holds());
    }

    #[test]
    fn bump_deviations_within_deltas() {
        for &g in &[0.25, 1.0 / 16.0] {
            let r = coarse_grain_check(g, &Profile::Bump, None, 8, 3).unwrap();
            assert!(r.delta1_holds(), "{} > {}", r.max_offblock_deviation, r.delta1);
            assert!(r.delta2_holds());
            assert_eq!(r.pairs_skipped, 0);
            assert!(r.max_energy_ratio() <= r.ratio_bound.unwrap());
        }
    }
}
