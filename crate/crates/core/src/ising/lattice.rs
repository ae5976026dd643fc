//! Ising spins on a cube `Δ = {0,…,L−1}^d` with a fixed exterior.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::kernel::Kernel;
use crate::error::{input, Error, Result};
use crate::graph::UndirectedGraph;
use crate::model::{state_space_size, table_size, CliqueFactor, ExactDistribution, LogDensity, LogLinearModel, ReducedModel};

/// Exterior configuration `σ̄` on `Δᶜ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "spins", rename_all = "snake_case")]
pub enum Boundary {
    /// No exterior spins.
    Free,
    Plus,
    Minus,
    /// Spins at exterior sites within interaction range; every such site
    /// must be listed.
    Explicit(BTreeMap<Vec<i64>, i8>),
}

/// Spin value `±1` of a binary state `0/1`.
pub fn spin(state: usize) -> f64 {
    if state == 0 {
        -1.0
    } else {
        1.0
    }
}

#[derive(Clone, Debug)]
pub struct LatticeSystem {
    dim: usize,
    side: usize,
    boundary: Boundary,
    kernel: Kernel,
    beta: f64,
    h: f64,
    cards: Vec<usize>,
    /// `(x, y, J(x, y))` for `x < y` in `Δ` with nonzero coupling.
    pairs: Vec<(usize, usize, f64)>,
    /// `b(x) = Σ_{y ∈ Δᶜ} J(x, y) σ̄(y)`.
    exterior_field: Vec<f64>,
    /// Exterior sites within range that carry a spin, with their couplings.
    exterior: Vec<ExteriorSite>,
}

#[derive(Clone, Debug)]
struct ExteriorSite {
    spin: f64,
    couplings: Vec<(usize, f64)>,
}

impl LatticeSystem {
    pub fn new(dim: usize, side: usize, boundary: Boundary, kernel: Kernel, beta: f64, h: f64) -> Result<Self> {
        if dim == 0 {
            return input("lattice dimension must be at least 1");
        }
        if side == 0 {
            return input("box side L must be at least 1");
        }
        if !beta.is_finite() || beta < 0.0 {
            return input(format!("inverse temperature must be finite and nonnegative, got {beta}"));
        }
        if !h.is_finite() {
            return input("external field must be finite");
        }
        kernel.validate(dim)?;
        let n = side
            .checked_pow(dim as u32)
            .filter(|&n| n <= 1 << 30)
            .ok_or_else(|| Error::Input(format!("box {side}^{dim} is too large")))?;
        let mut sys = LatticeSystem {
            dim,
            side,
            boundary,
            kernel,
            beta,
            h,
            cards: vec![2; n],
            pairs: vec![],
            exterior_field: vec![0.0; n],
            exterior: vec![],
        };
        if let Boundary::Explicit(map) = &sys.boundary {
            if let Some((k, v)) = map.iter().find(|(k, v)| k.len() != dim || (**v != 1 && **v != -1)) {
                return input(format!("explicit boundary entry {k:?} → {v} is invalid"));
            }
        }
        if sys.kernel.range(dim).is_some() {
            sys.build_finite_range()?;
        } else {
            sys.build_infinite_range()?;
        }
        Ok(sys)
    }

    fn build_finite_range(&mut self) -> Result<()> {
        let support = self.kernel.support_points(self.dim)?;
        let n = self.volume();
        let mut exterior: BTreeMap<Vec<i64>, ExteriorSite> = BTreeMap::new();
        for x in 0..n {
            let cx = self.coords(x);
            for (disp, j) in &support {
                let cy: Vec<i64> = cx.iter().zip(disp).map(|(a, b)| a + b).collect();
                match self.index(&cy) {
                    Some(y) if y > x => self.pairs.push((x, y, *j)),
                    Some(_) => {}
                    None => {
                        let s = self.exterior_spin(&cy)?;
                        if s != 0.0 {
                            self.exterior_field[x] += j * s;
                            exterior
                                .entry(cy)
                                .or_insert(ExteriorSite {
                                    spin: s,
                                    couplings: vec![],
                                })
                                .couplings
                                .push((x, *j));
                        }
                    }
                }
            }
        }
        self.pairs.sort_by_key(|p| (p.0, p.1));
        self.exterior = exterior.into_values().collect();
        Ok(())
    }

    fn build_infinite_range(&mut self) -> Result<()> {
        if self.dim != 1 {
            return Err(Error::Unsupported("infinite-range kernels need d = 1".into()));
        }
        let s = match self.boundary {
            Boundary::Free => 0.0,
            Boundary::Plus => 1.0,
            Boundary::Minus => -1.0,
            Boundary::Explicit(_) => {
                return Err(Error::Unsupported(
                    "explicit boundaries need a finite-range kernel".into(),
                ))
            }
        };
        let l = self.side;
        for x in 0..l {
            for y in x + 1..l {
                let j = self.kernel.eval(&[(y - x) as i64]);
                if j != 0.0 {
                    self.pairs.push((x, y, j));
                }
            }
            if s != 0.0 {
                // Left exterior at distances x+1, x+2, …; right at L−x, L−x+1, ….
                let t = self.kernel.tail_1d(x as u64 + 1) + self.kernel.tail_1d((l - x) as u64);
                self.exterior_field[x] = s * t;
            }
        }
        Ok(())
    }

    fn exterior_spin(&self, y: &[i64]) -> Result<f64> {
        match &self.boundary {
            Boundary::Free => Ok(0.0),
            Boundary::Plus => Ok(1.0),
            Boundary::Minus => Ok(-1.0),
            Boundary::Explicit(map) => map
                .get(y)
                .map(|&s| s as f64)
                .ok_or_else(|| Error::Input(format!("boundary spin at {y:?} lies within range but is not given"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn field(&self) -> f64 {
        self.h
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn boundary(&self) -> &Boundary {
        &self.boundary
    }

    /// `|Δ|`.
    pub fn volume(&self) -> usize {
        self.cards.len()
    }

    /// `|∂Δ| = L^d − (L − 2)^d`, the sites with a neighbour outside `Δ`.
    pub fn boundary_volume(&self) -> usize {
        boundary_volume(self.dim, self.side)
    }

    /// Same lattice, kernel and boundary with a different field.
    pub fn with_field(&self, h: f64) -> Result<Self> {
        if !h.is_finite() {
            return input("external field must be finite");
        }
        let mut s = self.clone();
        s.h = h;
        Ok(s)
    }

    /// Same lattice, boundary and temperature with a different kernel and field.
    pub fn with_kernel(&self, kernel: Kernel, h: f64) -> Result<Self> {
        LatticeSystem::new(self.dim, self.side, self.boundary.clone(), kernel, self.beta, h)
    }

    /// Coordinates of site `idx`; the first coordinate varies fastest.
    pub fn coords(&self, mut idx: usize) -> Vec<i64> {
        let mut c = vec![0; self.dim];
        for v in c.iter_mut() {
            *v = (idx % self.side) as i64;
            idx /= self.side;
        }
        c
    }

    pub fn index(&self, c: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for &v in c.iter().rev() {
            if v < 0 || v >= self.side as i64 {
                return None;
            }
            idx = idx * self.side + v as usize;
        }
        Some(idx)
    }

    pub fn pairs(&self) -> &[(usize, usize, f64)] {
        &self.pairs
    }

    pub fn exterior_field(&self) -> &[f64] {
        &self.exterior_field
    }

    /// `H(σ_Δ | σ̄) = −Σ_{x<y ∈ Δ} J σσ − Σ_{x ∈ Δ} σ(x)(h + b(x))`.
    pub fn hamiltonian(&self, sigma: &[i8]) -> f64 {
        assert_eq!(sigma.len(), self.volume());
        let s = |i: usize| sigma[i] as f64;
        let pair: f64 = self.pairs.iter().map(|&(x, y, j)| j * s(x) * s(y)).sum();
        let site: f64 = (0..sigma.len()).map(|x| s(x) * (self.h + self.exterior_field[x])).sum();
        -pair - site
    }

    /// Per-site log-potentials `βσ(x)(h + ½Σ_{y∈Δ} Jσ(y) + b(x))`; they sum
    /// to `−βH`, so interior pairs carry the ½ and boundary couplings do not.
    pub fn site_log_potentials(&self, sigma: &[i8]) -> Vec<f64> {
        let s = |i: usize| sigma[i] as f64;
        let mut local: Vec<f64> = (0..self.volume()).map(|x| self.h + self.exterior_field[x]).collect();
        for &(x, y, j) in &self.pairs {
            local[x] += 0.5 * j * s(y);
            local[y] += 0.5 * j * s(x);
        }
        local.iter().enumerate().map(|(x, g)| self.beta * s(x) * g).collect()
    }

    /// The Gibbs measure as a log-linear model on `Δ` plus the exterior
    /// sites within range, reduced on the exterior configuration.
    ///
    /// Each pair and field term goes to the first maximal clique containing
    /// its sites. For infinite-range kernels the exterior is folded into the
    /// single-site fields instead.
    pub fn rmrf_clique_potentials(&self, cap: u64) -> Result<ReducedModel> {
        let n = self.volume();
        let total = n + self.exterior.len();
        let mut edges: Vec<(usize, usize)> = self.pairs.iter().map(|p| (p.0, p.1)).collect();
        for (k, site) in self.exterior.iter().enumerate() {
            edges.extend(site.couplings.iter().map(|&(x, _)| (x, n + k)));
        }
        let graph = UndirectedGraph::from_edges(total, &edges)?;
        let cliques = graph.maximal_cliques();
        let cards = vec![2; total];
        let mut tables: Vec<Vec<f64>> = Vec::with_capacity(cliques.len());
        for c in cliques.iter() {
            state_space_size(&vec![2; c.len()], cap)?;
            tables.push(vec![0.0; table_size(c, &cards)]);
        }
        let first_containing = |nodes: &[usize]| {
            cliques
                .iter()
                .position(|c| nodes.iter().all(|v| c.binary_search(v).is_ok()))
                .expect("every edge lies in a maximal clique")
        };
        let beta = self.beta;
        let mut add = |nodes: &[usize], f: &dyn Fn(&[f64]) -> f64| {
            let ci = first_containing(nodes);
            let c = &cliques.as_slice()[ci];
            let pos: Vec<usize> = nodes.iter().map(|v| c.binary_search(v).unwrap()).collect();
            for (idx, t) in tables[ci].iter_mut().enumerate() {
                let vals: Vec<f64> = pos.iter().map(|&p| spin((idx >> p) & 1)).collect();
                *t += f(&vals);
            }
        };
        let infinite = self.kernel.range(self.dim).is_none();
        for x in 0..n {
            let g = if infinite { self.h + self.exterior_field[x] } else { self.h };
            add(&[x], &|s| beta * g * s[0]);
        }
        for &(x, y, j) in &self.pairs {
            add(&[x, y], &|s| beta * j * s[0] * s[1]);
        }
        for (k, site) in self.exterior.iter().enumerate() {
            for &(x, j) in &site.couplings {
                add(&[x, n + k], &|s| beta * j * s[0] * s[1]);
            }
        }
        let factors = cliques
            .iter()
            .zip(tables)
            .map(|(c, table)| CliqueFactor {
                clique: c.clone(),
                weight: 1.0,
                table,
            })
            .collect();
        let model = LogLinearModel::new(graph, cards, factors)?;
        let context: Vec<usize> = (n..total).collect();
        let values: Vec<usize> = self.exterior.iter().map(|s| usize::from(s.spin > 0.0)).collect();
        ReducedModel::new(model, &context, &values)
    }

    /// Exact Gibbs distribution over `Δ` (state `1` is spin `+1`).
    pub fn gibbs(&self, cap: u64) -> Result<ExactDistribution> {
        ExactDistribution::from_density(self, cap)
    }

    /// `log Z_σ̄(J, β, h)` by enumeration.
    pub fn log_partition(&self, cap: u64) -> Result<f64> {
        Ok(self.gibbs(cap)?.log_partition())
    }

    /// `P = log Z / (β|Δ|)`, exactly when `2^|Δ|` is within `cap`, otherwise
    /// by Monte Carlo if `mc` is given.
    pub fn finite_pressure(&self, cap: u64, mc: Option<&McConfig>) -> Result<f64> {
        if !(self.beta > 0.0) {
            return Err(Error::Domain("pressure needs β > 0".into()));
        }
        let n = self.volume() as f64;
        match self.log_partition(cap) {
            Ok(lz) => Ok(lz / (self.beta * n)),
            Err(Error::Capacity { .. }) if mc.is_some() => Ok(self.log_partition_mc(mc.unwrap()) / (self.beta * n)),
            Err(e) => Err(e),
        }
    }

    /// `Σ_x σ(x)` at every configuration, in state order.
    pub fn total_spin_table(&self, dist: &ExactDistribution) -> Vec<f64> {
        dist.tabulate(|x| x.iter().map(|&s| spin(s)).sum())
    }

    /// `log Z(h + λ/β) − log Z(h)`, the CGF of `|Δ| m` under the Gibbs measure.
    pub fn cgf_magnetization(&self, lambda: f64, cap: u64) -> Result<f64> {
        if !(self.beta > 0.0) {
            return Err(Error::Domain("field shift λ/β needs β > 0".into()));
        }
        if lambda == 0.0 {
            return Ok(0.0);
        }
        let shifted = self.with_field(self.h + lambda / self.beta)?;
        Ok(shifted.log_partition(cap)? - self.log_partition(cap)?)
    }

    /// `E[m]` by enumeration.
    pub fn mean_magnetization(&self, cap: u64) -> Result<f64> {
        let d = self.gibbs(cap)?;
        let t = self.total_spin_table(&d);
        Ok(d.expect(&t) / self.volume() as f64)
    }

    /// `log Z` by thermodynamic integration `log Z(β) = |Δ| log 2 − ∫₀^β ⟨H⟩_b db`,
    /// with `⟨H⟩_b` from single-site Metropolis runs and Simpson's rule.
    pub fn log_partition_mc(&self, cfg: &McConfig) -> f64 {
        let n = self.volume();
        let mut nbrs: Vec<Vec<(usize, f64)>> = vec![vec![]; n];
        for &(x, y, j) in &self.pairs {
            nbrs[x].push((y, j));
            nbrs[y].push((x, j));
        }
        let intervals = cfg.intervals.max(2) & !1;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut sigma: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
        let mut integral = 0.0;
        for k in 0..=intervals {
            let b = self.beta * k as f64 / intervals as f64;
            // At b = 0 every spin is independent and uniform, so ⟨H⟩ = 0.
            let mean_h = if b == 0.0 {
                0.0
            } else {
                for _ in 0..cfg.burn_in {
                    metropolis_sweep(&mut sigma, &nbrs, self.h, &self.exterior_field, b, &mut rng);
                }
                let mut acc = 0.0;
                for _ in 0..cfg.sweeps {
                    metropolis_sweep(&mut sigma, &nbrs, self.h, &self.exterior_field, b, &mut rng);
                    acc += self.hamiltonian(&sigma);
                }
                acc / cfg.sweeps.max(1) as f64
            };
            let w = if k == 0 || k == intervals {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            integral += w * mean_h;
        }
        integral *= self.beta / (3.0 * intervals as f64);
        n as f64 * std::f64::consts::LN_2 - integral
    }
}

fn metropolis_sweep(
    sigma: &mut [i8],
    nbrs: &[Vec<(usize, f64)>],
    h: f64,
    ext: &[f64],
    beta: f64,
    rng: &mut ChaCha8Rng,
) {
    for x in 0..sigma.len() {
        let local: f64 = h + ext[x] + nbrs[x].iter().map(|&(y, j)| j * sigma[y] as f64).sum::<f64>();
        let delta = 2.0 * sigma[x] as f64 * local;
        if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
            sigma[x] = -sigma[x];
        }
    }
}

/// Settings for the Monte Carlo pressure estimate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McConfig {
    pub seed: u64,
    /// Simpson intervals over `[0, β]` (rounded down to even, at least 2).
    pub intervals: usize,
    pub burn_in: usize,
    pub sweeps: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            seed: 0,
            intervals: 16,
            burn_in: 200,
            sweeps: 1000,
        }
    }
}

impl LogDensity for LatticeSystem {
    fn cardinalities(&self) -> &[usize] {
        &self.cards
    }

    fn log_weight(&self, x: &[usize]) -> f64 {
        let s = |i: usize| spin(x[i]);
        let pair: f64 = self.pairs.iter().map(|&(a, b, j)| j * s(a) * s(b)).sum();
        let site: f64 = (0..x.len()).map(|i| s(i) * (self.h + self.exterior_field[i])).sum();
        self.beta * (pair + site)
    }
}

pub fn boundary_volume(dim: usize, side: usize) -> usize {
    let inner = side.saturating_sub(2);
    side.pow(dim as u32) - inner.pow(dim as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::kernel::Profile;
    use crate::model::DEFAULT_ENUMERATION_CAP as CAP;

    #[test]
    fn all_plus_free_energy() {
        let k = Kernel::kac(Profile::Bump, 0.25);
        let sys = LatticeSystem::new(1, 8, Boundary::Free, k.clone(), 1.0, 0.0).unwrap();
        let mut expect = 0.0;
        for x in 0..8i64 {
            for y in 0..8i64 {
                expect -= 0.5 * k.eval(&[y - x]);
            }
        }
        assert!((sys.hamiltonian(&[1; 8]) - expect).abs() < 1e-14);
    }

    #[test]
    fn single_spin_in_plus_exterior() {
        let k = Kernel::kac(Profile::piecewise_constant(), 0.25);
        let sys = LatticeSystem::new(1, 1, Boundary::Plus, k, 1.0, 0.3).unwrap();
        assert!((sys.hamiltonian(&[1]) + (0.3 + 1.0)).abs() < 1e-15);
        assert!((sys.hamiltonian(&[-1]) - (0.3 + 1.0)).abs() < 1e-15);
    }

    #[test]
    fn zero_beta_is_uniform() {
        let k = Kernel::NearestNeighbor { j: 1.0 };
        let sys = LatticeSystem::new(2, 3, Boundary::Plus, k, 0.0, 0.7).unwrap();
        let lz = sys.log_partition(CAP).unwrap();
        assert!((lz - 9.0 * std::f64::consts::LN_2).abs() < 1e-12);
        let r = sys.rmrf_clique_potentials(CAP).unwrap();
        let d = ExactDistribution::from_density(&r, CAP).unwrap();
        assert!((d.prob_at(17) - 1.0 / 512.0).abs() < 1e-15);
    }

    #[test]
    fn nearest_neighbour_chain_table() {
        // σ̄ = + on both sides, L = 3.
        let (b, j, h) = (0.7, 1.0, 0.2);
        let sys = LatticeSystem::new(1, 3, Boundary::Plus, Kernel::NearestNeighbor { j }, b, h).unwrap();
        let r = sys.rmrf_clique_potentials(CAP).unwrap();
        let dist = ExactDistribution::from_density(&r, CAP).unwrap();
        let mut w = vec![];
        for idx in 0..8 {
            let s: Vec<f64> = (0..3).map(|k| spin((idx >> k) & 1)).collect();
            let e = j * (1.0 * s[0] + s[0] * s[1] + s[1] * s[2] + s[2] * 1.0) + h * (s[0] + s[1] + s[2]);
            w.push((b * e).exp());
        }
        let z: f64 = w.iter().sum();
        for (idx, wi) in w.iter().enumerate() {
            assert!((dist.prob_at(idx) - wi / z).abs() < 1e-15);
        }
    }

    #[test]
    fn site_potentials_sum_to_energy() {
        let k = Kernel::kac(Profile::Bump, 0.25);
        let sys = LatticeSystem::new(1, 7, Boundary::Minus, k, 1.3, -0.2).unwrap();
        let sigma = [1, -1, -1, 1, 1, 1, -1];
        let s: f64 = sys.site_log_potentials(&sigma).iter().sum();
        assert!((s + 1.3 * sys.hamiltonian(&sigma)).abs() < 1e-13);
    }

    #[test]
    fn explicit_boundary_must_cover_range() {
        let k = Kernel::NearestNeighbor { j: 1.0 };
        let mut m = BTreeMap::new();
        m.insert(vec![-1], 1i8);
        let err = LatticeSystem::new(1, 4, Boundary::Explicit(m.clone()), k.clone(), 1.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
        m.insert(vec![4], -1);
        let sys = LatticeSystem::new(1, 4, Boundary::Explicit(m), k, 1.0, 0.0).unwrap();
        assert_eq!(sys.exterior_field(), &[1.0, 0.0, 0.0, -1.0]);
    }

    #[test]
    fn infinite_range_exterior_field() {
        let k = Kernel::long_range(1.0, 0.5);
        let sys = LatticeSystem::new(1, 3, Boundary::Plus, k, 1.0, 0.0).unwrap();
        // site 0: left distances 1,2,… ; right distances 3,4,…; cutoff 1.
        let left: f64 = (2..1_000_000u64).map(|d| 1.0 / (d * d) as f64).sum::<f64>() + 1e-6;
        let right: f64 = (3..1_000_000u64).map(|d| 1.0 / (d * d) as f64).sum::<f64>() + 1e-6;
        assert!((sys.exterior_field()[0] - left - right).abs() < 1e-11);
        assert!(LatticeSystem::new(2, 3, Boundary::Plus, Kernel::long_range(1.0, 0.5), 1.0, 0.0).is_err());
    }

    #[test]
    fn mc_pressure_tracks_exact() {
        let k = Kernel::kac(Profile::Bump, 0.25);
        let sys = LatticeSystem::new(1, 10, Boundary::Plus, k, 0.8, 0.1).unwrap();
        let exact = sys.finite_pressure(CAP, None).unwrap();
        let cfg = McConfig {
            seed: 7,
            intervals: 16,
            burn_in: 200,
            sweeps: 4000,
        };
        let mc = sys.log_partition_mc(&cfg) / (0.8 * 10.0);
        assert!((mc - exact).abs() < 0.02, "{mc} vs {exact}");
        let small_cap = sys.finite_pressure(16, None);
        assert!(matches!(small_cap, Err(Error::Capacity { .. })));
        assert!(sys.finite_pressure(16, Some(&cfg)).is_ok());
    }
}
