//! Independent oracles shared by the integration tests. Nothing here calls
//! the routine it is used to check.

#![allow(dead_code)]

use mrfuq::graph::UndirectedGraph;
use mrfuq::model::{table_size, CliqueFactor, ExactDistribution, LogLinearModel};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const CAP: u64 = mrfuq::model::DEFAULT_ENUMERATION_CAP;

/// Maximal cliques by scanning every vertex subset, for `n ≤ 16`.
pub fn subset_lattice_cliques(n: usize, adj: &[u32]) -> Vec<Vec<usize>> {
    let is_clique = |s: u32| (0..n).all(|v| s & (1 << v) == 0 || (s & !(1 << v)) & !adj[v] == 0);
    let mut out = Vec::new();
    for s in 1u32..(1 << n) {
        if !is_clique(s) {
            continue;
        }
        let extendable = (0..n).any(|v| s & (1 << v) == 0 && s & !adj[v] == 0);
        if !extendable {
            out.push((0..n).filter(|v| s & (1 << v) != 0).collect::<Vec<_>>());
        }
    }
    out.sort();
    out
}

pub fn graph_from_mask(n: usize, mask: u64) -> (UndirectedGraph, Vec<u32>) {
    let mut g = UndirectedGraph::new(n);
    let mut adj = vec![0u32; n];
    let mut bit = 0;
    for i in 0..n {
        for j in i + 1..n {
            if mask & (1 << bit) != 0 {
                g.add_edge(i, j).unwrap();
                adj[i] |= 1 << j;
                adj[j] |= 1 << i;
            }
            bit += 1;
        }
    }
    (g, adj)
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> UndirectedGraph {
    let mut g = UndirectedGraph::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < p {
                g.add_edge(i, j).unwrap();
            }
        }
    }
    g
}

/// Random weights and features on every maximal clique.
pub fn random_model(rng: &mut ChaCha8Rng, g: UndirectedGraph, cards: Vec<usize>) -> LogLinearModel {
    let factors = g
        .maximal_cliques()
        .iter()
        .map(|c| CliqueFactor {
            clique: c.clone(),
            weight: rng.gen_range(-1.5..1.5),
            table: (0..table_size(c, &cards)).map(|_| rng.gen_range(-1.0..1.0)).collect(),
        })
        .collect();
    LogLinearModel::new(g, cards, factors).unwrap()
}

/// Same graph, fresh weights on a random subset of cliques.
pub fn random_type1(rng: &mut ChaCha8Rng, base: &LogLinearModel) -> LogLinearModel {
    let mut alt = base.clone();
    for f in base.factors() {
        if rng.gen::<bool>() {
            alt.set_factor(&f.clique, rng.gen_range(-1.5..1.5), f.table.clone()).unwrap();
        }
    }
    alt
}

/// One or two added edges, then random factors on the new clique set; base
/// factors are kept on cliques that survive.
pub fn random_type2(rng: &mut ChaCha8Rng, base: &LogLinearModel) -> Option<LogLinearModel> {
    let g = base.graph();
    let n = g.node_count();
    let missing: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .filter(|&(i, j)| !g.has_edge(i, j))
        .collect();
    if missing.is_empty() {
        return None;
    }
    let mut g2 = g.clone();
    let k = rng.gen_range(1..=missing.len().min(2));
    for _ in 0..k {
        let (i, j) = missing[rng.gen_range(0..missing.len())];
        g2.add_edge(i, j).unwrap();
    }
    let cards = base.cards().to_vec();
    let factors = g2
        .maximal_cliques()
        .iter()
        .map(|c| match base.factor(c) {
            Some(f) => f.clone(),
            None => CliqueFactor {
                clique: c.clone(),
                weight: rng.gen_range(-1.5..1.5),
                table: (0..table_size(c, &cards)).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            },
        })
        .collect();
    Some(LogLinearModel::new(g2, cards, factors).unwrap())
}

/// `Σ q̃ log(q̃/q)` directly from two enumerated distributions.
pub fn direct_kl(alt: &ExactDistribution, base: &ExactDistribution) -> f64 {
    alt.log_probs()
        .iter()
        .zip(base.log_probs())
        .map(|(&la, &lb)| if la == f64::NEG_INFINITY { 0.0 } else { la.exp() * (la - lb) })
        .sum()
}

/// Naive `log E[e^{λ f}]`.
pub fn naive_cgf(base: &ExactDistribution, f: &[f64], lambda: f64) -> f64 {
    let m = f.iter().map(|v| lambda * v).fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = (0..base.len()).map(|i| base.prob_at(i) * (lambda * f[i] - m).exp()).sum();
    m + s.ln()
}

/// `s · min_λ (Λ(sλ) + η)/λ` over a log-spaced grid on `[lo, hi]`.
pub fn grid_scan_bound(base: &ExactDistribution, f: &[f64], eta: f64, sign: f64, lo: f64, hi: f64, points: usize) -> f64 {
    let (a, b) = (lo.ln(), hi.ln());
    let mut best = f64::INFINITY;
    for k in 0..points {
        let l = (a + (b - a) * k as f64 / (points - 1) as f64).exp();
        best = best.min((naive_cgf(base, f, sign * l) + eta) / l);
    }
    sign * best
}

/// Plain bisection on a sign change.
pub fn bisection(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Ising energy by an explicit double loop over `Δ` and the exterior sites
/// of a 1-D box, for a coupling function `j(distance)` of finite range `r`.
pub fn naive_energy_1d(sigma: &[i8], exterior: f64, h: f64, r: i64, j: impl Fn(i64) -> f64) -> f64 {
    let l = sigma.len() as i64;
    let mut e = 0.0;
    for x in 0..l {
        for y in 0..l {
            if x != y {
                e -= 0.5 * j((x - y).abs()) * sigma[x as usize] as f64 * sigma[y as usize] as f64;
            }
        }
        for y in -r..l + r {
            if y < 0 || y >= l {
                e -= j((x - y).abs()) * sigma[x as usize] as f64 * exterior;
            }
        }
        e -= h * sigma[x as usize] as f64;
    }
    e
}

pub fn spins_of(idx: usize, n: usize) -> Vec<i8> {
    (0..n).map(|k| if (idx >> k) & 1 == 1 { 1 } else { -1 }).collect()
}

pub fn states_of(idx: usize, n: usize) -> Vec<usize> {
    (0..n).map(|k| (idx >> k) & 1).collect()
}
