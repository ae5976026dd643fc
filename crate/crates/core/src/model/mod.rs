//! Log-linear Markov random fields over maximal cliques, exact enumeration,
//! and context reduction.

pub mod io;

use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::graph::{CliqueSet, InducedSubgraph, UndirectedGraph};
use crate::numeric::{logsumexp, pairwise_sum};

/// Default cap on the number of enumerated configurations.
pub const DEFAULT_ENUMERATION_CAP: u64 = 1 << 24;

/// Mixed-radix index of `x` restricted to `nodes`; `nodes[0]` is the least
/// significant digit.
pub fn clique_index(nodes: &[usize], cards: &[usize], x: &[usize]) -> usize {
    let mut idx = 0;
    let mut stride = 1;
    for &v in nodes {
        idx += x[v] * stride;
        stride *= cards[v];
    }
    idx
}

/// Number of joint configurations of `nodes`.
pub fn table_size(nodes: &[usize], cards: &[usize]) -> usize {
    nodes.iter().map(|&v| cards[v]).product()
}

/// Decodes a full-space index into `out` (node 0 least significant).
pub fn decode(mut index: usize, cards: &[usize], out: &mut [usize]) {
    for (slot, &k) in out.iter_mut().zip(cards) {
        *slot = index % k;
        index /= k;
    }
}

/// Encodes a configuration as its full-space index.
pub fn encode(x: &[usize], cards: &[usize]) -> usize {
    let mut idx = 0;
    let mut stride = 1;
    for (&xi, &k) in x.iter().zip(cards) {
        idx += xi * stride;
        stride *= k;
    }
    idx
}

/// Size of the product space, or a capacity error if it exceeds `cap`.
pub fn state_space_size(cards: &[usize], cap: u64) -> Result<usize> {
    let mut total: u128 = 1;
    for &k in cards {
        total = total.saturating_mul(k as u128);
    }
    if total > cap as u128 {
        return Err(Error::Capacity { required: total, cap });
    }
    Ok(total as usize)
}

pub fn check_configuration(cards: &[usize], x: &[usize]) -> Result<()> {
    if x.len() != cards.len() {
        return input(format!("configuration has {} entries, expected {}", x.len(), cards.len()));
    }
    for (i, (&xi, &k)) in x.iter().zip(cards).enumerate() {
        if xi >= k {
            return input(format!("state {xi} of node {i} is outside 0..{k}"));
        }
    }
    Ok(())
}

/// Anything that assigns an unnormalised log-weight to configurations of a
/// finite product space.
pub trait LogDensity {
    fn cardinalities(&self) -> &[usize];
    fn log_weight(&self, x: &[usize]) -> f64;
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CliqueFactor {
    pub clique: Vec<usize>,
    pub weight: f64,
    /// Dense feature table in mixed-radix order over `clique`.
    pub table: Vec<f64>,
}

impl CliqueFactor {
    pub fn log_potential(&self, cards: &[usize], x: &[usize]) -> f64 {
        self.weight * self.table[clique_index(&self.clique, cards, x)]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogLinearModel {
    graph: UndirectedGraph,
    cards: Vec<usize>,
    cliques: CliqueSet,
    factors: Vec<CliqueFactor>,
}

impl LogLinearModel {
    /// Builds a model; `factors` must cover exactly the maximal cliques of
    /// `graph` (in any order).
    pub fn new(graph: UndirectedGraph, cards: Vec<usize>, mut factors: Vec<CliqueFactor>) -> Result<Self> {
        if cards.len() != graph.node_count() {
            return input(format!(
                "{} cardinalities given for {} nodes",
                cards.len(),
                graph.node_count()
            ));
        }
        if let Some(i) = cards.iter().position(|&k| k < 2) {
            return input(format!("node {i} has cardinality {} (need at least 2)", cards[i]));
        }
        let cliques = graph.maximal_cliques();
        for f in &mut factors {
            let mut sorted = f.clique.clone();
            sorted.sort_unstable();
            if sorted != f.clique {
                return input(format!("factor clique {:?} is not listed in ascending order", f.clique));
            }
            if !cliques.contains(&f.clique) {
                return input(format!("factor clique {:?} is not a maximal clique of the graph", f.clique));
            }
            let size = table_size(&f.clique, &cards);
            if f.table.len() != size {
                return input(format!(
                    "factor on {:?} has {} table entries, expected {size}",
                    f.clique,
                    f.table.len()
                ));
            }
            if !f.weight.is_finite() || f.table.iter().any(|v| !v.is_finite()) {
                return input(format!("factor on {:?} has a non-finite entry", f.clique));
            }
        }
        factors.sort_by(|a, b| a.clique.cmp(&b.clique));
        for w in factors.windows(2) {
            if w[0].clique == w[1].clique {
                return input(format!("duplicate factor on {:?}", w[0].clique));
            }
        }
        if factors.len() != cliques.len() {
            let missing: Vec<_> = cliques
                .iter()
                .filter(|c| factors.iter().all(|f| &f.clique != *c))
                .collect();
            return input(format!("missing factors for maximal cliques {missing:?}"));
        }
        Ok(LogLinearModel {
            graph,
            cards,
            cliques,
            factors,
        })
    }

    /// Model with every weight and feature zero (the uniform distribution).
    pub fn zeros(graph: UndirectedGraph, cards: Vec<usize>) -> Result<Self> {
        let cliques = graph.maximal_cliques();
        if cards.len() != graph.node_count() {
            return input("cardinality list does not match node count");
        }
        let factors = cliques
            .iter()
            .map(|c| CliqueFactor {
                clique: c.clone(),
                weight: 0.0,
                table: vec![0.0; table_size(c, &cards)],
            })
            .collect();
        Self::new(graph, cards, factors)
    }

    /// Replaces the factor on `clique`.
    pub fn set_factor(&mut self, clique: &[usize], weight: f64, table: Vec<f64>) -> Result<()> {
        let pos = self
            .cliques
            .position(clique)
            .ok_or_else(|| Error::Input(format!("{clique:?} is not a maximal clique")))?;
        if table.len() != table_size(clique, &self.cards) {
            return input(format!("table for {clique:?} has the wrong length"));
        }
        if !weight.is_finite() || table.iter().any(|v| !v.is_finite()) {
            return input("non-finite factor entry");
        }
        self.factors[pos] = CliqueFactor {
            clique: clique.to_vec(),
            weight,
            table,
        };
        Ok(())
    }

    pub fn graph(&self) -> &UndirectedGraph {
        &self.graph
    }

    pub fn cliques(&self) -> &CliqueSet {
        &self.cliques
    }

    pub fn factors(&self) -> &[CliqueFactor] {
        &self.factors
    }

    pub fn factor(&self, clique: &[usize]) -> Option<&CliqueFactor> {
        self.cliques.position(clique).map(|i| &self.factors[i])
    }

    pub fn node_count(&self) -> usize {
        self.cards.len()
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    /// `Σ_c log Ψ_c(x)`.
    pub fn log_potential_sum(&self, x: &[usize]) -> f64 {
        self.factors.iter().map(|f| f.log_potential(&self.cards, x)).sum()
    }

    pub fn reduce(&self, context_nodes: &[usize], context_values: &[usize]) -> Result<ReducedModel> {
        ReducedModel::new(self.clone(), context_nodes, context_values)
    }

    /// Splits the maximal cliques into those meeting the context and the rest.
    pub fn clique_class_partition(&self, context_nodes: &[usize]) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        let mut touched = Vec::new();
        let mut untouched = Vec::new();
        for c in &self.cliques {
            if c.iter().any(|v| context_nodes.contains(v)) {
                touched.push(c.clone());
            } else {
                untouched.push(c.clone());
            }
        }
        (touched, untouched)
    }
}

impl LogDensity for LogLinearModel {
    fn cardinalities(&self) -> &[usize] {
        &self.cards
    }
    fn log_weight(&self, x: &[usize]) -> f64 {
        self.log_potential_sum(x)
    }
}

/// A factor of a reduced model: the base factor with its context slots fixed.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedFactor {
    pub base_clique: Vec<usize>,
    /// Free members of the clique, in free-graph ids.
    pub free_clique: Vec<usize>,
    /// `log Ψ_c[u]` over the free members, mixed-radix order.
    pub log_table: Vec<f64>,
}

/// A model conditioned on a fixed assignment of a node subset.
#[derive(Clone, Debug)]
pub struct ReducedModel {
    base: LogLinearModel,
    context_nodes: Vec<usize>,
    context_values: Vec<usize>,
    free: InducedSubgraph,
    free_cards: Vec<usize>,
    template: Vec<usize>,
}

impl ReducedModel {
    pub fn new(base: LogLinearModel, context_nodes: &[usize], context_values: &[usize]) -> Result<Self> {
        let n = base.node_count();
        if context_nodes.len() != context_values.len() {
            return input("context nodes and values differ in length");
        }
        let mut template = vec![0; n];
        let mut in_context = vec![false; n];
        for (&v, &s) in context_nodes.iter().zip(context_values) {
            if v >= n {
                return input(format!("unknown context node {v}"));
            }
            if in_context[v] {
                return input(format!("context node {v} listed twice"));
            }
            if s >= base.cards[v] {
                return input(format!("context value {s} invalid for node {v}"));
            }
            in_context[v] = true;
            template[v] = s;
        }
        let keep: Vec<usize> = (0..n).filter(|&v| !in_context[v]).collect();
        if keep.is_empty() {
            return input("context covers every node");
        }
        let free = base.graph.induced_subgraph(&keep)?;
        let free_cards = free.new_to_old.iter().map(|&v| base.cards[v]).collect();
        let mut pairs: Vec<(usize, usize)> = context_nodes.iter().copied().zip(context_values.iter().copied()).collect();
        pairs.sort_unstable();
        Ok(ReducedModel {
            base,
            context_nodes: pairs.iter().map(|p| p.0).collect(),
            context_values: pairs.iter().map(|p| p.1).collect(),
            free,
            free_cards,
            template,
        })
    }

    pub fn base(&self) -> &LogLinearModel {
        &self.base
    }

    pub fn context_nodes(&self) -> &[usize] {
        &self.context_nodes
    }

    pub fn context_values(&self) -> &[usize] {
        &self.context_values
    }

    pub fn free_graph(&self) -> &UndirectedGraph {
        &self.free.graph
    }

    /// Base node id of each free node.
    pub fn free_nodes(&self) -> &[usize] {
        &self.free.new_to_old
    }

    /// Full configuration `z ⊕ u`.
    pub fn extend(&self, z: &[usize]) -> Vec<usize> {
        let mut x = self.template.clone();
        for (&old, &s) in self.free.new_to_old.iter().zip(z) {
            x[old] = s;
        }
        x
    }

    pub fn clique_classes(&self) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        self.base.clique_class_partition(&self.context_nodes)
    }

    /// Per-clique reduced log-potentials `log Ψ_c[u]` over free members.
    pub fn reduced_factors(&self) -> Vec<ReducedFactor> {
        let mut out = Vec::with_capacity(self.base.factors.len());
        for f in &self.base.factors {
            let free_members: Vec<usize> = f.clique.iter().filter_map(|&v| self.free.old_to_new[v]).collect();
            let size = table_size(&free_members, &self.free_cards);
            let mut x = self.template.clone();
            let mut local = vec![0; free_members.len()];
            let sub_cards: Vec<usize> = free_members.iter().map(|&v| self.free_cards[v]).collect();
            let mut table = Vec::with_capacity(size);
            for idx in 0..size {
                decode(idx, &sub_cards, &mut local);
                for (&nv, &s) in free_members.iter().zip(&local) {
                    x[self.free.new_to_old[nv]] = s;
                }
                table.push(f.log_potential(&self.base.cards, &x));
            }
            out.push(ReducedFactor {
                base_clique: f.clique.clone(),
                free_clique: free_members,
                log_table: table,
            });
        }
        out
    }
}

impl LogDensity for ReducedModel {
    fn cardinalities(&self) -> &[usize] {
        &self.free_cards
    }
    fn log_weight(&self, z: &[usize]) -> f64 {
        self.base.log_potential_sum(&self.extend(z))
    }
}

/// A fully enumerated, normalised distribution on a finite product space.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactDistribution {
    cards: Vec<usize>,
    log_prob: Vec<f64>,
    log_z: f64,
}

impl ExactDistribution {
    pub fn from_density<D: LogDensity + ?Sized>(d: &D, cap: u64) -> Result<Self> {
        let cards = d.cardinalities().to_vec();
        let size = state_space_size(&cards, cap)?;
        let mut x = vec![0; cards.len()];
        let mut logw = Vec::with_capacity(size);
        for idx in 0..size {
            decode(idx, &cards, &mut x);
            logw.push(d.log_weight(&x));
        }
        Ok(Self::from_log_weights(cards, logw))
    }

    /// Normalises a table of unnormalised log-weights.
    pub fn from_log_weights(cards: Vec<usize>, mut log_w: Vec<f64>) -> Self {
        let log_z = logsumexp(&log_w);
        for v in &mut log_w {
            *v -= log_z;
        }
        ExactDistribution {
            cards,
            log_prob: log_w,
            log_z,
        }
    }

    pub fn cardinalities(&self) -> &[usize] {
        &self.cards
    }

    pub fn len(&self) -> usize {
        self.log_prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_prob.is_empty()
    }

    /// Log-partition function of the density this was built from.
    pub fn log_partition(&self) -> f64 {
        self.log_z
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_prob
    }

    pub fn probability(&self, x: &[usize]) -> Result<f64> {
        check_configuration(&self.cards, x)?;
        Ok(self.log_prob[encode(x, &self.cards)].exp())
    }

    pub fn prob_at(&self, index: usize) -> f64 {
        self.log_prob[index].exp()
    }

    /// Evaluates `f` on every configuration, in index order.
    pub fn tabulate<F: FnMut(&[usize]) -> f64>(&self, mut f: F) -> Vec<f64> {
        let mut x = vec![0; self.cards.len()];
        (0..self.len())
            .map(|i| {
                decode(i, &self.cards, &mut x);
                f(&x)
            })
            .collect()
    }

    /// `E[f]` for a tabulated observable.
    pub fn expect(&self, f: &[f64]) -> f64 {
        assert_eq!(f.len(), self.len(), "observable table has the wrong length");
        let terms: Vec<f64> = self.log_prob.iter().zip(f).map(|(&lp, &v)| lp.exp() * v).collect();
        pairwise_sum(&terms)
    }

    /// `log E[exp(g)]` for a tabulated `g`.
    pub fn log_mean_exp(&self, g: &[f64]) -> f64 {
        assert_eq!(g.len(), self.len());
        let v: Vec<f64> = self.log_prob.iter().zip(g).map(|(&lp, &x)| lp + x).collect();
        // Subtracting the stored mass makes constant g exact.
        logsumexp(&v) - logsumexp(&self.log_prob)
    }

    /// The distribution proportional to `exp(g) · p`.
    pub fn reweight(&self, g: &[f64]) -> ExactDistribution {
        let lw: Vec<f64> = self.log_prob.iter().zip(g).map(|(&lp, &x)| lp + x).collect();
        let mut out = Self::from_log_weights(self.cards.clone(), lw);
        out.log_z += self.log_z;
        out
    }
}

pub fn log_partition<D: LogDensity + ?Sized>(m: &D, cap: u64) -> Result<f64> {
    Ok(ExactDistribution::from_density(m, cap)?.log_partition())
}

pub fn probability<D: LogDensity + ?Sized>(m: &D, x: &[usize], cap: u64) -> Result<f64> {
    check_configuration(m.cardinalities(), x)?;
    let dist = ExactDistribution::from_density(m, cap)?;
    dist.probability(x)
}

pub fn expectation<D: LogDensity + ?Sized, F: FnMut(&[usize]) -> f64>(m: &D, f: F, cap: u64) -> Result<f64> {
    let dist = ExactDistribution::from_density(m, cap)?;
    Ok(dist.expect(&dist.tabulate(f)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn medical_graph() -> UndirectedGraph {
        UndirectedGraph::from_edges(4, &[(0, 1), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn medical_model() -> LogLinearModel {
        let mut m = LogLinearModel::zeros(medical_graph(), vec![2; 4]).unwrap();
        // index = s + 2l; f = 1 except on (s0, l1).
        m.set_factor(&[0, 1], 1.5, vec![1.0, 1.0, 0.0, 1.0]).unwrap();
        m
    }

    #[test]
    fn uniform_partition() {
        let m = LogLinearModel::zeros(medical_graph(), vec![2; 4]).unwrap();
        let lz = log_partition(&m, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!((lz - 16f64.ln()).abs() < 1e-14);
        let p = probability(&m, &[1, 0, 1, 1], DEFAULT_ENUMERATION_CAP).unwrap();
        assert!((p - 1.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn medical_partition_and_probability() {
        let m = medical_model();
        let w = 1.5f64;
        let lz = log_partition(&m, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!((lz - (12.0 * w.exp() + 4.0).ln()).abs() < 1e-13);
        let p = probability(&m, &[0, 0, 1, 1], DEFAULT_ENUMERATION_CAP).unwrap();
        assert!((p - w.exp() / (12.0 * w.exp() + 4.0)).abs() < 1e-15);
    }

    #[test]
    fn single_node_partition() {
        let g = UndirectedGraph::new(1);
        let m = LogLinearModel::new(
            g,
            vec![2],
            vec![CliqueFactor {
                clique: vec![0],
                weight: 0.7,
                table: vec![0.0, 1.0],
            }],
        )
        .unwrap();
        assert!((log_partition(&m, 16).unwrap() - (0.7f64.exp() + 1.0).ln()).abs() < 1e-15);
    }

    #[test]
    fn capacity_error_names_required_size() {
        let m = LogLinearModel::zeros(medical_graph(), vec![2; 4]).unwrap();
        match log_partition(&m, 8) {
            Err(Error::Capacity { required, cap }) => {
                assert_eq!(required, 16);
                assert_eq!(cap, 8);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn expectation_examples() {
        let m = medical_model();
        let cap = DEFAULT_ENUMERATION_CAP;
        assert!((expectation(&m, |_| 1.0, cap).unwrap() - 1.0).abs() < 1e-14);
        let pt = [1, 1, 0, 1];
        let p = probability(&m, &pt, cap).unwrap();
        let e = expectation(&m, |x| if x == pt { 0.0 } else { 1.0 }, cap).unwrap();
        assert!((e - (1.0 - p)).abs() < 1e-14);
        // Event A = {node 2 in state 0}: brute force over 16 states.
        let dist = ExactDistribution::from_density(&m, cap).unwrap();
        let mut brute = 0.0;
        let mut z = 0.0;
        for idx in 0..16 {
            let mut x = [0; 4];
            decode(idx, &[2; 4], &mut x);
            let w = m.log_potential_sum(&x).exp();
            z += w;
            if x[2] == 0 {
                brute += w;
            }
        }
        let pa = dist.expect(&dist.tabulate(|x| (x[2] == 0) as u8 as f64));
        assert!((pa - brute / z).abs() < 1e-14);
    }

    #[test]
    fn invalid_configuration() {
        let m = medical_model();
        assert!(probability(&m, &[0, 0, 2, 0], 1 << 10).is_err());
        assert!(probability(&m, &[0, 0, 0], 1 << 10).is_err());
    }

    #[test]
    fn factors_must_match_cliques() {
        let g = medical_graph();
        let bad = vec![CliqueFactor {
            clique: vec![0, 1],
            weight: 1.0,
            table: vec![0.0; 4],
        }];
        assert!(LogLinearModel::new(g.clone(), vec![2; 4], bad).is_err());
        let wrong_len = vec![
            CliqueFactor {
                clique: vec![0, 1],
                weight: 1.0,
                table: vec![0.0; 3],
            },
            CliqueFactor {
                clique: vec![1, 2, 3],
                weight: 1.0,
                table: vec![0.0; 8],
            },
        ];
        assert!(LogLinearModel::new(g, vec![2; 4], wrong_len).is_err());
    }

    #[test]
    fn reduction_matches_conditional() {
        let m = medical_model();
        let r = m.reduce(&[2], &[1]).unwrap();
        let cap = DEFAULT_ENUMERATION_CAP;
        let full = ExactDistribution::from_density(&m, cap).unwrap();
        let red = ExactDistribution::from_density(&r, cap).unwrap();
        let mut denom = 0.0;
        for z in 0..8 {
            let mut zz = [0; 3];
            decode(z, &[2; 3], &mut zz);
            denom += full.probability(&r.extend(&zz)).unwrap();
        }
        for z in 0..8 {
            let mut zz = [0; 3];
            decode(z, &[2; 3], &mut zz);
            let want = full.probability(&r.extend(&zz)).unwrap() / denom;
            assert!((red.prob_at(z) - want).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_context_is_identity_and_full_context_rejected() {
        let m = medical_model();
        let r = m.reduce(&[], &[]).unwrap();
        let cap = 1 << 10;
        assert_eq!(
            ExactDistribution::from_density(&r, cap).unwrap().log_probs(),
            ExactDistribution::from_density(&m, cap).unwrap().log_probs()
        );
        assert!(m.reduce(&[0, 1, 2, 3], &[0, 0, 0, 0]).is_err());
    }

    #[test]
    fn reduced_factors_reassemble_density() {
        let m = medical_model();
        let r = m.reduce(&[1], &[0]).unwrap();
        let factors = r.reduced_factors();
        let cards = r.cardinalities().to_vec();
        for idx in 0..8 {
            let mut z = [0; 3];
            decode(idx, &cards, &mut z);
            let s: f64 = factors
                .iter()
                .map(|f| f.log_table[clique_index(&f.free_clique, &cards, &z)])
                .sum();
            assert!((s - r.log_weight(&z)).abs() < 1e-14);
        }
    }

    #[test]
    fn clique_classes() {
        let m = medical_model();
        let (u, e) = m.clique_class_partition(&[]);
        assert!(u.is_empty());
        assert_eq!(e.len(), 2);
        let (u, e) = m.clique_class_partition(&[0, 1, 2, 3]);
        assert_eq!(u.len(), 2);
        assert!(e.is_empty());
        let (u, e) = m.clique_class_partition(&[0]);
        assert_eq!(u, vec![vec![0, 1]]);
        assert_eq!(e, vec![vec![1, 2, 3]]);
    }
}
