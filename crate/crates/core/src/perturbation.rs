//! Relating a baseline model to an alternative: perturbation type, the
//! decomposition of new maximal cliques, and the excess factor.

use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::graph::{is_subset, UndirectedGraph};
use crate::model::{clique_index, decode, table_size, ExactDistribution, LogLinearModel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PerturbationType {
    TypeI,
    TypeII,
    TypeIII,
}

/// A maximal clique of the alternative graph together with the base cliques
/// it contains and the base cliques whose potentials it absorbs.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CliqueRewrite {
    pub clique: Vec<usize>,
    pub contains: Vec<Vec<usize>>,
    pub absorbs: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub ptype: PerturbationType,
    /// Cliques common to both models whose factors differ.
    pub changed: Vec<Vec<usize>>,
    pub unions: Vec<CliqueRewrite>,
    pub supersets: Vec<CliqueRewrite>,
    pub new_cliques: Vec<Vec<usize>>,
    /// Edges of the alternative graph absent from the base graph.
    pub added_edges: Vec<(usize, usize)>,
}

impl PerturbationReport {
    fn type_three() -> Self {
        PerturbationReport {
            ptype: PerturbationType::TypeIII,
            changed: vec![],
            unions: vec![],
            supersets: vec![],
            new_cliques: vec![],
            added_edges: vec![],
        }
    }
}

/// Classifies by graph structure only; factor changes are not inspected.
pub fn classify_graphs(base: &UndirectedGraph, alt: &UndirectedGraph) -> PerturbationReport {
    if base.node_count() != alt.node_count() {
        return PerturbationReport::type_three();
    }
    let be = base.edges();
    if be.iter().any(|&(a, b)| !alt.has_edge(a, b)) {
        return PerturbationReport::type_three();
    }
    let added: Vec<(usize, usize)> = alt.edges().into_iter().filter(|&(a, b)| !base.has_edge(a, b)).collect();
    if added.is_empty() {
        return PerturbationReport {
            ptype: PerturbationType::TypeI,
            ..PerturbationReport::type_three()
        };
    }
    let bc = base.maximal_cliques();
    let ac = alt.maximal_cliques();
    let vanished: Vec<&Vec<usize>> = bc.iter().filter(|c| !ac.contains(c)).collect();
    let mut claimed = vec![false; vanished.len()];
    let mut unions = Vec::new();
    let mut supersets = Vec::new();
    let mut new_cliques = Vec::new();
    for c in ac.iter().filter(|c| !bc.contains(c)) {
        let contains: Vec<Vec<usize>> = bc.iter().filter(|b| is_subset(b, c)).cloned().collect();
        let mut absorbs = Vec::new();
        for (k, v) in vanished.iter().enumerate() {
            if !claimed[k] && is_subset(v, c) {
                claimed[k] = true;
                absorbs.push((*v).clone());
            }
        }
        let mut union: Vec<usize> = contains.iter().flatten().copied().collect();
        union.sort_unstable();
        union.dedup();
        let rewrite = CliqueRewrite {
            clique: c.clone(),
            contains: contains.clone(),
            absorbs,
        };
        if contains.len() >= 2 && &union == c {
            unions.push(rewrite);
        } else if !contains.is_empty() {
            supersets.push(rewrite);
        } else {
            new_cliques.push(c.clone());
        }
    }
    debug_assert!(claimed.iter().all(|&c| c), "every vanished base clique lies inside some new clique");
    PerturbationReport {
        ptype: PerturbationType::TypeII,
        changed: vec![],
        unions,
        supersets,
        new_cliques,
        added_edges: added,
    }
}

pub fn classify(base: &LogLinearModel, alt: &LogLinearModel) -> PerturbationReport {
    if base.cards() != alt.cards() {
        return PerturbationReport::type_three();
    }
    let mut report = classify_graphs(base.graph(), alt.graph());
    if report.ptype == PerturbationType::TypeIII {
        return report;
    }
    report.changed = base
        .factors()
        .iter()
        .filter_map(|f| {
            alt.factor(&f.clique)
                .filter(|g| g.weight != f.weight || g.table != f.table)
                .map(|_| f.clique.clone())
        })
        .collect();
    report
}

/// One additive term of `log Φ`, supported on `clique`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExcessTerm {
    pub clique: Vec<usize>,
    pub log_table: Vec<f64>,
}

/// `log Φ` stored as a sum of per-clique tables over a product space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExcessFactor {
    pub cards: Vec<usize>,
    pub terms: Vec<ExcessTerm>,
}

impl ExcessFactor {
    pub fn empty(cards: Vec<usize>) -> Self {
        ExcessFactor { cards, terms: vec![] }
    }

    /// `log Φ(x)`.
    pub fn evaluate(&self, x: &[usize]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.log_table[clique_index(&t.clique, &self.cards, x)])
            .sum()
    }

    /// `log Φ` at every configuration, in index order.
    pub fn tabulate(&self) -> Vec<f64> {
        let size: usize = self.cards.iter().product();
        let mut x = vec![0; self.cards.len()];
        (0..size)
            .map(|i| {
                decode(i, &self.cards, &mut x);
                self.evaluate(&x)
            })
            .collect()
    }

    /// Restricts to the free nodes after fixing `context_nodes` to
    /// `context_values`; the same substitution applies to every term.
    pub fn restrict(&self, context_nodes: &[usize], context_values: &[usize]) -> Result<ExcessFactor> {
        let n = self.cards.len();
        let mut template = vec![0; n];
        let mut fixed = vec![false; n];
        for (&v, &s) in context_nodes.iter().zip(context_values) {
            if v >= n || s >= self.cards[v] {
                return input(format!("invalid context entry {v}={s}"));
            }
            fixed[v] = true;
            template[v] = s;
        }
        let mut new_id = vec![usize::MAX; n];
        let mut free_cards = Vec::new();
        for v in 0..n {
            if !fixed[v] {
                new_id[v] = free_cards.len();
                free_cards.push(self.cards[v]);
            }
        }
        let mut terms = Vec::new();
        for t in &self.terms {
            let free: Vec<usize> = t.clique.iter().copied().filter(|&v| !fixed[v]).collect();
            let sub_cards: Vec<usize> = free.iter().map(|&v| self.cards[v]).collect();
            let size: usize = sub_cards.iter().product();
            let mut x = template.clone();
            let mut local = vec![0; free.len()];
            let mut table = Vec::with_capacity(size);
            for idx in 0..size {
                decode(idx, &sub_cards, &mut local);
                for (&v, &s) in free.iter().zip(&local) {
                    x[v] = s;
                }
                table.push(t.log_table[clique_index(&t.clique, &self.cards, &x)]);
            }
            terms.push(ExcessTerm {
                clique: free.iter().map(|&v| new_id[v]).collect(),
                log_table: table,
            });
        }
        Ok(ExcessFactor {
            cards: free_cards,
            terms,
        })
    }
}

fn term_on(clique: &[usize], cards: &[usize], f: impl Fn(&[usize]) -> f64) -> ExcessTerm {
    let size = table_size(clique, cards);
    let sub: Vec<usize> = clique.iter().map(|&v| cards[v]).collect();
    let mut x = vec![0; cards.len()];
    let mut local = vec![0; clique.len()];
    let log_table = (0..size)
        .map(|idx| {
            decode(idx, &sub, &mut local);
            for (&v, &s) in clique.iter().zip(&local) {
                x[v] = s;
            }
            f(&x)
        })
        .collect();
    ExcessTerm {
        clique: clique.to_vec(),
        log_table,
    }
}

pub fn excess_factor(base: &LogLinearModel, alt: &LogLinearModel, report: &PerturbationReport) -> Result<ExcessFactor> {
    if report.ptype == PerturbationType::TypeIII {
        return Err(Error::Unsupported(
            "type III perturbations (changed node sets or removed edges) have no excess factor".into(),
        ));
    }
    let cards = base.cards().to_vec();
    let mut terms = Vec::new();
    for c in &report.changed {
        let (f, g) = (base.factor(c).expect("common clique"), alt.factor(c).expect("common clique"));
        terms.push(term_on(c, &cards, |x| g.log_potential(&cards, x) - f.log_potential(&cards, x)));
    }
    for r in report.unions.iter().chain(&report.supersets) {
        let g = alt.factor(&r.clique).expect("alternative clique");
        let absorbed: Vec<_> = r.absorbs.iter().map(|c| base.factor(c).expect("base clique")).collect();
        terms.push(term_on(&r.clique, &cards, |x| {
            g.log_potential(&cards, x) - absorbed.iter().map(|f| f.log_potential(&cards, x)).sum::<f64>()
        }));
    }
    for c in &report.new_cliques {
        let g = alt.factor(c).expect("alternative clique");
        terms.push(term_on(c, &cards, |x| g.log_potential(&cards, x)));
    }
    terms.sort_by(|a, b| a.clique.cmp(&b.clique));
    Ok(ExcessFactor { cards, terms })
}

/// `E_base[Φ]`, the ratio of alternative to base partition functions.
pub fn partition_ratio(base: &ExactDistribution, ef: &ExcessFactor) -> f64 {
    base.log_mean_exp(&ef.tabulate()).exp()
}

/// `Φ(x) / E_base[Φ]`.
pub fn likelihood_ratio(base: &ExactDistribution, ef: &ExcessFactor, x: &[usize]) -> f64 {
    let log_mean = base.log_mean_exp(&ef.tabulate());
    (ef.evaluate(x) - log_mean).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{LogDensity, DEFAULT_ENUMERATION_CAP};

    fn medical_base() -> LogLinearModel {
        let g = UndirectedGraph::from_edges(4, &[(0, 1), (1, 2), (1, 3), (2, 3)]).unwrap();
        let mut m = LogLinearModel::zeros(g, vec![2; 4]).unwrap();
        m.set_factor(&[0, 1], 1.5, vec![1.0, 1.0, 0.0, 1.0]).unwrap();
        m.set_factor(&[1, 2, 3], 0.4, vec![0.0, 1.0, 2.0, 0.5, -1.0, 0.0, 0.3, 1.0]).unwrap();
        m
    }

    fn ten_node() -> UndirectedGraph {
        let e = [
            (1, 2),
            (2, 3),
            (3, 4),
            (3, 6),
            (3, 7),
            (4, 6),
            (6, 7),
            (4, 5),
            (5, 6),
            (5, 8),
            (8, 9),
            (8, 10),
            (9, 10),
        ];
        let e: Vec<_> = e.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
        UndirectedGraph::from_edges(10, &e).unwrap()
    }

    #[test]
    fn type_one_weight_scaling() {
        let base = medical_base();
        let mut alt = base.clone();
        alt.set_factor(&[0, 1], 1.5 * 0.8, vec![1.0, 1.0, 0.0, 1.0]).unwrap();
        let r = classify(&base, &alt);
        assert_eq!(r.ptype, PerturbationType::TypeI);
        assert_eq!(r.changed, vec![vec![0, 1]]);
        let ef = excess_factor(&base, &alt, &r).unwrap();
        assert_eq!(ef.terms.len(), 1);
        let a = -0.2;
        for (idx, f) in [1.0, 1.0, 0.0, 1.0].iter().enumerate() {
            assert!((ef.terms[0].log_table[idx] - a * 1.5 * f).abs() < 1e-15);
        }
    }

    #[test]
    fn type_two_added_edge_one_four() {
        let base = medical_base();
        let mut g = base.graph().clone();
        g.add_edge(0, 3).unwrap();
        let mut alt = LogLinearModel::zeros(g, vec![2; 4]).unwrap();
        let ft: Vec<f64> = (0..8).map(|i| (i % 3) as f64).collect();
        alt.set_factor(&[0, 1, 3], 2.0, ft.clone()).unwrap();
        let f234 = base.factor(&[1, 2, 3]).unwrap().clone();
        alt.set_factor(&[1, 2, 3], f234.weight, f234.table).unwrap();
        let r = classify(&base, &alt);
        assert_eq!(r.ptype, PerturbationType::TypeII);
        assert!(r.unions.is_empty() && r.new_cliques.is_empty() && r.changed.is_empty());
        assert_eq!(r.supersets.len(), 1);
        assert_eq!(r.supersets[0].clique, vec![0, 1, 3]);
        assert_eq!(r.supersets[0].absorbs, vec![vec![0, 1]]);
        assert_eq!(r.added_edges, vec![(0, 3)]);
        let ef = excess_factor(&base, &alt, &r).unwrap();
        let f12 = [1.0, 1.0, 0.0, 1.0];
        for idx in 0..16 {
            let mut x = [0; 4];
            decode(idx, &[2; 4], &mut x);
            let want = 2.0 * ft[x[0] + 2 * x[1] + 4 * x[3]] - 1.5 * f12[x[0] + 2 * x[1]];
            assert!((ef.evaluate(&x) - want).abs() < 1e-14);
        }
    }

    #[test]
    fn ten_node_decompositions() {
        let g = ten_node();
        let add = |a: usize, b: usize| {
            let mut h = g.clone();
            h.add_edge(a - 1, b - 1).unwrap();
            classify_graphs(&g, &h)
        };
        // 4-7 merges {3,4,6} and {3,6,7}.
        let r = add(4, 7);
        assert_eq!(r.unions.len(), 1);
        assert_eq!(r.unions[0].clique, vec![2, 3, 5, 6]);
        assert_eq!(r.unions[0].absorbs, vec![vec![2, 3, 5], vec![2, 5, 6]]);
        // 6-10 creates a brand new clique.
        let r = add(6, 10);
        assert_eq!(r.new_cliques, vec![vec![5, 9]]);
        assert!(r.unions.is_empty() && r.supersets.is_empty());
        // 5-10 enlarges {5,8}.
        let r = add(5, 10);
        assert_eq!(r.supersets.len(), 1);
        assert_eq!(r.supersets[0].clique, vec![4, 7, 9]);
        assert_eq!(r.supersets[0].absorbs, vec![vec![4, 7]]);
    }

    #[test]
    fn identical_models_give_empty_factor() {
        let base = medical_base();
        let r = classify(&base, &base);
        assert_eq!(r.ptype, PerturbationType::TypeI);
        let ef = excess_factor(&base, &base, &r).unwrap();
        assert!(ef.terms.is_empty());
        let dist = ExactDistribution::from_density(&base, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!((partition_ratio(&dist, &ef) - 1.0).abs() < 1e-14);
        assert!((likelihood_ratio(&dist, &ef, &[1, 0, 1, 0]) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn type_three_detection() {
        let base = medical_base();
        let g = UndirectedGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let alt = LogLinearModel::zeros(g, vec![2; 4]).unwrap();
        let r = classify(&base, &alt);
        assert_eq!(r.ptype, PerturbationType::TypeIII);
        assert!(matches!(excess_factor(&base, &alt, &r), Err(Error::Unsupported(_))));
        let other = LogLinearModel::zeros(UndirectedGraph::new(5), vec![2; 5]).unwrap();
        assert_eq!(classify(&base, &other).ptype, PerturbationType::TypeIII);
    }

    #[test]
    fn restrict_substitutes_context_everywhere() {
        let base = medical_base();
        let mut alt = base.clone();
        alt.set_factor(&[1, 2, 3], -0.3, vec![1.0; 8]).unwrap();
        alt.set_factor(&[0, 1], 0.5, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let ef = excess_factor(&base, &alt, &classify(&base, &alt)).unwrap();
        let red = ef.restrict(&[1], &[1]).unwrap();
        for idx in 0..8 {
            let mut z = [0; 3];
            decode(idx, &[2; 3], &mut z);
            let x = [z[0], 1, z[1], z[2]];
            assert!((red.evaluate(&z) - ef.evaluate(&x)).abs() < 1e-15);
            let rb = base.reduce(&[1], &[1]).unwrap();
            let ra = alt.reduce(&[1], &[1]).unwrap();
            let lhs = ra.log_weight(&z);
            let rhs = rb.log_weight(&z) + red.evaluate(&z);
            assert!((lhs - rhs).abs() < 1e-13);
        }
    }
}
