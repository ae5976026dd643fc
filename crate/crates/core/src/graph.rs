//! Undirected graphs over dense node ids `0..n`, maximal cliques and
//! separation queries.

use std::collections::VecDeque;

use crate::error::{input, Result};

/// Fixed-width bitset used by the clique search.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn empty(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64).max(1)])
    }
    fn full(n: usize) -> Self {
        let mut b = Self::empty(n);
        for i in 0..n {
            b.insert(i);
        }
        b
    }
    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }
    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }
    fn and(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & b).collect())
    }
    fn and_not(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a & !b).collect())
    }
    fn or(&self, o: &Bits) -> Bits {
        Bits(self.0.iter().zip(&o.0).map(|(a, b)| a | b).collect())
    }
    fn count_and(&self, o: &Bits) -> u32 {
        self.0.iter().zip(&o.0).map(|(a, b)| (a & b).count_ones()).sum()
    }
    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let t = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + t)
            })
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UndirectedGraph {
    n: usize,
    adj: Vec<Vec<usize>>,
    bits: Vec<Bits>,
}

impl UndirectedGraph {
    pub fn new(n: usize) -> Self {
        UndirectedGraph {
            n,
            adj: vec![Vec::new(); n],
            bits: (0..n).map(|_| Bits::empty(n)).collect(),
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::new(n);
        for &(a, b) in edges {
            g.add_edge(a, b)?;
        }
        Ok(g)
    }

    /// Complete graph on `n` nodes.
    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for i in 0..n {
            for j in i + 1..n {
                g.add_edge(i, j).expect("valid ids");
            }
        }
        g
    }

    /// Adds `a-b`; adding an existing edge is a no-op.
    pub fn add_edge(&mut self, a: usize, b: usize) -> Result<()> {
        if a >= self.n || b >= self.n {
            return input(format!("edge {a}-{b} references a node outside 0..{}", self.n));
        }
        if a == b {
            return input(format!("self-loop on node {a}"));
        }
        if self.has_edge(a, b) {
            return Ok(());
        }
        for (x, y) in [(a, b), (b, a)] {
            let pos = self.adj[x].binary_search(&y).unwrap_err();
            self.adj[x].insert(pos, y);
            self.bits[x].insert(y);
        }
        Ok(())
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.n && b < self.n && self.adj[a].binary_search(&b).is_ok()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Edges `(i, j)` with `i < j`, sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for i in 0..self.n {
            for &j in &self.adj[i] {
                if i < j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// True if every pair in `nodes` is adjacent.
    pub fn is_clique(&self, nodes: &[usize]) -> bool {
        nodes
            .iter()
            .enumerate()
            .all(|(k, &a)| nodes[k + 1..].iter().all(|&b| self.has_edge(a, b)))
    }

    /// Maximal cliques by Bron–Kerbosch with Tomita pivoting.
    pub fn maximal_cliques(&self) -> CliqueSet {
        let mut out = Vec::new();
        if self.n > 0 {
            let mut r = Vec::new();
            self.bk(&mut r, Bits::full(self.n), Bits::empty(self.n), &mut out);
        }
        CliqueSet::from_unsorted(out)
    }

    fn bk(&self, r: &mut Vec<usize>, mut p: Bits, mut x: Bits, out: &mut Vec<Vec<usize>>) {
        if p.is_empty() {
            if x.is_empty() {
                out.push(r.clone());
            }
            return;
        }
        let px = p.or(&x);
        let pivot = px
            .iter()
            .max_by_key(|&u| (p.count_and(&self.bits[u]), std::cmp::Reverse(u)))
            .expect("P ∪ X is nonempty");
        let candidates: Vec<usize> = p.and_not(&self.bits[pivot]).iter().collect();
        for v in candidates {
            r.push(v);
            self.bk(r, p.and(&self.bits[v]), x.and(&self.bits[v]), out);
            r.pop();
            p.remove(v);
            x.insert(v);
        }
    }

    /// Subgraph induced by `keep`; nodes are relabelled in ascending order.
    pub fn induced_subgraph(&self, keep: &[usize]) -> Result<InducedSubgraph> {
        let mut new_to_old: Vec<usize> = keep.to_vec();
        new_to_old.sort_unstable();
        new_to_old.dedup();
        if let Some(&bad) = new_to_old.iter().find(|&&v| v >= self.n) {
            return input(format!("unknown node id {bad}"));
        }
        let mut old_to_new = vec![None; self.n];
        for (new, &old) in new_to_old.iter().enumerate() {
            old_to_new[old] = Some(new);
        }
        let mut g = UndirectedGraph::new(new_to_old.len());
        for (a, b) in self.edges() {
            if let (Some(x), Some(y)) = (old_to_new[a], old_to_new[b]) {
                g.add_edge(x, y)?;
            }
        }
        Ok(InducedSubgraph {
            graph: g,
            old_to_new,
            new_to_old,
        })
    }

    /// Whether `c` separates `a` from `b`: every path from `a` to `b` meets `c`.
    pub fn separates(&self, a: &[usize], b: &[usize], c: &[usize]) -> Result<bool> {
        let mut role = vec![0u8; self.n];
        for (set, tag) in [(a, 1u8), (b, 2), (c, 3)] {
            for &v in set {
                if v >= self.n {
                    return input(format!("unknown node id {v}"));
                }
                if role[v] != 0 && role[v] != tag {
                    return input(format!("node {v} appears in more than one of the sets"));
                }
                role[v] = tag;
            }
        }
        let mut seen = vec![false; self.n];
        let mut queue: VecDeque<usize> = a.iter().copied().collect();
        for &v in a {
            seen[v] = true;
        }
        while let Some(v) = queue.pop_front() {
            for &u in &self.adj[v] {
                if seen[u] || role[u] == 3 {
                    continue;
                }
                if role[u] == 2 {
                    return Ok(false);
                }
                seen[u] = true;
                queue.push_back(u);
            }
        }
        Ok(true)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InducedSubgraph {
    pub graph: UndirectedGraph,
    pub old_to_new: Vec<Option<usize>>,
    pub new_to_old: Vec<usize>,
}

/// Cliques in canonical order: each ascending, the list lexicographic.
#[derive(Clone, Debug, PartialEq, Eq, Default, serde::Serialize)]
pub struct CliqueSet {
    cliques: Vec<Vec<usize>>,
}

impl CliqueSet {
    pub fn from_unsorted(mut cliques: Vec<Vec<usize>>) -> Self {
        for c in &mut cliques {
            c.sort_unstable();
        }
        cliques.sort();
        cliques.dedup();
        CliqueSet { cliques }
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Vec<usize>> {
        self.cliques.iter()
    }

    pub fn as_slice(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    pub fn contains(&self, clique: &[usize]) -> bool {
        self.cliques.binary_search_by(|c| c.as_slice().cmp(clique)).is_ok()
    }

    pub fn position(&self, clique: &[usize]) -> Option<usize> {
        self.cliques.binary_search_by(|c| c.as_slice().cmp(clique)).ok()
    }
}

impl<'a> IntoIterator for &'a CliqueSet {
    type Item = &'a Vec<usize>;
    type IntoIter = std::slice::Iter<'a, Vec<usize>>;
    fn into_iter(self) -> Self::IntoIter {
        self.cliques.iter()
    }
}

/// `a ⊆ b` for ascending slices.
pub fn is_subset(a: &[usize], b: &[usize]) -> bool {
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
        j += 1;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_based(n: usize, edges: &[(usize, usize)]) -> UndirectedGraph {
        let e: Vec<_> = edges.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
        UndirectedGraph::from_edges(n, &e).unwrap()
    }

    fn to_one_based(cs: &CliqueSet) -> Vec<Vec<usize>> {
        cs.iter().map(|c| c.iter().map(|v| v + 1).collect()).collect()
    }

    fn ten_node_graph() -> UndirectedGraph {
        one_based(
            10,
            &[
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
            ],
        )
    }

    #[test]
    fn medical_graph_cliques() {
        let g = one_based(4, &[(1, 2), (2, 3), (2, 4), (3, 4)]);
        assert_eq!(to_one_based(&g.maximal_cliques()), vec![vec![1, 2], vec![2, 3, 4]]);
    }

    #[test]
    fn triangle_is_one_clique() {
        let g = UndirectedGraph::complete(3);
        assert_eq!(g.maximal_cliques().as_slice(), &[vec![0, 1, 2]]);
    }

    #[test]
    fn ten_node_graph_cliques() {
        let cs = ten_node_graph().maximal_cliques();
        assert_eq!(
            to_one_based(&cs),
            vec![
                vec![1, 2],
                vec![2, 3],
                vec![3, 4, 6],
                vec![3, 6, 7],
                vec![4, 5, 6],
                vec![5, 8],
                vec![8, 9, 10]
            ]
        );
    }

    #[test]
    fn isolated_nodes_are_singletons_and_empty_graph_is_empty() {
        let g = UndirectedGraph::from_edges(3, &[(0, 1)]).unwrap();
        assert_eq!(g.maximal_cliques().as_slice(), &[vec![0, 1], vec![2]]);
        assert!(UndirectedGraph::new(0).maximal_cliques().is_empty());
    }

    #[test]
    fn induced_subgraph_removing_4_and_9() {
        let g = ten_node_graph();
        let keep: Vec<usize> = (0..10).filter(|&v| v != 3 && v != 8).collect();
        let sub = g.induced_subgraph(&keep).unwrap();
        assert_eq!(sub.graph.node_count(), 8);
        // Edges of the original that avoid nodes 4 and 9.
        let expected: Vec<(usize, usize)> = g
            .edges()
            .into_iter()
            .filter(|&(a, b)| a != 3 && a != 8 && b != 3 && b != 8)
            .map(|(a, b)| (sub.old_to_new[a].unwrap(), sub.old_to_new[b].unwrap()))
            .collect();
        assert_eq!(sub.graph.edges(), expected);
        assert_eq!(sub.old_to_new[3], None);
        assert_eq!(sub.new_to_old[3], 4);
    }

    #[test]
    fn induced_identity_and_triangle_edge() {
        let g = ten_node_graph();
        let all: Vec<usize> = (0..10).collect();
        let sub = g.induced_subgraph(&all).unwrap();
        assert_eq!(sub.graph, g);
        assert_eq!(sub.new_to_old, all);
        let t = UndirectedGraph::complete(3).induced_subgraph(&[0, 1]).unwrap();
        assert_eq!(t.graph.edges(), vec![(0, 1)]);
        assert!(g.induced_subgraph(&[10]).is_err());
    }

    #[test]
    fn separation_queries() {
        let path = UndirectedGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(path.separates(&[0], &[2], &[1]).unwrap());
        assert!(!path.separates(&[0], &[2], &[]).unwrap());
        let med = one_based(4, &[(1, 2), (2, 3), (2, 4), (3, 4)]);
        assert!(med.separates(&[0], &[3], &[1, 2]).unwrap());
        assert!(path.separates(&[0], &[1], &[1]).is_err());
    }

    #[test]
    fn bad_edges_rejected() {
        let mut g = UndirectedGraph::new(2);
        assert!(g.add_edge(0, 0).is_err());
        assert!(g.add_edge(0, 2).is_err());
        g.add_edge(1, 0).unwrap();
        g.add_edge(0, 1).unwrap();
        assert_eq!(g.edge_count(), 1);
    }
}
