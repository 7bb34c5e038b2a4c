//! Undirected graph storage, adjacency normalizations, 2-core extraction and
//! edge / node splitting.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::sparse::CsrMatrix;

/// An undirected edge stored canonically as `(min, max)`.
pub type Edge = (usize, usize);

#[inline]
pub fn canonical(u: usize, v: usize) -> Edge {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Undirected, unweighted graph in symmetric CSR form.
///
/// Both orientations of every edge are stored, columns are sorted within a
/// row, and the structure never contains self-loops or duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    num_nodes: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseGraph {
    /// Build a graph from an arbitrary list of node pairs. Orientation is
    /// ignored, duplicates are merged and self-loops dropped.
    pub fn from_edges(edges: &[Edge], num_nodes: usize) -> Result<Self> {
        let mut canon: Vec<Edge> = Vec::with_capacity(edges.len());
        for &(u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::input(format!(
                    "edge ({u}, {v}) references a node outside 0..{num_nodes}"
                )));
            }
            if u != v {
                canon.push(canonical(u, v));
            }
        }
        canon.sort_unstable();
        canon.dedup();

        let mut degree = vec![0usize; num_nodes];
        for &(u, v) in &canon {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut row_offsets = vec![0usize; num_nodes + 1];
        for i in 0..num_nodes {
            row_offsets[i + 1] = row_offsets[i] + degree[i];
        }
        let mut fill = row_offsets.clone();
        let mut col_indices = vec![0usize; row_offsets[num_nodes]];
        for &(u, v) in &canon {
            col_indices[fill[u]] = v;
            fill[u] += 1;
            col_indices[fill[v]] = u;
            fill[v] += 1;
        }
        for i in 0..num_nodes {
            col_indices[row_offsets[i]..row_offsets[i + 1]].sort_unstable();
        }
        let values = vec![1.0; col_indices.len()];
        Ok(Self {
            num_nodes,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.col_indices.len() / 2
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row_offsets[i + 1] - self.row_offsets[i]
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.num_nodes).map(|i| self.degree(i)).collect()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.col_indices[self.row_offsets[i]..self.row_offsets[i + 1]]
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_nodes && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Canonical edge list, sorted.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out = Vec::with_capacity(self.num_edges());
        for u in 0..self.num_nodes {
            for &v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn edge_set(&self) -> HashSet<Edge> {
        self.edges().into_iter().collect()
    }

    /// The adjacency matrix `A`.
    pub fn adjacency(&self) -> CsrMatrix {
        CsrMatrix {
            rows: self.num_nodes,
            cols: self.num_nodes,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values: self.values.clone(),
        }
    }

    /// `D⁻¹A`. Rows of isolated nodes stay empty.
    pub fn row_normalize(&self) -> CsrMatrix {
        let mut a = self.adjacency();
        for i in 0..self.num_nodes {
            let deg = self.degree(i);
            if deg == 0 {
                continue;
            }
            let inv = 1.0 / deg as f64;
            for v in &mut a.values[a.row_offsets[i]..a.row_offsets[i + 1]] {
                *v *= inv;
            }
        }
        a
    }

    /// `(D+I)^{-1/2} (A+I) (D+I)^{-1/2}`.
    pub fn sym_normalize_selfloop(&self) -> CsrMatrix {
        let scale: Vec<f64> = (0..self.num_nodes)
            .map(|i| 1.0 / ((self.degree(i) + 1) as f64).sqrt())
            .collect();
        let mut row_offsets = vec![0usize; self.num_nodes + 1];
        let mut col_indices = Vec::with_capacity(self.col_indices.len() + self.num_nodes);
        let mut values = Vec::with_capacity(self.col_indices.len() + self.num_nodes);
        for i in 0..self.num_nodes {
            let mut diagonal_done = false;
            for &j in self.neighbors(i) {
                if !diagonal_done && j > i {
                    col_indices.push(i);
                    values.push(scale[i] * scale[i]);
                    diagonal_done = true;
                }
                col_indices.push(j);
                values.push(scale[i] * scale[j]);
            }
            if !diagonal_done {
                col_indices.push(i);
                values.push(scale[i] * scale[i]);
            }
            row_offsets[i + 1] = col_indices.len();
        }
        CsrMatrix {
            rows: self.num_nodes,
            cols: self.num_nodes,
            row_offsets,
            col_indices,
            values,
        }
    }
}

/// Edges of the 2-core: repeatedly strip nodes of degree below two until
/// every remaining node has degree at least two. Input orientation and
/// duplicates are ignored; output is canonical and sorted.
pub fn two_core(edges: &[Edge]) -> Vec<Edge> {
    let mut canon: Vec<Edge> = edges
        .iter()
        .filter(|(u, v)| u != v)
        .map(|&(u, v)| canonical(u, v))
        .collect();
    canon.sort_unstable();
    canon.dedup();
    let n = canon.iter().map(|&(_, v)| v + 1).max().unwrap_or(0);
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(u, v) in &canon {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut removed = vec![false; n];
    let mut stack: Vec<usize> = (0..n).filter(|&i| degree[i] < 2).collect();
    while let Some(i) = stack.pop() {
        if removed[i] {
            continue;
        }
        removed[i] = true;
        for &j in &adj[i] {
            if !removed[j] {
                degree[j] -= 1;
                if degree[j] < 2 {
                    stack.push(j);
                }
            }
        }
    }
    canon
        .into_iter()
        .filter(|&(u, v)| !removed[u] && !removed[v])
        .collect()
}

/// Draw up to `count` distinct canonical non-edges uniformly from the
/// `num_nodes` node pairs not in `forbidden`. Fewer are returned only when the
/// non-edge pool is exhausted.
pub fn sample_negatives(
    num_nodes: usize,
    forbidden: &HashSet<Edge>,
    count: usize,
    rng: &mut Rng,
) -> Vec<Edge> {
    if num_nodes < 2 || count == 0 {
        return Vec::new();
    }
    let total_pairs = num_nodes * (num_nodes - 1) / 2;
    let available = total_pairs.saturating_sub(forbidden.len());
    if count * 2 >= available {
        // Dense regime: enumerate the pool instead of rejecting.
        let mut pool: Vec<Edge> = Vec::with_capacity(available);
        for u in 0..num_nodes {
            for v in (u + 1)..num_nodes {
                if !forbidden.contains(&(u, v)) {
                    pool.push((u, v));
                }
            }
        }
        pool.shuffle(rng);
        pool.truncate(count);
        return pool;
    }
    let mut chosen: HashSet<Edge> = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let u = rng.random_range(0..num_nodes);
        let v = rng.random_range(0..num_nodes);
        if u == v {
            continue;
        }
        let e = canonical(u, v);
        if forbidden.contains(&e) || !chosen.insert(e) {
            continue;
        }
        out.push(e);
    }
    out
}

/// Train / validation / test partition of the edges plus sampled negatives
/// for evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSplit {
    pub train_pos: Vec<Edge>,
    pub valid_pos: Vec<Edge>,
    pub test_pos: Vec<Edge>,
    pub valid_neg: Vec<Edge>,
    pub test_neg: Vec<Edge>,
    pub seed: u64,
}

/// Shuffle the edges of `g` into train / validation / test sets with the given
/// ratios and sample as many negatives as positives for validation and test.
pub fn split_edges(g: &SparseGraph, ratios: (f64, f64, f64), seed: u64) -> Result<EdgeSplit> {
    let (train, valid, test) = ratios;
    if [train, valid, test].iter().any(|r| !(0.0..=1.0).contains(r))
        || ((train + valid + test) - 1.0).abs() > 1e-9
    {
        return Err(Error::input(format!(
            "split ratios must be in [0, 1] and sum to 1, got {ratios:?}"
        )));
    }
    let mut edges = g.edges();
    let mut rng = rng::stream(seed, "split");
    edges.shuffle(&mut rng);
    let m = edges.len();
    let n_valid = (valid * m as f64).round() as usize;
    let n_test = ((test * m as f64).round() as usize).min(m - n_valid);
    let n_train = m - n_valid - n_test;
    let test_pos = edges.split_off(n_train + n_valid);
    let valid_pos = edges.split_off(n_train);
    let train_pos = edges;

    let forbidden = g.edge_set();
    let wanted = valid_pos.len() + test_pos.len();
    let mut negatives = sample_negatives(g.num_nodes(), &forbidden, wanted, &mut rng);
    if negatives.len() < wanted {
        return Err(Error::Resource(format!(
            "graph too dense: requested {wanted} negative edges, only {} non-edges exist",
            negatives.len()
        )));
    }
    let test_neg = negatives.split_off(valid_pos.len());
    let valid_neg = negatives;
    Ok(EdgeSplit {
        train_pos,
        valid_pos,
        test_pos,
        valid_neg,
        test_neg,
        seed,
    })
}

/// Node partition for node classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSplit {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

pub fn split_nodes(num_nodes: usize, ratios: (f64, f64, f64), seed: u64) -> Result<NodeSplit> {
    let (train, valid, test) = ratios;
    if [train, valid, test].iter().any(|r| !(0.0..=1.0).contains(r))
        || ((train + valid + test) - 1.0).abs() > 1e-9
    {
        return Err(Error::input(format!(
            "split ratios must be in [0, 1] and sum to 1, got {ratios:?}"
        )));
    }
    let mut nodes: Vec<usize> = (0..num_nodes).collect();
    let mut rng = rng::stream(seed, "node-split");
    nodes.shuffle(&mut rng);
    let n_train = (train * num_nodes as f64).round() as usize;
    let n_valid = ((valid * num_nodes as f64).round() as usize).min(num_nodes - n_train);
    let test = nodes.split_off(n_train + n_valid);
    let valid = nodes.split_off(n_train);
    Ok(NodeSplit {
        train: nodes,
        valid,
        test,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triangle() -> SparseGraph {
        SparseGraph::from_edges(&[(0, 1), (1, 2), (0, 2)], 3).unwrap()
    }

    #[test]
    fn build_drops_duplicates_and_self_loops() {
        let g = SparseGraph::from_edges(&[(0, 1), (1, 0), (1, 1)], 2).unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.edges(), vec![(0, 1)]);
        assert!(!g.has_edge(1, 1));
    }

    #[test]
    fn degrees_of_small_graphs() {
        assert_eq!(triangle().degrees(), vec![2, 2, 2]);
        let path = SparseGraph::from_edges(&[(0, 1), (1, 2)], 3).unwrap();
        assert_eq!(path.degrees(), vec![1, 2, 1]);
    }

    #[test]
    fn out_of_range_node_is_rejected() {
        let err = SparseGraph::from_edges(&[(0, 3)], 3).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn row_normalization_examples() {
        let path = SparseGraph::from_edges(&[(0, 1), (1, 2)], 3).unwrap();
        let a = path.row_normalize().to_dense();
        assert_eq!(a.row(1).iter().copied().collect::<Vec<_>>(), vec![0.5, 0.0, 0.5]);

        let edge = SparseGraph::from_edges(&[(0, 1)], 2).unwrap();
        let a = edge.row_normalize().to_dense();
        assert_eq!(a, nalgebra::DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));

        let a = triangle().row_normalize().to_dense();
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 0.0 } else { 0.5 };
                assert_eq!(a[(i, j)], expect);
            }
        }

        let isolated = SparseGraph::from_edges(&[(0, 1)], 3).unwrap();
        assert_eq!(isolated.row_normalize().row_sum(2), 0.0);
    }

    #[test]
    fn sym_normalization_examples() {
        let edge = SparseGraph::from_edges(&[(0, 1)], 2).unwrap();
        let a = edge.sym_normalize_selfloop().to_dense();
        for v in a.iter() {
            assert!((v - 0.5).abs() < 1e-15);
        }
        let lonely = SparseGraph::from_edges(&[], 1).unwrap();
        assert_eq!(lonely.sym_normalize_selfloop().to_dense()[(0, 0)], 1.0);
        let a = triangle().sym_normalize_selfloop().to_dense();
        for v in a.iter() {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn two_core_examples() {
        let tri = vec![(0, 1), (0, 2), (1, 2)];
        assert_eq!(two_core(&[(1, 0), (1, 2), (0, 2)]), tri);
        let star = vec![(0, 1), (0, 2), (0, 3), (0, 4)];
        assert!(two_core(&star).is_empty());
        let tri_pendant = vec![(0, 1), (1, 2), (0, 2), (2, 3)];
        assert_eq!(two_core(&tri_pendant), tri);
    }

    #[test]
    fn split_examples() {
        let s = split_edges(&triangle(), (1.0, 0.0, 0.0), 1).unwrap();
        assert_eq!(s.train_pos.len(), 3);
        assert!(s.valid_neg.is_empty() && s.test_neg.is_empty());

        // Ten edges on a 12-node cycle-ish graph.
        let edges: Vec<Edge> = (0..10).map(|i| (i, i + 1)).collect();
        let g = SparseGraph::from_edges(&edges, 12).unwrap();
        let s = split_edges(&g, (0.7, 0.1, 0.2), 42).unwrap();
        assert_eq!(
            (s.train_pos.len(), s.valid_pos.len(), s.test_pos.len()),
            (7, 1, 2)
        );
        assert_eq!(s.valid_neg.len(), 1);
        assert_eq!(s.test_neg.len(), 2);
        assert_eq!(s, split_edges(&g, (0.7, 0.1, 0.2), 42).unwrap());
    }

    #[test]
    fn split_of_complete_graph_fails_for_lack_of_negatives() {
        let edges: Vec<Edge> = (0..4)
            .flat_map(|u| ((u + 1)..4).map(move |v| (u, v)))
            .collect();
        let g = SparseGraph::from_edges(&edges, 4).unwrap();
        let err = split_edges(&g, (0.5, 0.25, 0.25), 3).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    #[test]
    fn bad_ratios_are_rejected() {
        assert!(split_edges(&triangle(), (0.5, 0.2, 0.2), 0).is_err());
        assert!(split_nodes(10, (0.5, 0.6, -0.1), 0).is_err());
    }

    #[test]
    fn node_split_sizes() {
        let s = split_nodes(4000, (0.025, 0.025, 0.95), 9).unwrap();
        assert_eq!((s.train.len(), s.valid.len(), s.test.len()), (100, 100, 3800));
        let mut all: Vec<usize> = s.train.iter().chain(&s.valid).chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..4000).collect::<Vec<_>>());
    }

    fn arb_edges() -> impl Strategy<Value = (usize, Vec<Edge>)> {
        (2usize..30).prop_flat_map(|n| {
            (
                Just(n),
                proptest::collection::vec((0..n, 0..n), 0..80),
            )
        })
    }

    proptest! {
        #[test]
        fn graph_is_symmetric_and_sorted((n, edges) in arb_edges()) {
            let g = SparseGraph::from_edges(&edges, n).unwrap();
            for u in 0..n {
                let nb = g.neighbors(u);
                prop_assert!(nb.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(!nb.contains(&u));
                for &v in nb {
                    prop_assert!(g.has_edge(v, u));
                }
            }
        }

        #[test]
        fn normalizations_hold((n, edges) in arb_edges()) {
            let g = SparseGraph::from_edges(&edges, n).unwrap();
            let a = g.row_normalize();
            for i in 0..n {
                let s = a.row_sum(i);
                if g.degree(i) > 0 {
                    prop_assert!((s - 1.0).abs() <= 1e-12);
                } else {
                    prop_assert_eq!(s, 0.0);
                }
            }
            let sym = g.sym_normalize_selfloop().to_dense();
            prop_assert_eq!(sym.transpose(), sym);
        }

        #[test]
        fn two_core_is_idempotent_with_min_degree_two((_n, edges) in arb_edges()) {
            let core = two_core(&edges);
            prop_assert_eq!(two_core(&core), core.clone());
            let mut deg = std::collections::HashMap::new();
            for &(u, v) in &core {
                *deg.entry(u).or_insert(0) += 1;
                *deg.entry(v).or_insert(0) += 1;
            }
            prop_assert!(deg.values().all(|&d| d >= 2));
        }

        #[test]
        fn split_partitions_edges((n, edges) in arb_edges(), seed in 0u64..1000) {
            let g = SparseGraph::from_edges(&edges, n).unwrap();
            let all = g.edge_set();
            if let Ok(s) = split_edges(&g, (0.7, 0.1, 0.2), seed) {
                let mut union: Vec<Edge> = s.train_pos.iter()
                    .chain(&s.valid_pos).chain(&s.test_pos).copied().collect();
                union.sort_unstable();
                prop_assert_eq!(union, g.edges());
                let negs: Vec<Edge> = s.valid_neg.iter().chain(&s.test_neg).copied().collect();
                let uniq: HashSet<Edge> = negs.iter().copied().collect();
                prop_assert_eq!(uniq.len(), negs.len());
                prop_assert!(negs.iter().all(|e| !all.contains(e) && e.0 < e.1));
            }
        }
    }
}
