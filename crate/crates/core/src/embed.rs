//! The five derived node-embedding components.
//!
//! | component | source                         | construction                          |
//! |-----------|--------------------------------|---------------------------------------|
//! | `U`       | structure                      | left singular vectors of `A`          |
//! | `R`       | neighborhood                   | left singular vectors of walk counts  |
//! | `F`       | features                       | `pca(X)`                              |
//! | `P`       | 2-step neighbors' features     | `pca(l(A_row^k X))`, `k` even         |
//! | `S`       | features propagated with loops | `pca(l(Ã_sym^k X))`                   |
//!
//! `l` is column-wise L2 normalization. All five blocks have `dim` columns.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::SparseGraph;
use crate::linalg::{self, l2_normalize_columns};
use crate::rng;
use crate::sparse::CsrMatrix;

/// Identifies one embedding component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Component {
    U,
    R,
    F,
    P,
    S,
}

impl Component {
    pub const ALL: [Component; 5] = [
        Component::U,
        Component::R,
        Component::F,
        Component::P,
        Component::S,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Component::U => "U",
            Component::R => "R",
            Component::F => "F",
            Component::P => "P",
            Component::S => "S",
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Component {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "U" => Ok(Component::U),
            "R" => Ok(Component::R),
            "F" => Ok(Component::F),
            "P" => Ok(Component::P),
            "S" => Ok(Component::S),
            other => Err(Error::input(format!("unknown component {other:?}"))),
        }
    }
}

/// What a random walk contributes to the visit counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountMode {
    /// Every node reached at steps `1..=k`.
    AllSteps,
    /// Only the node reached at step `k`.
    Endpoint,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbedConfig {
    pub dim: usize,
    /// Random-walk trials per start node (`T`).
    pub walk_trials: usize,
    /// Steps per walk (`k_PPR`).
    pub walk_steps: usize,
    /// Propagation depth without self-loops; must be even.
    pub k_row: usize,
    /// Propagation depth with self-loops.
    pub k_sym: usize,
    pub count_mode: CountMode,
    /// Count the start node at step 0.
    pub count_start: bool,
    pub seed: u64,
}

impl Default for EmbedConfig {
    fn default() -> Self {
        Self {
            dim: 128,
            walk_trials: 1000,
            walk_steps: 2,
            k_row: 2,
            k_sym: 2,
            count_mode: CountMode::AllSteps,
            count_start: false,
            seed: 0,
        }
    }
}

/// Sparse visit counts of repeated short random walks.
#[derive(Debug, Clone)]
pub struct WalkCountMatrix {
    pub counts: CsrMatrix,
    pub trials: usize,
    pub steps: usize,
}

/// For every start node, run `trials` walks of `steps` uniform-neighbor moves
/// and count visits. Entries visited exactly once are dropped.
pub fn random_walk_counts(
    g: &SparseGraph,
    trials: usize,
    steps: usize,
    mode: CountMode,
    count_start: bool,
    seed: u64,
) -> Result<WalkCountMatrix> {
    if trials == 0 || steps == 0 {
        return Err(Error::input("random walks need at least one trial and one step"));
    }
    let n = g.num_nodes();
    let mut rng = rng::stream(seed, "walks");
    let mut scratch = vec![0u32; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut row_offsets = Vec::with_capacity(n + 1);
    row_offsets.push(0);
    let mut col_indices = Vec::new();
    let mut values = Vec::new();

    for start in 0..n {
        if g.degree(start) > 0 {
            let visit = |node: usize, scratch: &mut Vec<u32>, touched: &mut Vec<usize>| {
                if scratch[node] == 0 {
                    touched.push(node);
                }
                scratch[node] += 1;
            };
            for _ in 0..trials {
                if count_start {
                    visit(start, &mut scratch, &mut touched);
                }
                let mut cur = start;
                for step in 1..=steps {
                    let nb = g.neighbors(cur);
                    cur = nb[rng.random_range(0..nb.len())];
                    if mode == CountMode::AllSteps || step == steps {
                        visit(cur, &mut scratch, &mut touched);
                    }
                }
            }
        }
        touched.sort_unstable();
        for &node in &touched {
            if scratch[node] >= 2 {
                col_indices.push(node);
                values.push(scratch[node] as f64);
            }
            scratch[node] = 0;
        }
        touched.clear();
        row_offsets.push(col_indices.len());
    }
    Ok(WalkCountMatrix {
        counts: CsrMatrix {
            rows: n,
            cols: n,
            row_offsets,
            col_indices,
            values,
        },
        trials,
        steps,
    })
}

/// `U`: leading left singular vectors of the adjacency matrix.
pub fn structure_embedding(g: &SparseGraph, d: usize, seed: u64) -> (DMatrix<f64>, bool) {
    let svd = linalg::truncated_svd(&g.adjacency(), d, rng::derive_seed(seed, "svd-U"));
    (svd.left, svd.padded)
}

/// `R`: leading left singular vectors of the pruned walk-count matrix.
pub fn neighborhood_embedding(walks: &WalkCountMatrix, d: usize, seed: u64) -> (DMatrix<f64>, bool) {
    let svd = linalg::truncated_svd(&walks.counts, d, rng::derive_seed(seed, "svd-R"));
    (svd.left, svd.padded)
}

/// `F = pca(X)`.
pub fn feature_embedding(x: &DMatrix<f64>, d: usize, seed: u64) -> (DMatrix<f64>, bool) {
    let p = linalg::pca(x, d, rng::derive_seed(seed, "pca-F"));
    (p.scores, p.padded)
}

/// `A_row^k X` by repeated sparse products.
pub fn propagate_row(g: &SparseGraph, x: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let a = g.row_normalize();
    (0..k).fold(x.clone(), |acc, _| a.mul_dense(&acc))
}

/// `Ã_sym^k X` by repeated sparse products.
pub fn propagate_sym(g: &SparseGraph, x: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let a = g.sym_normalize_selfloop();
    (0..k).fold(x.clone(), |acc, _| a.mul_dense(&acc))
}

/// `P = pca(l(A_row^k X))`.
pub fn propagate_no_selfloop(
    g: &SparseGraph,
    x: &DMatrix<f64>,
    d: usize,
    k_row: usize,
    seed: u64,
) -> Result<(DMatrix<f64>, bool)> {
    if k_row % 2 != 0 {
        return Err(Error::input(format!("k_row must be even, got {k_row}")));
    }
    let propagated = l2_normalize_columns(&propagate_row(g, x, k_row));
    let p = linalg::pca(&propagated, d, rng::derive_seed(seed, "pca-P"));
    Ok((p.scores, p.padded))
}

/// `S = pca(l(Ã_sym^k X))`.
pub fn propagate_selfloop(
    g: &SparseGraph,
    x: &DMatrix<f64>,
    d: usize,
    k_sym: usize,
    seed: u64,
) -> (DMatrix<f64>, bool) {
    let propagated = l2_normalize_columns(&propagate_sym(g, x, k_sym));
    let p = linalg::pca(&propagated, d, rng::derive_seed(seed, "pca-S"));
    (p.scores, p.padded)
}

/// Parameters an embedding set was computed with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub dim: usize,
    pub walk_trials: usize,
    pub walk_steps: usize,
    pub k_row: usize,
    pub k_sym: usize,
    pub count_mode: CountMode,
    pub count_start: bool,
    pub seed: u64,
    /// Components whose blocks were zero-padded past their rank.
    pub padded: Vec<Component>,
}

/// The five `|V| × dim` embedding blocks.
#[derive(Debug, Clone)]
pub struct EmbeddingSet {
    pub dim: usize,
    blocks: Vec<DMatrix<f64>>,
    pub provenance: Provenance,
}

impl EmbeddingSet {
    pub fn from_blocks(blocks: Vec<DMatrix<f64>>, provenance: Provenance) -> Result<Self> {
        if blocks.len() != Component::ALL.len() {
            return Err(Error::input(format!("expected 5 blocks, got {}", blocks.len())));
        }
        let rows = blocks[0].nrows();
        for b in &blocks {
            if b.nrows() != rows || b.ncols() != provenance.dim {
                return Err(Error::input(format!(
                    "embedding block is {}x{}, expected {rows}x{}",
                    b.nrows(),
                    b.ncols(),
                    provenance.dim
                )));
            }
        }
        Ok(Self {
            dim: provenance.dim,
            blocks,
            provenance,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.blocks[0].nrows()
    }

    pub fn get(&self, c: Component) -> &DMatrix<f64> {
        &self.blocks[c.index()]
    }

    /// Column-standardized, row-normalized copy of component `c`.
    pub fn preprocessed(&self, c: Component) -> DMatrix<f64> {
        linalg::preprocess_hat(self.get(c))
    }
}

/// Compute all five components of `g` with node features `x`.
pub fn compute_embeddings(g: &SparseGraph, x: &DMatrix<f64>, cfg: &EmbedConfig) -> Result<EmbeddingSet> {
    if x.nrows() != g.num_nodes() {
        return Err(Error::input(format!(
            "feature matrix has {} rows but the graph has {} nodes",
            x.nrows(),
            g.num_nodes()
        )));
    }
    if cfg.dim == 0 {
        return Err(Error::input("embedding dimension must be at least 1"));
    }
    let d = cfg.dim;
    let mut padded = Vec::new();
    let mut note = |c: Component, p: bool| {
        if p {
            padded.push(c);
        }
    };

    let (u, p) = structure_embedding(g, d, cfg.seed);
    note(Component::U, p);
    let walks = random_walk_counts(
        g,
        cfg.walk_trials,
        cfg.walk_steps,
        cfg.count_mode,
        cfg.count_start,
        cfg.seed,
    )?;
    let (r, p) = neighborhood_embedding(&walks, d, cfg.seed);
    note(Component::R, p);
    let (f, p) = feature_embedding(x, d, cfg.seed);
    note(Component::F, p);
    let (pp, p) = propagate_no_selfloop(g, x, d, cfg.k_row, cfg.seed)?;
    note(Component::P, p);
    let (s, p) = propagate_selfloop(g, x, d, cfg.k_sym, cfg.seed);
    note(Component::S, p);

    let provenance = Provenance {
        dim: d,
        walk_trials: cfg.walk_trials,
        walk_steps: cfg.walk_steps,
        k_row: cfg.k_row,
        k_sym: cfg.k_sym,
        count_mode: cfg.count_mode,
        count_start: cfg.count_start,
        seed: cfg.seed,
        padded,
    };
    EmbeddingSet::from_blocks(vec![u, r, f, pp, s], provenance)
}
