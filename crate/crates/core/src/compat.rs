//! Compatibility matrices.
//!
//! The adjusted similarity of two nodes is `ẑ_i H ẑ_jᵀ`. `H` is the
//! closed-form multi-target ridge regression from `ẑ_i` to `ẑ_j` over edges;
//! `H*` additionally pushes the similarity of sampled non-edges toward zero
//! and is fitted by LSQR over the upper triangle of a symmetric matrix,
//! warm-started from `H` and restricted to the coefficients carrying most of
//! `H`'s off-diagonal mass.

use std::collections::{HashMap, HashSet};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, Edge};
use crate::linalg;
use crate::lsqr::{self, LsqrOptions};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CompatKind {
    /// Regression of one endpoint onto the other.
    PlainH,
    /// Regression of the adjusted similarity onto edge (1) / non-edge (0).
    NegativeAwareHStar,
}

/// Upper-triangle (diagonal included) activity pattern of a symmetric
/// `dim × dim` coefficient matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientMask {
    pub dim: usize,
    upper: Vec<bool>,
}

impl CoefficientMask {
    pub fn full(dim: usize) -> Self {
        Self {
            dim,
            upper: vec![true; dim * dim],
        }
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            dim,
            upper: vec![false; dim * dim],
        }
    }

    fn slot(&self, a: usize, b: usize) -> usize {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        lo * self.dim + hi
    }

    /// Symmetric lookup.
    pub fn is_active(&self, a: usize, b: usize) -> bool {
        self.upper[self.slot(a, b)]
    }

    pub fn set(&mut self, a: usize, b: usize, active: bool) {
        let s = self.slot(a, b);
        self.upper[s] = active;
    }

    /// Active `(a, b)` pairs with `a <= b`, row-major.
    pub fn active_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.dim {
            for b in a..self.dim {
                if self.upper[a * self.dim + b] {
                    out.push((a, b));
                }
            }
        }
        out
    }

    pub fn count(&self) -> usize {
        self.active_pairs().len()
    }

    /// Active fraction of the `d(d+1)/2` upper-triangle slots.
    pub fn density(&self) -> f64 {
        let total = self.dim * (self.dim + 1) / 2;
        if total == 0 {
            0.0
        } else {
            self.count() as f64 / total as f64
        }
    }
}

/// A `dim × dim` compatibility matrix with its coefficient mask.
#[derive(Debug, Clone)]
pub struct CompatMatrix {
    pub dim: usize,
    pub values: DMatrix<f64>,
    pub mask: CoefficientMask,
    pub kind: CompatKind,
    /// Fraction of `H`'s strict-upper absolute mass retained by the mask.
    pub energy_kept: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl CompatMatrix {
    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            values: DMatrix::identity(dim, dim),
            mask: CoefficientMask::full(dim),
            kind: CompatKind::PlainH,
            energy_kept: 1.0,
            converged: true,
            iterations: 0,
        }
    }
}

/// `z_i H z_jᵀ`.
pub fn adjusted_similarity(z_i: &[f64], z_j: &[f64], h: &CompatMatrix) -> f64 {
    let d = h.dim;
    assert!(z_i.len() == d && z_j.len() == d, "embedding width differs from H");
    let mut total = 0.0;
    for (a, &za) in z_i.iter().enumerate() {
        if za == 0.0 {
            continue;
        }
        let row: f64 = (0..d).map(|b| h.values[(a, b)] * z_j[b]).sum();
        total += za * row;
    }
    total
}

/// Adjusted similarity of many edges at once.
pub fn similarities(z_hat: &DMatrix<f64>, h: &CompatMatrix, edges: &[Edge]) -> Vec<f64> {
    let zt = z_hat.transpose();
    let yt = h.values.transpose() * &zt; // column i is Hᵀ z_i
    edges
        .iter()
        .map(|&(i, j)| yt.column(i).dot(&zt.column(j)))
        .collect()
}

/// Closed-form ridge estimate of `H` minimizing `Σ ‖z_i H − z_j‖²` over both
/// orientations of every edge.
pub fn estimate_h(z_hat: &DMatrix<f64>, edges: &[Edge], ridge: f64) -> Result<CompatMatrix> {
    if edges.is_empty() {
        return Err(Error::input("estimating H needs at least one edge"));
    }
    let (n, d) = z_hat.shape();
    // Zsrcᵀ Zsrc = Zᵀ diag(multiplicity) Z and Zsrcᵀ Zdst = Zᵀ W Z, with W
    // the symmetric edge-count matrix.
    let mut multiplicity = vec![0.0; n];
    let mut neighbor_sum = DMatrix::zeros(d, n); // column i: Σ_{j~i} z_j
    let zt = z_hat.transpose();
    for &(i, j) in edges {
        if i >= n || j >= n {
            return Err(Error::input(format!("edge ({i}, {j}) outside embedding rows")));
        }
        multiplicity[i] += 1.0;
        multiplicity[j] += 1.0;
        let zj = zt.column(j).into_owned();
        let zi = zt.column(i).into_owned();
        let mut ci = neighbor_sum.column_mut(i);
        ci += &zj;
        let mut cj = neighbor_sum.column_mut(j);
        cj += &zi;
    }
    let mut weighted = zt.clone();
    for (i, mut col) in weighted.column_iter_mut().enumerate() {
        col *= multiplicity[i];
    }
    let mut gram = &weighted * z_hat;
    for k in 0..d {
        gram[(k, k)] += ridge;
    }
    let cross = &neighbor_sum * z_hat; // Σ_e z_j z_iᵀ + z_i z_jᵀ, symmetric
    let h = linalg::solve_spd(&gram, &cross.transpose())
        .ok_or_else(|| Error::Numerical("normal equations for H are singular".into()))?;
    Ok(CompatMatrix {
        dim: d,
        values: h,
        mask: CoefficientMask::full(d),
        kind: CompatKind::PlainH,
        energy_kept: 1.0,
        converged: true,
        iterations: 0,
    })
}

/// Mask keeping every diagonal coefficient plus the largest strict-upper
/// entries of `h` (by absolute value) until their absolute sum reaches
/// `energy` times the strict-upper total. Returns the mask and the fraction of
/// the strict-upper mass it keeps.
pub fn select_coefficients(h: &CompatMatrix, energy: f64) -> Result<(CoefficientMask, f64)> {
    if !(energy > 0.0 && energy <= 1.0) {
        return Err(Error::input(format!("energy must be in (0, 1], got {energy}")));
    }
    let d = h.dim;
    let mut mask = CoefficientMask::empty(d);
    for a in 0..d {
        mask.set(a, a, true);
    }
    let mut entries: Vec<(f64, usize, usize)> = Vec::with_capacity(d * d.saturating_sub(1) / 2);
    for a in 0..d {
        for b in (a + 1)..d {
            entries.push((h.values[(a, b)].abs(), a, b));
        }
    }
    let total: f64 = entries.iter().map(|e| e.0).sum();
    if total == 0.0 {
        return Ok((mask, 1.0));
    }
    entries.sort_by(|x, y| y.0.total_cmp(&x.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let target = energy * total;
    let mut kept = 0.0;
    for (v, a, b) in entries {
        if kept >= target {
            break;
        }
        mask.set(a, b, true);
        kept += v;
    }
    Ok((mask, kept / total))
}

/// Positive and negative edges used to fit `H*`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeSample {
    /// Positive pool `H` is estimated on: the 2-core of the training edges,
    /// or all training edges when the core is too small.
    pub pool: Vec<Edge>,
    /// At most `S` edges drawn from `pool`.
    pub pos: Vec<Edge>,
    /// Non-edges, nominally `2 |pos|`.
    pub neg: Vec<Edge>,
    pub used_two_core: bool,
    pub seed: u64,
}

/// Draw the positive and negative edges for the `H*` regression.
///
/// `min_pool` is the smallest acceptable 2-core (typically `d(d+1)/2`);
/// `forbidden` holds every known edge so negatives avoid them.
pub fn sample_edges_for_compat(
    num_nodes: usize,
    train_edges: &[Edge],
    forbidden: &HashSet<Edge>,
    sample_size: usize,
    min_pool: usize,
    seed: u64,
) -> EdgeSample {
    let core = graph::two_core(train_edges);
    let used_two_core = !core.is_empty() && core.len() >= min_pool;
    let pool = if used_two_core {
        core
    } else {
        log::debug!(
            "2-core has {} edges (< {min_pool}); using all {} training edges",
            core.len(),
            train_edges.len()
        );
        let mut all: Vec<Edge> = train_edges
            .iter()
            .map(|&(u, v)| graph::canonical(u, v))
            .filter(|(u, v)| u != v)
            .collect();
        all.sort_unstable();
        all.dedup();
        all
    };
    let mut rng = rng::stream(seed, "compat-sample");
    let pos = if pool.len() > sample_size {
        let mut shuffled = pool.clone();
        shuffled.shuffle(&mut rng);
        shuffled.truncate(sample_size);
        shuffled
    } else {
        pool.clone()
    };
    let wanted = 2 * pos.len();
    let neg = graph::sample_negatives(num_nodes, forbidden, wanted, &mut rng);
    if neg.len() < wanted {
        log::warn!(
            "only {} negative edges available for compatibility estimation ({wanted} requested)",
            neg.len()
        );
    }
    EdgeSample {
        pool,
        pos,
        neg,
        used_two_core,
        seed,
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct HStarConfig {
    pub ridge: f64,
    pub max_iter: usize,
    pub tol: f64,
    /// Weight of each negative equation relative to a positive one.
    pub negative_weight: f64,
}

impl Default for HStarConfig {
    fn default() -> Self {
        Self {
            ridge: 1e-6,
            max_iter: 100,
            tol: 1e-8,
            negative_weight: 1.0,
        }
    }
}

/// The flattened `H*` regression restricted to a node subset: one equation
/// per sampled edge, one unknown per active upper-triangle coefficient.
struct FlatSystem {
    /// `d × n_local`, column `k` is the embedding of local node `k`.
    zt: DMatrix<f64>,
    equations: Vec<(usize, usize, f64)>, // local i, local j, sqrt weight
    pairs: Vec<(usize, usize)>,
    dim: usize,
}

impl FlatSystem {
    fn new(z_hat: &DMatrix<f64>, edges: &[(Edge, f64)], pairs: Vec<(usize, usize)>) -> Self {
        let mut local: HashMap<usize, usize> = HashMap::new();
        let mut order = Vec::new();
        let mut equations = Vec::with_capacity(edges.len());
        for &((i, j), w) in edges {
            let mut id = |v: usize| {
                *local.entry(v).or_insert_with(|| {
                    order.push(v);
                    order.len() - 1
                })
            };
            let li = id(i);
            let lj = id(j);
            equations.push((li, lj, w.sqrt()));
        }
        let d = z_hat.ncols();
        let zt = DMatrix::from_fn(d, order.len(), |a, k| z_hat[(order[k], a)]);
        Self {
            zt,
            equations,
            pairs,
            dim: d,
        }
    }

    fn symmetric_from(&self, coef: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (&(a, b), &c) in self.pairs.iter().zip(coef) {
            m[(a, b)] = c;
            m[(b, a)] = c;
        }
        m
    }

    fn apply(&self, coef: &[f64]) -> Vec<f64> {
        let m = self.symmetric_from(coef);
        let yt = &m * &self.zt; // column k: M z_k
        self.equations
            .iter()
            .map(|&(li, lj, w)| w * yt.column(li).dot(&self.zt.column(lj)))
            .collect()
    }

    fn apply_transpose(&self, u: &[f64]) -> Vec<f64> {
        // G = Σ_e w u_e z_i z_jᵀ = Zᵀ T with T[:, i] = Σ_{e: i} w u_e z_j.
        let mut t = DMatrix::zeros(self.dim, self.zt.ncols());
        for (&(li, lj, w), &ue) in self.equations.iter().zip(u) {
            let coeff = w * ue;
            if coeff == 0.0 {
                continue;
            }
            let zj = self.zt.column(lj).into_owned();
            let mut col = t.column_mut(li);
            col.axpy(coeff, &zj, 1.0);
        }
        let g = &self.zt * t.transpose();
        self.pairs
            .iter()
            .map(|&(a, b)| if a == b { g[(a, a)] } else { g[(a, b)] + g[(b, a)] })
            .collect()
    }
}

/// Fit the negative-aware compatibility matrix by LSQR over the active
/// coefficients of `mask`, starting from the symmetric part of `warm`.
pub fn estimate_h_star(
    z_hat: &DMatrix<f64>,
    sample: &EdgeSample,
    warm: &CompatMatrix,
    mask: &CoefficientMask,
    cfg: &HStarConfig,
) -> Result<CompatMatrix> {
    let d = z_hat.ncols();
    if warm.dim != d || mask.dim != d {
        return Err(Error::input("warm start / mask dimension differs from embeddings"));
    }
    if sample.pos.is_empty() {
        return Err(Error::input("estimating H* needs at least one positive edge"));
    }
    let mut weighted: Vec<(Edge, f64)> = sample.pos.iter().map(|&e| (e, 1.0)).collect();
    weighted.extend(sample.neg.iter().map(|&e| (e, cfg.negative_weight)));
    let targets: Vec<f64> = weighted
        .iter()
        .enumerate()
        .map(|(k, &(_, w))| if k < sample.pos.len() { w.sqrt() } else { 0.0 })
        .collect();

    let pairs = mask.active_pairs();
    let warm_coef: Vec<f64> = pairs
        .iter()
        .map(|&(a, b)| 0.5 * (warm.values[(a, b)] + warm.values[(b, a)]))
        .collect();
    let system = FlatSystem::new(z_hat, &weighted, pairs);
    let opts = LsqrOptions {
        damp: cfg.ridge.sqrt(),
        max_iter: cfg.max_iter,
        tol: cfg.tol,
    };
    let result = lsqr::lsqr(
        |c| system.apply(c),
        |u| system.apply_transpose(u),
        &targets,
        system.pairs.len(),
        Some(&warm_coef),
        opts,
    );
    if !result.converged {
        log::debug!("H* LSQR stopped at the iteration cap ({})", cfg.max_iter);
    }
    if result.x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("H* estimate is not finite".into()));
    }
    Ok(CompatMatrix {
        dim: d,
        values: system.symmetric_from(&result.x),
        mask: mask.clone(),
        kind: CompatKind::NegativeAwareHStar,
        energy_kept: warm.energy_kept,
        converged: result.converged,
        iterations: result.iterations,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CompatConfig {
    /// Cap `S` on sampled positive edges.
    pub sample_size: usize,
    /// Fraction of `H`'s strict-upper mass whose coefficients stay active.
    pub energy: f64,
    pub h_star: HStarConfig,
}

impl Default for CompatConfig {
    fn default() -> Self {
        Self {
            sample_size: 200_000,
            energy: 0.95,
            h_star: HStarConfig::default(),
        }
    }
}

/// `H` and `H*` for one preprocessed embedding.
#[derive(Debug, Clone)]
pub struct CompatFit {
    pub h: CompatMatrix,
    pub h_star: CompatMatrix,
    pub sample: EdgeSample,
}

/// The full estimation procedure: 2-core pool, `H` on the pool, coefficient
/// selection, edge sampling, then `H*` warm-started from `H`.
pub fn fit_compatibility(
    z_hat: &DMatrix<f64>,
    train_edges: &[Edge],
    forbidden: &HashSet<Edge>,
    cfg: &CompatConfig,
    seed: u64,
) -> Result<CompatFit> {
    let d = z_hat.ncols();
    let coefficients = d * (d + 1) / 2;
    if cfg.sample_size < 20 * coefficients {
        log::debug!(
            "sample size {} is below 20 x {coefficients} coefficients",
            cfg.sample_size
        );
    }
    let sample = sample_edges_for_compat(
        z_hat.nrows(),
        train_edges,
        forbidden,
        cfg.sample_size,
        coefficients,
        seed,
    );
    let mut h = estimate_h(z_hat, &sample.pool, cfg.h_star.ridge)?;
    let (mask, kept) = select_coefficients(&h, cfg.energy)?;
    h.energy_kept = kept;
    let h_star = estimate_h_star(z_hat, &sample, &h, &mask, &cfg.h_star)?;
    Ok(CompatFit { h, h_star, sample })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn compat(values: DMatrix<f64>) -> CompatMatrix {
        CompatMatrix {
            dim: values.nrows(),
            values,
            mask: CoefficientMask::full(2),
            kind: CompatKind::PlainH,
            energy_kept: 1.0,
            converged: true,
            iterations: 0,
        }
    }

    #[test]
    fn adjusted_similarity_examples() {
        let id = CompatMatrix::identity(2);
        assert!((adjusted_similarity(&[0.6, 0.8], &[0.6, 0.8], &id) - 1.0).abs() < 1e-15);
        assert_eq!(adjusted_similarity(&[1.0, 0.0], &[0.0, 1.0], &id), 0.0);
        let swap = compat(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        assert_eq!(adjusted_similarity(&[1.0, 0.0], &[0.0, 1.0], &swap), 1.0);
    }

    #[test]
    fn h_is_identity_when_endpoints_agree() {
        // Pairs of nodes with identical embeddings spanning R^3.
        let rows = [
            [1.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.6, 0.8],
            [0.0, 0.6, 0.8],
        ];
        let z = DMatrix::from_fn(6, 3, |i, j| rows[i][j]);
        let edges = [(0, 1), (2, 3), (4, 5)];
        let h = estimate_h(&z, &edges, 1e-12).unwrap();
        let mut residual = 0.0;
        for &(i, j) in &edges {
            for (s, t) in [(i, j), (j, i)] {
                let diff = z.row(s) * &h.values - z.row(t);
                residual += diff.norm_squared();
            }
        }
        assert!(residual <= 1e-8, "residual {residual}");
        assert!((h.values.clone() - DMatrix::identity(3, 3)).abs().max() < 1e-6);
    }

    #[test]
    fn h_swaps_sides_on_bipartite_toy() {
        // Left side embeds as e1, right side as e2.
        let z = DMatrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        let edges = [(0, 2), (0, 3), (1, 2), (1, 3)];
        let h = estimate_h(&z, &edges, 1e-6).unwrap();
        assert!(h.values[(0, 0)].abs() < 1e-6 && h.values[(1, 1)].abs() < 1e-6);
        assert!((h.values[(0, 1)] - 1.0).abs() < 1e-6);
        assert!((h.values[(1, 0)] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn estimate_h_rejects_empty_edges() {
        assert!(estimate_h(&DMatrix::zeros(3, 2), &[], 1e-6).is_err());
    }

    #[test]
    fn selection_on_identity_keeps_only_diagonal() {
        let h = CompatMatrix::identity(4);
        let (mask, kept) = select_coefficients(&h, 0.95).unwrap();
        assert_eq!(mask.active_pairs(), vec![(0, 0), (1, 1), (2, 2), (3, 3)]);
        assert_eq!(kept, 1.0);
    }

    #[test]
    fn selection_keeps_single_dominant_entry() {
        let mut v = DMatrix::zeros(4, 4);
        v[(0, 2)] = 96.0;
        v[(1, 3)] = 2.0;
        v[(2, 3)] = 1.0;
        v[(0, 1)] = -1.0;
        let mut h = CompatMatrix::identity(4);
        h.values = v;
        let (mask, kept) = select_coefficients(&h, 0.95).unwrap();
        let off: Vec<_> = mask.active_pairs().into_iter().filter(|(a, b)| a != b).collect();
        assert_eq!(off, vec![(0, 2)]);
        assert!((kept - 0.96).abs() < 1e-12);
        assert!(mask.count() <= 4 * 5 / 2);
        assert!(select_coefficients(&h, 0.0).is_err());
    }

    #[test]
    fn sampling_small_graphs() {
        let tri = vec![(0, 1), (1, 2), (0, 2)];
        let forbidden: HashSet<Edge> = tri.iter().copied().collect();
        let s = sample_edges_for_compat(3, &tri, &forbidden, 10, 1, 0);
        assert_eq!(s.pos.len(), 3);
        assert!(s.neg.is_empty());

        let tree = vec![(0, 1), (0, 2), (0, 3), (3, 4)];
        let forbidden: HashSet<Edge> = tree.iter().copied().collect();
        let s = sample_edges_for_compat(5, &tree, &forbidden, 10, 1, 0);
        assert!(!s.used_two_core);
        assert_eq!(s.pos.len(), 4);
        assert_eq!(s.neg.len(), 6);
        assert!(s.neg.iter().all(|e| !forbidden.contains(e)));
    }

    #[test]
    fn sampling_caps_positive_edges() {
        // Circulant graph on 200 nodes with offsets 1..=5: 1000 edges, all in
        // the 2-core.
        let edges: Vec<Edge> = (0..200)
            .flat_map(|u| (1..=5).map(move |k| graph::canonical(u, (u + k) % 200)))
            .collect();
        let forbidden: HashSet<Edge> = edges.iter().copied().collect();
        assert_eq!(forbidden.len(), 1000);
        let s = sample_edges_for_compat(200, &edges, &forbidden, 100, 10, 4);
        assert!(s.used_two_core);
        assert_eq!(s.pool.len(), 1000);
        assert_eq!(s.pos.len(), 100);
        assert_eq!(s.neg.len(), 200);
    }

    #[test]
    fn h_star_on_separable_system() {
        // Node 0, 1 embed as e1; node 2 as e2. Positive (0,1), negative (0,2).
        let z = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let sample = EdgeSample {
            pool: vec![(0, 1)],
            pos: vec![(0, 1)],
            neg: vec![(0, 2)],
            used_two_core: false,
            seed: 0,
        };
        let warm = CompatMatrix::identity(2);
        let cfg = HStarConfig {
            ridge: 1e-12,
            tol: 1e-12,
            ..Default::default()
        };
        let hs = estimate_h_star(&z, &sample, &warm, &CoefficientMask::full(2), &cfg).unwrap();
        assert!((hs.values[(0, 0)] - 1.0).abs() < 1e-6);
        assert!(hs.values[(0, 1)].abs() < 1e-6);
        assert!((adjusted_similarity(&[1.0, 0.0], &[1.0, 0.0], &hs) - 1.0).abs() < 1e-6);
        assert!(adjusted_similarity(&[1.0, 0.0], &[0.0, 1.0], &hs).abs() < 1e-6);
        assert_eq!(hs.values.transpose(), hs.values);
    }

    #[test]
    fn h_star_honors_mask() {
        let z = DMatrix::from_fn(8, 3, |i, j| ((i * 3 + j * 5) % 7) as f64 / 7.0 - 0.4);
        let sample = EdgeSample {
            pool: vec![(0, 1), (2, 3), (4, 5)],
            pos: vec![(0, 1), (2, 3), (4, 5)],
            neg: vec![(0, 6), (1, 7), (2, 5), (3, 6), (0, 7), (4, 7)],
            used_two_core: false,
            seed: 0,
        };
        let mut mask = CoefficientMask::full(3);
        mask.set(0, 2, false);
        let hs = estimate_h_star(&z, &sample, &CompatMatrix::identity(3), &mask, &HStarConfig::default())
            .unwrap();
        assert_eq!(hs.values[(0, 2)], 0.0);
        assert_eq!(hs.values[(2, 0)], 0.0);
        assert!(hs.values[(0, 1)] != 0.0);
    }
}
