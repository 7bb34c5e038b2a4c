//! NetInfoF_Score and the link-prediction / node-classification probes.
//!
//! The score of a discrete predictor `X` for a label `Y` is `2^{−H(Y|X)}`,
//! a lower bound on the accuracy of the best predictor that only sees `X`.

use std::collections::{BTreeMap, HashSet};
use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::compat::{self, CompatConfig, CompatFit};
use crate::embed::{Component, EmbeddingSet};
use crate::error::{Error, Result};
use crate::graph::{Edge, EdgeSplit, NodeSplit};
use crate::kmeans;
use crate::linalg;
use crate::rng;

/// Co-occurrence counts of a discrete predictor (rows) and a label (columns).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointCounts {
    rows: usize,
    cols: usize,
    table: Vec<u64>,
}

impl JointCounts {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            table: vec![0; rows * cols],
        }
    }

    pub fn from_table(table: &[Vec<u64>]) -> Result<Self> {
        let rows = table.len();
        let cols = table.first().map_or(0, Vec::len);
        if table.iter().any(|r| r.len() != cols) {
            return Err(Error::input("count table rows have different lengths"));
        }
        Ok(Self {
            rows,
            cols,
            table: table.concat(),
        })
    }

    /// Tabulate paired observations; the table is sized to the largest ids.
    pub fn from_pairs(x: &[usize], y: &[usize]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::input("predictor and label lengths differ"));
        }
        let rows = x.iter().max().map_or(0, |m| m + 1);
        let cols = y.iter().max().map_or(0, |m| m + 1);
        let mut counts = Self::new(rows, cols);
        for (&a, &b) in x.iter().zip(y) {
            counts.add(a, b, 1);
        }
        Ok(counts)
    }

    pub fn add(&mut self, x: usize, y: usize, n: u64) {
        assert!(x < self.rows && y < self.cols, "count cell out of range");
        self.table[x * self.cols + y] += n;
    }

    pub fn get(&self, x: usize, y: usize) -> u64 {
        self.table[x * self.cols + y]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn total(&self) -> u64 {
        self.table.iter().sum()
    }

    fn row(&self, x: usize) -> &[u64] {
        &self.table[x * self.cols..(x + 1) * self.cols]
    }

    fn check_nonempty(&self) -> Result<f64> {
        let total = self.total();
        if total == 0 {
            return Err(Error::input("joint count table is empty"));
        }
        Ok(total as f64)
    }
}

/// `H(Y|X)` in bits from raw counts, with `0 log 0 = 0`.
pub fn conditional_entropy(counts: &JointCounts) -> Result<f64> {
    let total = counts.check_nonempty()?;
    let mut h = 0.0;
    for x in 0..counts.rows {
        let row = counts.row(x);
        let nx: u64 = row.iter().sum();
        if nx == 0 {
            continue;
        }
        let nx = nx as f64;
        for &nxy in row {
            if nxy > 0 {
                let p = nxy as f64 / nx;
                h -= (nx / total) * p * p.log2();
            }
        }
    }
    Ok(h.max(0.0))
}

/// `2^{−H(Y|X)}`.
pub fn netinfof_score(counts: &JointCounts) -> Result<f64> {
    Ok((-conditional_entropy(counts)?).exp2())
}

/// `Σ_x max_y p(x, y)`: the accuracy of predicting the majority label of
/// each predictor value.
pub fn accuracy_bound(counts: &JointCounts) -> Result<f64> {
    let total = counts.check_nonempty()?;
    let hits: u64 = (0..counts.rows)
        .map(|x| counts.row(x).iter().copied().max().unwrap_or(0))
        .sum();
    Ok(hits as f64 / total)
}

/// Quantile binning of a scalar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discretizer {
    /// Strictly ascending thresholds; a value falls in bin `#{e ≤ v}`.
    pub bin_edges: Vec<f64>,
    /// Requested bin count (effective count is `bin_edges.len() + 1`).
    pub k: usize,
}

impl Discretizer {
    pub fn num_bins(&self) -> usize {
        self.bin_edges.len() + 1
    }

    pub fn bin(&self, v: f64) -> usize {
        self.bin_edges.partition_point(|&e| e <= v)
    }
}

/// Linear-interpolated quantile of ascending `sorted` at `q ∈ [0, 1]`.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Bin edges at the `i/k` quantiles, `i = 1..k−1`, with duplicates collapsed.
pub fn fit_discretizer(values: &[f64], k: usize) -> Result<Discretizer> {
    if k == 0 {
        return Err(Error::input("discretizer needs k >= 1"));
    }
    if values.is_empty() {
        return Err(Error::input("discretizer needs at least one value"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite value given to discretizer".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut edges: Vec<f64> = Vec::with_capacity(k.saturating_sub(1));
    for i in 1..k {
        let e = quantile(&sorted, i as f64 / k as f64);
        if edges.last().is_none_or(|&last| e > last) {
            edges.push(e);
        }
    }
    // An edge at the minimum would leave bin 0 empty forever.
    edges.retain(|&e| e > sorted[0]);
    Ok(Discretizer { bin_edges: edges, k })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    LinkPrediction,
    NodeClassification,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProbeParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_bins: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_clusters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask_density: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_kept: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentScore {
    /// NetInfoF_Score in `[0, 1]`.
    pub score: f64,
    /// Validation accuracy of the majority-label-per-bin (or cluster)
    /// predictor; never below `score`.
    pub accuracy_bound: f64,
    pub params: ProbeParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub task: Task,
    pub components: BTreeMap<Component, ComponentScore>,
    pub seed: u64,
    /// Seconds per component.
    pub timings: BTreeMap<String, f64>,
}

impl ScoreReport {
    pub fn score(&self, c: Component) -> f64 {
        self.components[&c].score
    }

    /// Components ordered by descending score.
    pub fn ranking(&self) -> Vec<Component> {
        let mut order: Vec<Component> = self.components.keys().copied().collect();
        order.sort_by(|a, b| self.score(*b).total_cmp(&self.score(*a)));
        order
    }
}

fn scored(counts: &JointCounts, params: ProbeParams) -> Result<ComponentScore> {
    let score = netinfof_score(counts)?;
    let accuracy_bound = accuracy_bound(counts)?;
    if score > accuracy_bound + 1e-12 {
        return Err(Error::Numerical(format!(
            "score {score} exceeds its accuracy bound {accuracy_bound}"
        )));
    }
    Ok(ComponentScore {
        score,
        accuracy_bound,
        params,
    })
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProbeLpConfig {
    pub k_bins: usize,
    pub compat: CompatConfig,
    pub seed: u64,
}

impl Default for ProbeLpConfig {
    fn default() -> Self {
        Self {
            k_bins: 32,
            compat: CompatConfig::default(),
            seed: 0,
        }
    }
}

/// Compatibility fits for every component on the training edges of `split`.
pub fn fit_components(
    emb: &EmbeddingSet,
    train_edges: &[Edge],
    cfg: &CompatConfig,
    seed: u64,
) -> Result<BTreeMap<Component, CompatFit>> {
    let forbidden: HashSet<Edge> = train_edges.iter().copied().collect();
    let mut fits = BTreeMap::new();
    for c in Component::ALL {
        let z = emb.preprocessed(c);
        let fit = compat::fit_compatibility(
            &z,
            train_edges,
            &forbidden,
            cfg,
            rng::derive_seed(seed, &format!("compat-{c}")),
        )?;
        fits.insert(c, fit);
    }
    Ok(fits)
}

/// Probe one component given its fitted compatibility matrix.
pub fn probe_lp_component(
    z_hat: &DMatrix<f64>,
    fit: &CompatFit,
    split: &EdgeSplit,
    k_bins: usize,
    seed: u64,
) -> Result<ComponentScore> {
    if split.valid_pos.is_empty() || split.valid_neg.is_empty() {
        return Err(Error::input("link probe needs validation positives and negatives"));
    }
    let h = &fit.h_star;
    let mut train_sims = compat::similarities(z_hat, h, &fit.sample.pos);
    train_sims.extend(compat::similarities(z_hat, h, &fit.sample.neg));
    let disc = fit_discretizer(&train_sims, k_bins)?;
    let mut counts = JointCounts::new(disc.num_bins(), 2);
    for (edges, label) in [(&split.valid_pos, 1), (&split.valid_neg, 0)] {
        for s in compat::similarities(z_hat, h, edges) {
            counts.add(disc.bin(s), label, 1);
        }
    }
    scored(
        &counts,
        ProbeParams {
            k_bins: Some(k_bins),
            effective_bins: Some(disc.num_bins()),
            mask_density: Some(h.mask.density()),
            energy_kept: Some(h.energy_kept),
            converged: Some(h.converged),
            seed,
            ..Default::default()
        },
    )
}

/// Link-prediction probe with compatibility matrices already fitted.
pub fn probe_link_prediction_with(
    emb: &EmbeddingSet,
    fits: &BTreeMap<Component, CompatFit>,
    split: &EdgeSplit,
    k_bins: usize,
    seed: u64,
) -> Result<ScoreReport> {
    let mut components = BTreeMap::new();
    let mut timings = BTreeMap::new();
    for c in Component::ALL {
        let start = Instant::now();
        let z = emb.preprocessed(c);
        let fit = fits
            .get(&c)
            .ok_or_else(|| Error::input(format!("no compatibility fit for component {c}")))?;
        components.insert(c, probe_lp_component(&z, fit, split, k_bins, seed)?);
        timings.insert(c.to_string(), start.elapsed().as_secs_f64());
    }
    Ok(ScoreReport {
        task: Task::LinkPrediction,
        components,
        seed,
        timings,
    })
}

/// Link-prediction probe: per component, fit `H*` on the training edges,
/// discretize adjusted similarities with bins fitted on the sampled training
/// edges, and score the validation edges.
pub fn probe_link_prediction(
    emb: &EmbeddingSet,
    split: &EdgeSplit,
    cfg: &ProbeLpConfig,
) -> Result<ScoreReport> {
    let start = Instant::now();
    let fits = fit_components(emb, &split.train_pos, &cfg.compat, cfg.seed)?;
    let fit_secs = start.elapsed().as_secs_f64();
    let mut report = probe_link_prediction_with(emb, &fits, split, cfg.k_bins, cfg.seed)?;
    report.timings.insert("compat".into(), fit_secs);
    Ok(report)
}

/// Which rows the probe's k-means is fitted on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitScope {
    /// Test-partition rows only; train and valid rows are assigned afterwards.
    Test,
    All,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProbeNcConfig {
    /// Defaults to twice the number of classes.
    pub k_clusters: Option<usize>,
    pub max_iter: usize,
    pub fit_scope: FitScope,
    pub seed: u64,
}

impl Default for ProbeNcConfig {
    fn default() -> Self {
        Self {
            k_clusters: None,
            max_iter: 100,
            fit_scope: FitScope::Test,
            seed: 0,
        }
    }
}

fn select_rows(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), m.ncols(), |r, c| m[(idx[r], c)])
}

/// Node-classification probe for one embedding block.
pub fn probe_nc_component(
    z: &DMatrix<f64>,
    labels: &[usize],
    split: &NodeSplit,
    k: usize,
    cfg: &ProbeNcConfig,
) -> Result<ComponentScore> {
    let rows = linalg::l2_normalize_rows(z);
    let fit_idx: Vec<usize> = match cfg.fit_scope {
        FitScope::Test => split.test.clone(),
        FitScope::All => (0..rows.nrows()).collect(),
    };
    if fit_idx.is_empty() {
        return Err(Error::input("no rows to fit the clustering on"));
    }
    let model = kmeans::kmeans(&select_rows(&rows, &fit_idx), k, cfg.seed, cfg.max_iter)?;
    let labeled: Vec<usize> = split.train.iter().chain(&split.valid).copied().collect();
    let clusters = model.predict(&select_rows(&rows, &labeled));
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = JointCounts::new(k, classes);
    for (&node, &cl) in labeled.iter().zip(&clusters) {
        counts.add(cl, labels[node], 1);
    }
    scored(
        &counts,
        ProbeParams {
            k_clusters: Some(k),
            seed: cfg.seed,
            ..Default::default()
        },
    )
}

/// Node-classification probe: cluster each row-normalized component and
/// score how well clusters determine the labels of train and valid nodes.
pub fn probe_node_classification(
    emb: &EmbeddingSet,
    labels: &[usize],
    split: &NodeSplit,
    cfg: &ProbeNcConfig,
) -> Result<ScoreReport> {
    if labels.len() != emb.num_nodes() {
        return Err(Error::input(format!(
            "{} labels for {} nodes",
            labels.len(),
            emb.num_nodes()
        )));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let k = cfg.k_clusters.unwrap_or(2 * classes).max(1);
    let mut components = BTreeMap::new();
    let mut timings = BTreeMap::new();
    for c in Component::ALL {
        let start = Instant::now();
        components.insert(c, probe_nc_component(emb.get(c), labels, split, k, cfg)?);
        timings.insert(c.to_string(), start.elapsed().as_secs_f64());
    }
    Ok(ScoreReport {
        task: Task::NodeClassification,
        components,
        seed: cfg.seed,
        timings,
    })
}
