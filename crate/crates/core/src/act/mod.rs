//! Linear predictors on the embedding components: edge features
//! `(ẑ_i H*) ⊙ ẑ_j` for link prediction and column-normalized node rows for
//! node classification, each fed to a sparse-group-LASSO logistic regression.

pub mod features;
pub mod metrics;
pub mod model;

use std::collections::{BTreeMap, HashSet};
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::compat::{CompatConfig, CompatFit, CompatMatrix};
use crate::embed::{self, Component, EmbedConfig, EmbeddingSet};
use crate::error::{Error, Result};
use crate::graph::{self, Edge, EdgeSplit, NodeSplit, SparseGraph};
use crate::rng;
use crate::score;

pub use features::{build_lp_features, build_nc_features, LpFeatureBuilder};
pub use metrics::{accuracy, hits_at_k};
pub use model::{LinearModel, SglPenalty, Standardizer, Targets, TrainConfig};

/// Which compatibility matrix the edge features use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompatMode {
    HStar,
    PlainH,
    /// Plain Hadamard product of the endpoints.
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActConfig {
    pub train: TrainConfig,
    pub grid_wd1: Vec<f64>,
    pub grid_wd2: Vec<f64>,
    pub components: Vec<Component>,
    /// `K` of Hits@K (link prediction).
    pub hits_k: usize,
    pub compat_mode: CompatMode,
    /// Sampled training negatives per training positive, per epoch.
    pub negative_ratio: f64,
    pub seed: u64,
}

impl Default for ActConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            grid_wd1: vec![1e-4, 1e-5],
            grid_wd2: vec![1e-3, 1e-4, 1e-5, 1e-6],
            components: Component::ALL.to_vec(),
            hits_k: 100,
            compat_mode: CompatMode::HStar,
            negative_ratio: 1.0,
            seed: 0,
        }
    }
}

impl ActConfig {
    /// Defaults for node classification: a small fixed training set, so each
    /// epoch runs the proximal iterations nearly to convergence.
    pub fn node_classification() -> Self {
        Self {
            train: TrainConfig {
                inner_steps: 20,
                inner_tol: 1e-9,
                negative_resampling: false,
                ..TrainConfig::default()
            },
            ..Self::default()
        }
    }

    fn grid(&self) -> Result<Vec<(f64, f64)>> {
        if self.grid_wd1.is_empty() || self.grid_wd2.is_empty() {
            return Err(Error::input("penalty grid is empty"));
        }
        if self.components.is_empty() {
            return Err(Error::input("no embedding components selected"));
        }
        Ok(self
            .grid_wd1
            .iter()
            .flat_map(|&a| self.grid_wd2.iter().map(move |&b| (a, b)))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActResult {
    /// `hits@K` or `accuracy`.
    pub metric: String,
    pub valid: f64,
    pub test: f64,
    pub wd1: f64,
    pub wd2: f64,
    pub best_epoch: usize,
    /// Seconds per phase.
    pub timings: BTreeMap<String, f64>,
    /// L2 norm of each component's weight block in the selected model.
    pub group_norms: BTreeMap<Component, f64>,
    #[serde(skip)]
    pub model: Option<LinearModel>,
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn bce(z: &DMatrix<f64>, y: f64) -> f64 {
    z.column(0)
        .iter()
        .map(|&v| {
            let sp = if v > 0.0 { v + (-v).exp().ln_1p() } else { v.exp().ln_1p() };
            sp - y * v
        })
        .sum()
}

struct LpProblem<'a> {
    builder: &'a LpFeatureBuilder,
    standardizer: Standardizer,
    /// Positives on top, the current epoch's negatives below.
    x: DMatrix<f64>,
    targets: Targets,
    num_pos: usize,
    num_nodes: usize,
    forbidden: &'a HashSet<Edge>,
    num_neg: usize,
    valid_pos: DMatrix<f64>,
    valid_neg: DMatrix<f64>,
    hits_k: usize,
    seed: u64,
}

impl model::TrainingProblem for LpProblem<'_> {
    fn num_features(&self) -> usize {
        self.builder.num_features()
    }

    fn num_outputs(&self) -> usize {
        1
    }

    fn next_batch(&mut self, epoch: usize) -> Result<()> {
        let mut r = rng::stream(self.seed, &format!("act-negatives-{epoch}"));
        let edges = graph::sample_negatives(self.num_nodes, self.forbidden, self.num_neg, &mut r);
        if edges.len() != self.num_neg {
            return Err(Error::Resource("ran out of negative edges for training".into()));
        }
        self.builder.fill(&edges, &mut self.x, self.num_pos, &self.standardizer);
        Ok(())
    }

    fn batch(&self) -> (&DMatrix<f64>, &Targets) {
        (&self.x, &self.targets)
    }

    fn validate(&self, w: &DMatrix<f64>, b: &DVector<f64>) -> Result<(f64, f64)> {
        let zp = &self.valid_pos * w;
        let zn = &self.valid_neg * w;
        let shift = |z: &DMatrix<f64>| z.column(0).iter().map(|v| v + b[0]).collect::<Vec<f64>>();
        let (sp, sn) = (shift(&zp), shift(&zn));
        let hits = hits_at_k(&sp, &sn, self.hits_k)?;
        let zp = DMatrix::from_vec(sp.len(), 1, sp);
        let zn = DMatrix::from_vec(sn.len(), 1, sn);
        let loss = (bce(&zp, 1.0) + bce(&zn, 0.0)) / (zp.nrows() + zn.nrows()) as f64;
        Ok((hits, loss))
    }
}

fn record(timings: &mut BTreeMap<String, f64>, phase: &str, start: Instant) {
    *timings.entry(phase.to_string()).or_insert(0.0) += start.elapsed().as_secs_f64();
}

/// Compatibility matrices by mode; `None` entries mean no transform.
fn compat_choice<'a>(
    fits: &'a BTreeMap<Component, CompatFit>,
    components: &[Component],
    mode: CompatMode,
) -> Result<Vec<(Component, Option<&'a CompatMatrix>)>> {
    components
        .iter()
        .map(|&c| {
            let h = match mode {
                CompatMode::None => None,
                _ => {
                    let fit = fits
                        .get(&c)
                        .ok_or_else(|| Error::input(format!("no compatibility fit for {c}")))?;
                    Some(if mode == CompatMode::HStar { &fit.h_star } else { &fit.h })
                }
            };
            Ok((c, h))
        })
        .collect()
}

/// Link prediction with embeddings and compatibility fits already computed
/// on the training graph.
pub fn act_link_prediction_with(
    emb: &EmbeddingSet,
    fits: &BTreeMap<Component, CompatFit>,
    split: &EdgeSplit,
    cfg: &ActConfig,
) -> Result<ActResult> {
    let grid = cfg.grid()?;
    let mut timings = BTreeMap::new();
    if split.train_pos.is_empty() || split.valid_pos.is_empty() || split.test_pos.is_empty() {
        return Err(Error::input("link prediction needs train, valid and test positives"));
    }

    let start = Instant::now();
    let hs = compat_choice(fits, &cfg.components, cfg.compat_mode)?;
    let builder = LpFeatureBuilder::new(emb, &hs);
    let groups = builder.groups();
    let forbidden: HashSet<Edge> = split.train_pos.iter().copied().collect();
    let num_neg = ((split.train_pos.len() as f64) * cfg.negative_ratio).round().max(1.0) as usize;
    let n = emb.num_nodes();
    let raw_pos = builder.build(&split.train_pos);
    let first_neg = {
        let mut r = rng::stream(cfg.seed, "act-negatives-scaler");
        builder.build(&graph::sample_negatives(n, &forbidden, num_neg, &mut r))
    };
    let mut stacked = DMatrix::zeros(raw_pos.nrows() + first_neg.nrows(), raw_pos.ncols());
    stacked.rows_mut(0, raw_pos.nrows()).copy_from(&raw_pos);
    stacked.rows_mut(raw_pos.nrows(), first_neg.nrows()).copy_from(&first_neg);
    let standardizer = Standardizer::fit(&stacked);
    drop(stacked);
    let num_pos = raw_pos.nrows();
    let mut x = DMatrix::zeros(num_pos + num_neg, raw_pos.ncols());
    x.rows_mut(0, num_pos).copy_from(&standardizer.apply(&raw_pos));
    drop(raw_pos);
    let mut y = vec![1.0; num_pos];
    y.resize(num_pos + num_neg, 0.0);
    let mut problem = LpProblem {
        builder: &builder,
        x,
        targets: Targets::Binary(y),
        num_pos,
        valid_pos: standardizer.apply(&builder.build(&split.valid_pos)),
        valid_neg: standardizer.apply(&builder.build(&split.valid_neg)),
        standardizer,
        num_nodes: n,
        forbidden: &forbidden,
        num_neg,
        hits_k: cfg.hits_k,
        seed: rng::derive_seed(cfg.seed, "act-lp"),
    };
    record(&mut timings, "features", start);

    let start = Instant::now();
    let mut best: Option<(model::TrainOutcome, f64, f64)> = None;
    for &(wd1, wd2) in &grid {
        let tc = TrainConfig { wd1, wd2, ..cfg.train };
        let out = model::train(&mut problem, &groups, &tc)?;
        let better = match &best {
            None => true,
            Some((b, _, _)) => {
                out.best_metric > b.best_metric || (out.best_metric == b.best_metric && out.best_loss < b.best_loss)
            }
        };
        if better {
            best = Some((out, wd1, wd2));
        }
    }
    record(&mut timings, "train", start);
    let (outcome, wd1, wd2) = best.expect("grid is non-empty");

    let start = Instant::now();
    let model = LinearModel {
        weights: outcome.weights,
        bias: outcome.bias,
        groups,
        standardizer: problem.standardizer.clone(),
    };
    let w = model.weights.column(0);
    let w = w.as_slice();
    let test_pos = builder.score_edges(&split.test_pos, w, model.bias[0], &model.standardizer);
    let test_neg = builder.score_edges(&split.test_neg, w, model.bias[0], &model.standardizer);
    let test = hits_at_k(&test_pos, &test_neg, cfg.hits_k)?;
    record(&mut timings, "eval", start);
    let group_norms = cfg.components.iter().copied().zip(model.group_norms()).collect();
    Ok(ActResult {
        metric: format!("hits@{}", cfg.hits_k),
        valid: outcome.best_metric,
        test,
        wd1,
        wd2,
        best_epoch: outcome.best_epoch,
        timings,
        group_norms,
        model: Some(model),
    })
}

/// The training graph of a split.
pub fn train_graph(split: &EdgeSplit, num_nodes: usize) -> Result<SparseGraph> {
    SparseGraph::from_edges(&split.train_pos, num_nodes)
}

/// End-to-end link prediction: embeddings on the training graph, `H*` per
/// component, then the linear predictor.
pub fn act_link_prediction(
    features: &DMatrix<f64>,
    split: &EdgeSplit,
    embed_cfg: &EmbedConfig,
    compat_cfg: &CompatConfig,
    cfg: &ActConfig,
) -> Result<ActResult> {
    let mut timings = BTreeMap::new();
    let start = Instant::now();
    let g = train_graph(split, features.nrows())?;
    let emb = embed::compute_embeddings(&g, features, embed_cfg)?;
    record(&mut timings, "embed", start);
    let start = Instant::now();
    let fits = score::fit_components(&emb, &split.train_pos, compat_cfg, cfg.seed)?;
    record(&mut timings, "compat", start);
    let mut result = act_link_prediction_with(&emb, &fits, split, cfg)?;
    result.timings.extend(timings);
    Ok(result)
}

fn select_rows(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), m.ncols(), |r, c| m[(idx[r], c)])
}

/// Node classification from embeddings of the full graph.
pub fn act_node_classification(
    emb: &EmbeddingSet,
    labels: &[usize],
    split: &NodeSplit,
    cfg: &ActConfig,
) -> Result<ActResult> {
    let grid = cfg.grid()?;
    if labels.len() != emb.num_nodes() {
        return Err(Error::input("label count differs from node count"));
    }
    if split.train.is_empty() || split.valid.is_empty() || split.test.is_empty() {
        return Err(Error::input("node classification needs train, valid and test nodes"));
    }
    let mut timings = BTreeMap::new();
    let start = Instant::now();
    let num_classes = labels.iter().max().map_or(1, |m| m + 1);
    let x = build_nc_features(emb, &cfg.components);
    let groups = features::component_groups(emb, &cfg.components);
    // Unit-norm columns as they are; the penalty grid is sized for this scale.
    let standardizer = Standardizer::identity(x.ncols());
    let x_train = standardizer.apply(&select_rows(&x, &split.train));
    let x_valid = standardizer.apply(&select_rows(&x, &split.valid));
    let pick = |idx: &[usize]| Targets::Classes {
        labels: idx.iter().map(|&i| labels[i]).collect(),
        num_classes,
    };
    let (t_train, t_valid) = (pick(&split.train), pick(&split.valid));
    record(&mut timings, "features", start);

    let start = Instant::now();
    let mut best: Option<(model::TrainOutcome, f64, f64)> = None;
    for &(wd1, wd2) in &grid {
        let mut problem = model::FixedProblem {
            x: &x_train,
            targets: &t_train,
            valid_x: &x_valid,
            valid_targets: &t_valid,
            metric: None,
        };
        let tc = TrainConfig { wd1, wd2, ..cfg.train };
        let out = model::train(&mut problem, &groups, &tc)?;
        let better = match &best {
            None => true,
            Some((b, _, _)) => {
                out.best_metric > b.best_metric || (out.best_metric == b.best_metric && out.best_loss < b.best_loss)
            }
        };
        if better {
            best = Some((out, wd1, wd2));
        }
    }
    record(&mut timings, "train", start);
    let (outcome, wd1, wd2) = best.expect("grid is non-empty");

    let start = Instant::now();
    let model = LinearModel {
        weights: outcome.weights,
        bias: outcome.bias,
        groups,
        standardizer,
    };
    let pred = model.predict_classes(&select_rows(&x, &split.test));
    let truth: Vec<usize> = split.test.iter().map(|&i| labels[i]).collect();
    let test = accuracy(&pred, &truth)?;
    record(&mut timings, "eval", start);
    let group_norms = cfg.components.iter().copied().zip(model.group_norms()).collect();
    Ok(ActResult {
        metric: "accuracy".into(),
        valid: outcome.best_metric,
        test,
        wd1,
        wd2,
        best_epoch: outcome.best_epoch,
        timings,
        group_norms,
        model: Some(model),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_std_examples() {
        assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 1.0));
        assert!(mean_std(&[]).0.is_nan());
    }

    #[test]
    fn constant_labels_are_trivial() {
        let n = 60;
        let blocks: Vec<DMatrix<f64>> = (0..5)
            .map(|k| DMatrix::from_fn(n, 3, |i, j| ((i * 13 + j * 7 + k) % 17) as f64))
            .collect();
        let prov = crate::embed::Provenance {
            dim: 3,
            walk_trials: 1,
            walk_steps: 2,
            k_row: 2,
            k_sym: 2,
            count_mode: crate::embed::CountMode::AllSteps,
            count_start: false,
            seed: 0,
            padded: vec![],
        };
        let emb = EmbeddingSet::from_blocks(blocks, prov).unwrap();
        let labels = vec![0usize; n];
        let split = graph::split_nodes(n, (0.2, 0.2, 0.6), 1).unwrap();
        let cfg = ActConfig {
            grid_wd1: vec![1e-4],
            grid_wd2: vec![1e-4],
            ..Default::default()
        };
        let r = act_node_classification(&emb, &labels, &split, &cfg).unwrap();
        assert_eq!(r.test, 1.0);
    }
}
