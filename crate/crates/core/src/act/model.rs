//! Logistic regression with a sparse-group LASSO penalty.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    /// 0/1 labels for a single sigmoid output.
    Binary(Vec<f64>),
    /// Class ids for a softmax over `num_classes` outputs.
    Classes { labels: Vec<usize>, num_classes: usize },
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Binary(y) => y.len(),
            Targets::Classes { labels, .. } => labels.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn outputs(&self) -> usize {
        match self {
            Targets::Binary(_) => 1,
            Targets::Classes { num_classes, .. } => *num_classes,
        }
    }
}

/// Per-column centering and scaling fitted on training features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &DMatrix<f64>) -> Self {
        let n = x.nrows().max(1) as f64;
        let mut means = Vec::with_capacity(x.ncols());
        let mut scales = Vec::with_capacity(x.ncols());
        for col in x.column_iter() {
            let mean = col.sum() / n;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            let std = var.sqrt();
            means.push(mean);
            scales.push(if std > 1e-12 { 1.0 / std } else { 0.0 });
        }
        Self { means, scales }
    }

    pub fn identity(cols: usize) -> Self {
        Self {
            means: vec![0.0; cols],
            scales: vec![1.0; cols],
        }
    }

    pub fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = x.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            let (m, s) = (self.means[j], self.scales[j]);
            col.apply(|v| *v = (*v - m) * s);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// `features × outputs`.
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
    /// Feature-row ranges sharing a group-lasso term.
    pub groups: Vec<Range<usize>>,
    pub standardizer: Standardizer,
}

impl LinearModel {
    pub fn zeros(features: usize, outputs: usize, groups: Vec<Range<usize>>) -> Self {
        Self {
            weights: DMatrix::zeros(features, outputs),
            bias: DVector::zeros(outputs),
            groups,
            standardizer: Standardizer::identity(features),
        }
    }

    /// Raw logits for unstandardized features.
    pub fn logits(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        logits(&self.weights, &self.bias, &self.standardizer.apply(x))
    }

    /// Single-output decision values (the logit).
    pub fn scores(&self, x: &DMatrix<f64>) -> Vec<f64> {
        self.logits(x).column(0).iter().copied().collect()
    }

    pub fn predict_classes(&self, x: &DMatrix<f64>) -> Vec<usize> {
        argmax_rows(&self.logits(x))
    }

    /// `‖w_g‖₂` for each group.
    pub fn group_norms(&self) -> Vec<f64> {
        self.groups
            .iter()
            .map(|g| self.weights.rows(g.start, g.len()).norm())
            .collect()
    }
}

pub fn argmax_rows(m: &DMatrix<f64>) -> Vec<usize> {
    m.row_iter()
        .map(|r| {
            let mut best = 0;
            for j in 1..r.len() {
                if r[j] > r[best] {
                    best = j;
                }
            }
            best
        })
        .collect()
}

fn logits(w: &DMatrix<f64>, b: &DVector<f64>, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut z = x * w;
    for (j, mut col) in z.column_iter_mut().enumerate() {
        col.add_scalar_mut(b[j]);
    }
    z
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean logistic (or softmax cross-entropy) loss and the derivative of the
/// logits, `(p − y) / n`.
fn loss_and_residual(z: &DMatrix<f64>, targets: &Targets) -> (f64, DMatrix<f64>) {
    let n = z.nrows() as f64;
    match targets {
        Targets::Binary(y) => {
            let mut loss = 0.0;
            let mut r = DMatrix::zeros(z.nrows(), 1);
            for i in 0..z.nrows() {
                let zi = z[(i, 0)];
                loss += softplus(zi) - y[i] * zi;
                r[(i, 0)] = (sigmoid(zi) - y[i]) / n;
            }
            (loss / n, r)
        }
        Targets::Classes { labels, .. } => {
            let mut loss = 0.0;
            let mut r = DMatrix::zeros(z.nrows(), z.ncols());
            for i in 0..z.nrows() {
                let row = z.row(i);
                let max = row.max();
                let sum: f64 = row.iter().map(|v| (v - max).exp()).sum();
                let lse = max + sum.ln();
                loss += lse - row[labels[i]];
                for j in 0..z.ncols() {
                    let p = (row[j] - lse).exp();
                    r[(i, j)] = (p - f64::from(u8::from(j == labels[i]))) / n;
                }
            }
            (loss / n, r)
        }
    }
}

/// Mean loss only.
pub fn loss(w: &DMatrix<f64>, b: &DVector<f64>, x: &DMatrix<f64>, targets: &Targets) -> f64 {
    loss_and_residual(&logits(w, b, x), targets).0
}

/// Mean loss and its gradient with respect to weights and bias.
pub fn loss_and_grad(
    w: &DMatrix<f64>,
    b: &DVector<f64>,
    x: &DMatrix<f64>,
    targets: &Targets,
) -> (f64, DMatrix<f64>, DVector<f64>) {
    let (loss, r) = loss_and_residual(&logits(w, b, x), targets);
    let gw = x.tr_mul(&r);
    let gb = DVector::from_iterator(r.ncols(), r.column_iter().map(|c| c.sum()));
    (loss, gw, gb)
}

/// `wd1 Σ|w| + wd2 Σ_g √(d_g) ‖w_g‖₂`, where `d_g` counts the entries of
/// group `g` across all outputs. The bias is never penalized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SglPenalty {
    pub wd1: f64,
    pub wd2: f64,
}

impl SglPenalty {
    pub fn value(&self, w: &DMatrix<f64>, groups: &[Range<usize>]) -> f64 {
        let l1: f64 = w.iter().map(|v| v.abs()).sum();
        let group: f64 = groups
            .iter()
            .map(|g| ((g.len() * w.ncols()) as f64).sqrt() * w.rows(g.start, g.len()).norm())
            .sum();
        self.wd1 * l1 + self.wd2 * group
    }

    /// Proximal operator with step `step`: elementwise soft-threshold by
    /// `step·wd1`, then group soft-threshold by `step·wd2·√d_g`.
    pub fn prox(&self, w: &DMatrix<f64>, groups: &[Range<usize>], step: f64) -> DMatrix<f64> {
        let t1 = step * self.wd1;
        let mut out = w.map(|v| v.signum() * (v.abs() - t1).max(0.0));
        for g in groups {
            let t2 = step * self.wd2 * ((g.len() * w.ncols()) as f64).sqrt();
            let mut block = out.rows_mut(g.start, g.len());
            let norm = block.norm();
            if norm <= t2 {
                block.fill(0.0);
            } else {
                block *= 1.0 - t2 / norm;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Initial step size; backtracking shrinks it and successful steps may
    /// grow it again.
    pub lr: f64,
    pub wd1: f64,
    pub wd2: f64,
    pub epochs: usize,
    pub patience: usize,
    pub seed: u64,
    /// Draw fresh negatives every epoch (link prediction only).
    pub negative_resampling: bool,
    /// Nesterov momentum with restart on objective increase.
    pub accelerate: bool,
    /// Proximal iterations on each epoch's batch.
    pub inner_steps: usize,
    /// Relative objective decrease below which an epoch ends early.
    pub inner_tol: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            lr: 0.1,
            wd1: 1e-4,
            wd2: 1e-4,
            epochs: 100,
            patience: 5,
            seed: 0,
            negative_resampling: true,
            accelerate: true,
            inner_steps: 1,
            inner_tol: 0.0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0) || self.wd1 < 0.0 || self.wd2 < 0.0 || self.inner_steps == 0 {
            return Err(Error::input("training needs lr > 0, non-negative penalties and inner_steps >= 1"));
        }
        Ok(())
    }
}

/// Supplies training batches and validation feedback to [`train`].
pub trait TrainingProblem {
    fn num_features(&self) -> usize;
    fn num_outputs(&self) -> usize;
    /// Prepare the training batch for `epoch` (called once per epoch).
    fn next_batch(&mut self, epoch: usize) -> Result<()>;
    /// Standardized features and targets of the current batch.
    fn batch(&self) -> (&DMatrix<f64>, &Targets);
    /// Validation metric (higher is better) and validation loss.
    fn validate(&self, w: &DMatrix<f64>, b: &DVector<f64>) -> Result<(f64, f64)>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    /// Penalized objective on the epoch's batch before and after the step.
    pub objective_before: f64,
    pub objective_after: f64,
    pub step: f64,
    pub valid_metric: f64,
    pub valid_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub weights: DMatrix<f64>,
    pub bias: DVector<f64>,
    pub best_epoch: usize,
    pub best_metric: f64,
    pub best_loss: f64,
    pub history: Vec<EpochLog>,
}

fn objective(
    w: &DMatrix<f64>,
    b: &DVector<f64>,
    x: &DMatrix<f64>,
    t: &Targets,
    pen: &SglPenalty,
    groups: &[Range<usize>],
) -> f64 {
    loss(w, b, x, t) + pen.value(w, groups)
}

/// One proximal step from `(yw, yb)` with backtracking on the smooth part.
#[allow(clippy::too_many_arguments)]
fn prox_step(
    yw: &DMatrix<f64>,
    yb: &DVector<f64>,
    x: &DMatrix<f64>,
    t: &Targets,
    pen: &SglPenalty,
    groups: &[Range<usize>],
    step: &mut f64,
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let (f_y, gw, gb) = loss_and_grad(yw, yb, x, t);
    if !f_y.is_finite() {
        return Err(Error::Numerical("training loss is not finite".into()));
    }
    for _ in 0..60 {
        let nw = pen.prox(&(yw - &gw * *step), groups, *step);
        let nb = yb - &gb * *step;
        let dw = &nw - yw;
        let db = &nb - yb;
        let model_gap = gw.dot(&dw) + gb.dot(&db) + (dw.norm_squared() + db.norm_squared()) / (2.0 * *step);
        let f_new = loss(&nw, &nb, x, t);
        if f_new <= f_y + model_gap + 1e-12 * f_y.abs().max(1.0) {
            return Ok((nw, nb));
        }
        *step *= 0.5;
    }
    Err(Error::Numerical("step size underflow in proximal gradient".into()))
}

/// Full-batch proximal gradient on the penalized logistic loss with early
/// stopping on the validation metric. Each epoch is one accepted step; the
/// penalized objective on the epoch's batch never increases.
pub fn train(problem: &mut dyn TrainingProblem, groups: &[Range<usize>], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let (f, k) = (problem.num_features(), problem.num_outputs());
    let pen = SglPenalty {
        wd1: cfg.wd1,
        wd2: cfg.wd2,
    };
    let mut w = DMatrix::zeros(f, k);
    let mut b = DVector::zeros(k);
    let (mut prev_w, mut prev_b) = (w.clone(), b.clone());
    let mut momentum = 1.0f64;
    let mut step = cfg.lr;
    let (m0, l0) = problem.validate(&w, &b)?;
    let mut best = (w.clone(), b.clone(), 0usize, m0, l0);
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut since_best = 0;

    for epoch in 1..=cfg.epochs {
        if epoch == 1 || cfg.negative_resampling {
            problem.next_batch(epoch)?;
        }
        let (x, t) = problem.batch();
        let before = objective(&w, &b, x, t, &pen, groups);
        if !before.is_finite() {
            return Err(Error::Numerical(format!("objective diverged at epoch {epoch}")));
        }
        let mut after = before;
        for _ in 0..cfg.inner_steps {
            step *= 2.0;
            let mut candidate = None;
            if cfg.accelerate {
                let next_m = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
                let beta = (momentum - 1.0) / next_m;
                if beta > 0.0 {
                    let yw = &w + (&w - &prev_w) * beta;
                    let yb = &b + (&b - &prev_b) * beta;
                    let (nw, nb) = prox_step(&yw, &yb, x, t, &pen, groups, &mut step)?;
                    let obj = objective(&nw, &nb, x, t, &pen, groups);
                    if obj <= after {
                        candidate = Some((nw, nb, obj));
                    }
                }
                momentum = if candidate.is_some() || beta == 0.0 { next_m } else { 1.0 };
            }
            let (nw, nb, obj) = match candidate {
                Some(c) => c,
                None => {
                    let (nw, nb) = prox_step(&w, &b, x, t, &pen, groups, &mut step)?;
                    let obj = objective(&nw, &nb, x, t, &pen, groups);
                    (nw, nb, obj)
                }
            };
            prev_w = std::mem::replace(&mut w, nw);
            prev_b = std::mem::replace(&mut b, nb);
            let gain = after - obj;
            after = obj;
            if gain <= cfg.inner_tol * after.abs().max(1e-12) {
                break;
            }
        }
        let (metric, vloss) = problem.validate(&w, &b)?;
        history.push(EpochLog {
            objective_before: before,
            objective_after: after,
            step,
            valid_metric: metric,
            valid_loss: vloss,
        });
        if metric > best.3 || (metric == best.3 && vloss < best.4) {
            best = (w.clone(), b.clone(), epoch, metric, vloss);
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= cfg.patience {
                break;
            }
        }
    }
    Ok(TrainOutcome {
        weights: best.0,
        bias: best.1,
        best_epoch: best.2,
        best_metric: best.3,
        best_loss: best.4,
        history,
    })
}

/// A fixed training set with a fixed validation set.
pub struct FixedProblem<'a> {
    pub x: &'a DMatrix<f64>,
    pub targets: &'a Targets,
    pub valid_x: &'a DMatrix<f64>,
    pub valid_targets: &'a Targets,
    /// Maps validation logits to a metric; defaults to accuracy when absent.
    pub metric: Option<&'a dyn Fn(&DMatrix<f64>) -> f64>,
}

impl TrainingProblem for FixedProblem<'_> {
    fn num_features(&self) -> usize {
        self.x.ncols()
    }

    fn num_outputs(&self) -> usize {
        self.targets.outputs()
    }

    fn next_batch(&mut self, _epoch: usize) -> Result<()> {
        Ok(())
    }

    fn batch(&self) -> (&DMatrix<f64>, &Targets) {
        (self.x, self.targets)
    }

    fn validate(&self, w: &DMatrix<f64>, b: &DVector<f64>) -> Result<(f64, f64)> {
        let z = logits(w, b, self.valid_x);
        let (vloss, _) = loss_and_residual(&z, self.valid_targets);
        let metric = match self.metric {
            Some(m) => m(&z),
            None => classification_accuracy(&z, self.valid_targets),
        };
        Ok((metric, vloss))
    }
}

pub fn classification_accuracy(z: &DMatrix<f64>, targets: &Targets) -> f64 {
    let n = z.nrows().max(1) as f64;
    match targets {
        Targets::Binary(y) => {
            let hits = (0..z.nrows())
                .filter(|&i| (z[(i, 0)] > 0.0) == (y[i] > 0.5))
                .count();
            hits as f64 / n
        }
        Targets::Classes { labels, .. } => {
            let pred = argmax_rows(z);
            pred.iter().zip(labels).filter(|(a, b)| a == b).count() as f64 / n
        }
    }
}
