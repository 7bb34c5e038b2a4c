//! Wall-clock scaling of the link-prediction pipeline with graph size.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::act::{self, ActConfig};
use crate::compat::CompatConfig;
use crate::embed::EmbedConfig;
use crate::error::{Error, Result};
use crate::graph;
use crate::synth::{self, LpFeatures, Structure, SynthSpec};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingConfig {
    /// Generator settings at factor 1; node count is multiplied by each factor at fixed
    /// average degree, so the edge count scales with it.
    pub base: SynthSpec,
    pub factors: Vec<usize>,
    pub embed: EmbedConfig,
    pub compat: CompatConfig,
    pub act: ActConfig,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        let mut base = SynthSpec::lp(Structure::Diagonal, LpFeatures::Random, 0);
        base.num_nodes = 1000;
        let mut act = ActConfig {
            grid_wd1: vec![1e-4],
            grid_wd2: vec![1e-4],
            ..ActConfig::default()
        };
        // Fixed work per epoch count: early stopping would make training time
        // depend on where validation happens to peak.
        act.train.epochs = 20;
        act.train.patience = 20;
        Self {
            base,
            factors: vec![1, 2, 4, 8],
            embed: EmbedConfig {
                walk_trials: 200,
                ..EmbedConfig::default()
            },
            compat: CompatConfig::default(),
            act,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub factor: usize,
    pub num_nodes: usize,
    pub num_edges: usize,
    /// Seconds per phase of the act pipeline (embed, compat, features,
    /// train, eval); generation is excluded.
    pub phases: BTreeMap<String, f64>,
    pub total: f64,
    pub test_hits: f64,
}

pub fn bench_scaling(cfg: &ScalingConfig) -> Result<Vec<ScalingRow>> {
    if cfg.factors.is_empty() || cfg.factors.contains(&0) {
        return Err(Error::input("scaling factors must be positive"));
    }
    let mut rows = Vec::new();
    for &factor in &cfg.factors {
        let spec = SynthSpec {
            num_nodes: cfg.base.num_nodes * factor,
            name: format!("{}-x{factor}", cfg.base.name),
            ..cfg.base.clone()
        };
        let data = synth::generate(&spec)?;
        let split = graph::split_edges(&data.graph, (0.7, 0.1, 0.2), cfg.act.seed)?;
        let start = Instant::now();
        let r = act::act_link_prediction(&data.features, &split, &cfg.embed, &cfg.compat, &cfg.act)?;
        let total = start.elapsed().as_secs_f64();
        log::info!("scaling x{factor}: {} edges in {total:.2}s", data.graph.num_edges());
        rows.push(ScalingRow {
            factor,
            num_nodes: spec.num_nodes,
            num_edges: data.graph.num_edges(),
            phases: r.timings,
            total,
            test_hits: r.test,
        });
    }
    Ok(rows)
}

/// Least-squares line `y = slope·x + intercept` and its R².
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    (slope, intercept, r2)
}

/// R² of total time against edge count.
pub fn total_time_r2(rows: &[ScalingRow]) -> f64 {
    let xs: Vec<f64> = rows.iter().map(|r| r.num_edges as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.total).collect();
    linear_fit(&xs, &ys).2
}

/// Per-phase exponent `b` of a log-log fit `t ∝ |E|^b`; 1.0 is linear and
/// 1.2 is 20% steeper than linear.
pub fn phase_exponents(rows: &[ScalingRow]) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    let Some(first) = rows.first() else {
        return out;
    };
    for phase in first.phases.keys() {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| r.phases.get(phase).map(|&t| ((r.num_edges as f64).ln(), t.max(1e-9).ln())))
            .collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        out.insert(phase.clone(), linear_fit(&xs, &ys).0);
    }
    out
}

pub fn to_csv(rows: &[ScalingRow]) -> String {
    let phases: Vec<&String> = rows.first().map(|r| r.phases.keys().collect()).unwrap_or_default();
    let mut out = String::from("factor,num_nodes,num_edges");
    for p in &phases {
        write!(out, ",{p}_s").unwrap();
    }
    out.push_str(",total_s,test_hits\n");
    for r in rows {
        write!(out, "{},{},{}", r.factor, r.num_nodes, r.num_edges).unwrap();
        for p in &phases {
            write!(out, ",{:.6}", r.phases.get(*p).copied().unwrap_or(f64::NAN)).unwrap();
        }
        writeln!(out, ",{:.6},{:.6}", r.total, r.test_hits).unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_has_unit_r2() {
        let (s, b, r2) = linear_fit(&[1.0, 2.0, 4.0, 8.0], &[3.0, 5.0, 9.0, 17.0]);
        assert!((s - 2.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn r2_matches_hand_computation() {
        // x = 0,1,2; y = 0,2,1: sxy = 1, sxx = 2, syy = 2 -> R² = 1/4.
        let (_, _, r2) = linear_fit(&[0.0, 1.0, 2.0], &[0.0, 2.0, 1.0]);
        assert!((r2 - 0.25).abs() < 1e-12);
    }

    fn row(factor: usize, edges: usize, t: f64) -> ScalingRow {
        ScalingRow {
            factor,
            num_nodes: 10 * factor,
            num_edges: edges,
            phases: BTreeMap::from([("train".to_string(), t)]),
            total: t,
            test_hits: 0.5,
        }
    }

    #[test]
    fn growth_and_csv() {
        let t = |e: f64| (e / 100.0).powf(1.2);
        let rows = vec![row(1, 100, t(100.0)), row(2, 200, t(200.0)), row(4, 400, t(400.0))];
        assert!((phase_exponents(&rows)["train"] - 1.2).abs() < 1e-9);
        let csv = to_csv(&rows);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("factor,num_nodes,num_edges,train_s,total_s,test_hits"));
    }

    #[test]
    fn small_run_produces_one_row_per_factor() {
        let mut cfg = ScalingConfig::default();
        cfg.base.num_nodes = 200;
        cfg.base.num_features = 40;
        cfg.factors = vec![1, 2, 4];
        cfg.embed.dim = 8;
        cfg.embed.walk_trials = 20;
        cfg.act.train.epochs = 3;
        cfg.act.train.patience = 3;
        let rows = bench_scaling(&cfg).unwrap();
        assert_eq!(rows.iter().map(|r| r.factor).collect::<Vec<_>>(), vec![1, 2, 4]);
        assert!(rows.windows(2).all(|w| w[0].num_edges < w[1].num_edges));
        assert!(rows.iter().all(|r| r.phases.contains_key("embed") && r.phases.contains_key("train")));
    }
}
