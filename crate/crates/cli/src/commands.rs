use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use netinfof_core::act::{self, ActConfig, ActResult};
use netinfof_core::compat::CompatConfig;
use netinfof_core::embed::EmbedConfig;
use netinfof_core::rng::derive_seed;
use netinfof_core::scaling::{self, ScalingConfig};
use netinfof_core::score::{self, ProbeNcConfig, ScoreReport};
use netinfof_core::synth::{self, SuiteTask};
use netinfof_core::{graph, io, Component, SparseGraph};
use serde::Serialize;
use serde_json::json;

use crate::cache::{self, Cache};
use crate::config::{Command, RunConfig};
use crate::CliError;

struct Inputs {
    graph: SparseGraph,
    features: DMatrix<f64>,
    labels: Option<Vec<usize>>,
    hashes: BTreeMap<&'static str, serde_json::Value>,
}

fn load_inputs(cfg: &RunConfig) -> Result<Inputs, CliError> {
    let graph_path = cfg.graph.as_ref().expect("checked by config");
    let features_path = cfg.features.as_ref().expect("checked by config");
    let (edges, edge_nodes) = io::read_edge_list(graph_path)?;
    let features = io::read_dense(features_path)?;
    let labels = match &cfg.labels {
        Some(p) if cfg.command == Command::ProbeNc || cfg.command == Command::ActNc => Some(io::read_labels(p)?),
        _ => None,
    };
    let n = edge_nodes
        .max(features.nrows())
        .max(labels.as_ref().map_or(0, Vec::len));
    if features.nrows() != n {
        return Err(CliError::Config(format!(
            "{}: {} feature rows for {n} nodes",
            features_path.display(),
            features.nrows()
        )));
    }
    if let (Some(l), Some(p)) = (&labels, &cfg.labels) {
        if l.len() != n {
            return Err(CliError::Config(format!("{}: {} labels for {n} nodes", p.display(), l.len())));
        }
    }
    let mut hashes = BTreeMap::new();
    for (name, path) in [("graph", Some(graph_path)), ("features", Some(features_path)), ("labels", cfg.labels.as_ref())] {
        if let Some(p) = path {
            hashes.insert(name, json!({ "path": p, "sha256": cache::file_sha256(p)? }));
        }
    }
    let graph = SparseGraph::from_edges(&edges, n)?;
    log::info!("loaded {n} nodes, {} edges, {} features", graph.num_edges(), features.ncols());
    Ok(Inputs {
        graph,
        features,
        labels,
        hashes,
    })
}

fn embed_config(cfg: &RunConfig) -> EmbedConfig {
    EmbedConfig {
        dim: cfg.dim,
        walk_trials: cfg.walk_trials,
        seed: cfg.seed,
        ..EmbedConfig::default()
    }
}

fn compat_config(cfg: &RunConfig) -> CompatConfig {
    CompatConfig {
        sample_size: cfg.sample_size,
        ..CompatConfig::default()
    }
}

fn act_config(cfg: &RunConfig, seed: u64) -> ActConfig {
    let base = if cfg.command.is_link_prediction() {
        ActConfig::default()
    } else {
        ActConfig::node_classification()
    };
    ActConfig {
        grid_wd1: cfg.wd1.clone(),
        grid_wd2: cfg.wd2.clone(),
        hits_k: cfg.hits_k,
        seed,
        ..base
    }
}

pub fn split_seeds(cfg: &RunConfig) -> Vec<u64> {
    (0..cfg.splits).map(|s| derive_seed(cfg.seed, &format!("split-{s}"))).collect()
}

fn mkdir(p: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
}

fn write_text(p: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(p, text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
}

fn write_manifest(cfg: &RunConfig, extra: serde_json::Value) -> Result<(), CliError> {
    let mut m = json!({
        "tool": "netinfof",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
    });
    if let (Some(obj), serde_json::Value::Object(more)) = (m.as_object_mut(), extra) {
        obj.extend(more);
    }
    io::write_json(&cfg.out.join("manifest.json"), &m)?;
    Ok(())
}

fn timings_csv(per_split: &[BTreeMap<String, f64>]) -> String {
    let mut out = String::from("split,phase,seconds\n");
    for (s, t) in per_split.iter().enumerate() {
        for (phase, secs) in t {
            writeln!(out, "{s},{phase},{secs:.6}").unwrap();
        }
    }
    out
}

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    mkdir(&cfg.out)?;
    match cfg.command {
        Command::ProbeLp | Command::ProbeNc => probe(cfg),
        Command::ActLp | Command::ActNc => act(cfg),
        Command::SynthGen => synth_gen(cfg),
        Command::BenchScaling => bench_scaling(cfg),
    }
}

/// One split's work; link prediction re-embeds on each training graph.
enum Split {
    Edges(graph::EdgeSplit),
    Nodes(graph::NodeSplit),
}

fn make_split(cfg: &RunConfig, g: &SparseGraph, seed: u64) -> Result<Split, CliError> {
    Ok(if cfg.command.is_link_prediction() {
        Split::Edges(graph::split_edges(g, cfg.split_ratios, seed)?)
    } else {
        Split::Nodes(graph::split_nodes(g.num_nodes(), cfg.split_ratios, seed)?)
    })
}

fn common_manifest(cfg: &RunConfig, inputs: &Inputs) -> serde_json::Value {
    json!({
        "inputs": inputs.hashes,
        "num_nodes": inputs.graph.num_nodes(),
        "num_edges": inputs.graph.num_edges(),
        "split_seeds": split_seeds(cfg),
        "embed": embed_config(cfg),
        "compat": compat_config(cfg),
    })
}

fn probe(cfg: &RunConfig) -> Result<(), CliError> {
    let inputs = load_inputs(cfg)?;
    write_manifest(cfg, common_manifest(cfg, &inputs))?;
    let cache = Cache::new(&cfg.out, cfg.cache);
    let embed_cfg = embed_config(cfg);
    let splits_dir = cfg.out.join("splits");
    mkdir(&splits_dir)?;

    // Node classification embeds the full graph once.
    let full = match cfg.command {
        Command::ProbeNc => Some(cache.embeddings(&inputs.graph, &inputs.features, &embed_cfg)?),
        _ => None,
    };
    let mut reports: Vec<ScoreReport> = Vec::new();
    for (s, seed) in split_seeds(cfg).into_iter().enumerate() {
        let report = match make_split(cfg, &inputs.graph, seed)? {
            Split::Edges(split) => {
                let g = act::train_graph(&split, inputs.graph.num_nodes())?;
                let emb = cache.embeddings(&g, &inputs.features, &embed_cfg)?;
                let fits = score::fit_components(&emb, &split.train_pos, &compat_config(cfg), seed)?;
                score::probe_link_prediction_with(&emb, &fits, &split, cfg.bins, seed)?
            }
            Split::Nodes(split) => {
                let nc = ProbeNcConfig {
                    k_clusters: cfg.clusters,
                    seed,
                    ..ProbeNcConfig::default()
                };
                let labels = inputs.labels.as_ref().expect("checked by config");
                score::probe_node_classification(full.as_ref().expect("embedded above"), labels, &split, &nc)?
            }
        };
        io::write_json(&splits_dir.join(format!("split-{s}.json")), &report)?;
        log::info!(
            "split {s}: {}",
            Component::ALL
                .iter()
                .map(|&c| format!("{c}={:.1}", 100.0 * report.score(c)))
                .collect::<Vec<_>>()
                .join(" ")
        );
        reports.push(report);
    }

    let mut summary = BTreeMap::new();
    for c in Component::ALL {
        let scores: Vec<f64> = reports.iter().map(|r| r.score(c)).collect();
        let bounds: Vec<f64> = reports.iter().map(|r| r.components[&c].accuracy_bound).collect();
        let (m, sd) = act::mean_std(&scores);
        let (bm, bsd) = act::mean_std(&bounds);
        summary.insert(c, ProbeSummary {
            score_mean: m,
            score_std: sd,
            bound_mean: bm,
            bound_std: bsd,
        });
    }
    let mut ranking: Vec<Component> = Component::ALL.to_vec();
    ranking.sort_by(|a, b| summary[b].score_mean.total_cmp(&summary[a].score_mean));
    io::write_json(
        &cfg.out.join("score_report.json"),
        &json!({ "task": cfg.command, "summary": summary, "ranking": ranking, "splits": reports }),
    )?;
    let timings: Vec<_> = reports.iter().map(|r| r.timings.clone()).collect();
    write_text(&cfg.out.join("timings.csv"), &timings_csv(&timings))?;

    let mut text = format!("{} over {} split(s), scores on a 0-100 scale\n\n", cfg.command.name(), reports.len());
    writeln!(text, "{:<10}{:>16}{:>18}", "component", "score", "accuracy bound").unwrap();
    for c in &ranking {
        let s = &summary[c];
        writeln!(
            text,
            "{:<10}{:>16}{:>18}",
            c.to_string(),
            pm(s.score_mean, s.score_std),
            pm(s.bound_mean, s.bound_std)
        )
        .unwrap();
    }
    write_text(&cfg.out.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(())
}

#[derive(Serialize)]
struct ProbeSummary {
    score_mean: f64,
    score_std: f64,
    bound_mean: f64,
    bound_std: f64,
}

fn pm(mean: f64, std: f64) -> String {
    format!("{:.1} ± {:.1}", 100.0 * mean, 100.0 * std)
}

fn act(cfg: &RunConfig) -> Result<(), CliError> {
    let inputs = load_inputs(cfg)?;
    let mut manifest = common_manifest(cfg, &inputs);
    manifest["act"] = serde_json::to_value(act_config(cfg, cfg.seed))?;
    write_manifest(cfg, manifest)?;
    let cache = Cache::new(&cfg.out, cfg.cache);
    let embed_cfg = embed_config(cfg);
    let splits_dir = cfg.out.join("splits");
    mkdir(&splits_dir)?;

    let full = match cfg.command {
        Command::ActNc => Some(cache.embeddings(&inputs.graph, &inputs.features, &embed_cfg)?),
        _ => None,
    };
    let mut results: Vec<ActResult> = Vec::new();
    for (s, seed) in split_seeds(cfg).into_iter().enumerate() {
        let acfg = act_config(cfg, seed);
        let result = match make_split(cfg, &inputs.graph, seed)? {
            Split::Edges(split) => {
                let start = std::time::Instant::now();
                let g = act::train_graph(&split, inputs.graph.num_nodes())?;
                let emb = cache.embeddings(&g, &inputs.features, &embed_cfg)?;
                let embed_secs = start.elapsed().as_secs_f64();
                let start = std::time::Instant::now();
                let fits = score::fit_components(&emb, &split.train_pos, &compat_config(cfg), seed)?;
                let compat_secs = start.elapsed().as_secs_f64();
                let mut r = act::act_link_prediction_with(&emb, &fits, &split, &acfg)?;
                r.timings.insert("embed".into(), embed_secs);
                r.timings.insert("compat".into(), compat_secs);
                r
            }
            Split::Nodes(split) => {
                let labels = inputs.labels.as_ref().expect("checked by config");
                act::act_node_classification(full.as_ref().expect("embedded above"), labels, &split, &acfg)?
            }
        };
        io::write_json(&splits_dir.join(format!("split-{s}.json")), &result)?;
        if let Some(model) = &result.model {
            io::write_dense(&splits_dir.join(format!("weights-{s}.bin")), &model.weights)?;
        }
        log::info!(
            "split {s}: {} valid {:.1} test {:.1} (wd1 {:e}, wd2 {:e}, epoch {})",
            result.metric,
            100.0 * result.valid,
            100.0 * result.test,
            result.wd1,
            result.wd2,
            result.best_epoch
        );
        results.push(result);
    }

    let test: Vec<f64> = results.iter().map(|r| r.test).collect();
    let valid: Vec<f64> = results.iter().map(|r| r.valid).collect();
    let (tm, tsd) = act::mean_std(&test);
    let (vm, vsd) = act::mean_std(&valid);
    let metric = results[0].metric.clone();
    io::write_json(
        &cfg.out.join("metrics.json"),
        &json!({
            "task": cfg.command,
            "metric": metric,
            "test_mean": tm,
            "test_std": tsd,
            "valid_mean": vm,
            "valid_std": vsd,
            "splits": results,
        }),
    )?;
    let timings: Vec<_> = results.iter().map(|r| r.timings.clone()).collect();
    write_text(&cfg.out.join("timings.csv"), &timings_csv(&timings))?;

    let mut text = format!("{} over {} split(s), {metric} on a 0-100 scale\n\n", cfg.command.name(), results.len());
    writeln!(text, "valid  {}", pm(vm, vsd)).unwrap();
    writeln!(text, "test   {}", pm(tm, tsd)).unwrap();
    writeln!(text, "\n{:<6}{:>10}{:>10}{:>8}{:>8}", "split", "wd1", "wd2", "epoch", "test").unwrap();
    for (s, r) in results.iter().enumerate() {
        writeln!(text, "{s:<6}{:>10.0e}{:>10.0e}{:>8}{:>8.1}", r.wd1, r.wd2, r.best_epoch, 100.0 * r.test).unwrap();
    }
    write_text(&cfg.out.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn synth_gen(cfg: &RunConfig) -> Result<(), CliError> {
    let task = match cfg.suite.as_deref() {
        Some("lp") => SuiteTask::Lp,
        _ => SuiteTask::Nc,
    };
    let specs = synth::scenario_suite(task, cfg.seed);
    let mut written: Vec<PathBuf> = Vec::new();
    let mut text = String::new();
    for spec in &specs {
        let data = synth::generate(spec)?;
        let dir = cfg.out.join(&spec.name);
        mkdir(&dir)?;
        io::write_edge_list(&dir.join("graph.tsv"), &data.graph.edges())?;
        io::write_dense(&dir.join("features.bin"), &data.features)?;
        io::write_labels(&dir.join("labels.txt"), &data.labels)?;
        let homophily = synth::homophily_ratio(&data.graph, &data.labels);
        io::write_json(
            &dir.join("manifest.json"),
            &json!({
                "spec": spec,
                "num_nodes": data.graph.num_nodes(),
                "num_edges": data.graph.num_edges(),
                "num_features": data.features.ncols(),
                "homophily": homophily,
            }),
        )?;
        writeln!(
            text,
            "{:<28} {:>6} nodes {:>8} edges  homophily {:.3}",
            spec.name,
            data.graph.num_nodes(),
            data.graph.num_edges(),
            homophily
        )
        .unwrap();
        written.push(dir);
    }
    write_manifest(cfg, json!({ "scenarios": written }))?;
    print!("{text}");
    Ok(())
}

fn bench_scaling(cfg: &RunConfig) -> Result<(), CliError> {
    let mut sc = ScalingConfig::default();
    sc.base.num_nodes = cfg.base_nodes;
    sc.base.seed = cfg.seed;
    sc.factors = cfg.factors.clone();
    sc.embed.dim = cfg.dim;
    sc.embed.walk_trials = cfg.walk_trials;
    sc.embed.seed = cfg.seed;
    sc.compat.sample_size = cfg.sample_size;
    sc.act.seed = cfg.seed;
    write_manifest(cfg, json!({ "scaling": sc }))?;

    let rows = scaling::bench_scaling(&sc)?;
    let r2 = scaling::total_time_r2(&rows);
    let exponents = scaling::phase_exponents(&rows);
    write_text(&cfg.out.join("scaling.csv"), &scaling::to_csv(&rows))?;
    io::write_json(
        &cfg.out.join("scaling.json"),
        &json!({ "rows": rows, "total_time_r2": r2, "phase_exponents": exponents }),
    )?;
    let mut text = format!("{:>8}{:>10}{:>12}\n", "factor", "edges", "seconds");
    for r in &rows {
        writeln!(text, "{:>8}{:>10}{:>12.3}", r.factor, r.num_edges, r.total).unwrap();
    }
    writeln!(text, "\nR² of total time vs |E|: {r2:.4}").unwrap();
    for (phase, b) in &exponents {
        writeln!(text, "growth exponent {phase:<10}{b:.2}").unwrap();
    }
    write_text(&cfg.out.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(())
}
