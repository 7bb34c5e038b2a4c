//! Run one synthetic scenario end to end and print probe scores and
//! per-component / combined test metrics.
//!
//! `cargo run --release -p netinfof-core --example scenario -- lp global off-diagonal [seed]`

use std::time::Instant;

use netinfof_core::act::{self, ActConfig, CompatMode};
use netinfof_core::compat::CompatConfig;
use netinfof_core::embed::{self, Component, EmbedConfig};
use netinfof_core::graph;
use netinfof_core::score::{self, ProbeNcConfig};
use netinfof_core::synth::{self, LpFeatures, NcFeatures, Structure, SynthSpec};

fn structure(s: &str) -> Structure {
    match s {
        "diagonal" | "homophily" => Structure::Diagonal,
        "off-diagonal" | "heterophily" => Structure::OffDiagonal,
        _ => Structure::Uniform,
    }
}

fn env_f64(key: &str) -> Option<f64> {
    std::env::var(key).ok().and_then(|v| v.parse().ok())
}

fn main() -> netinfof_core::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let task = args.first().map(String::as_str).unwrap_or("lp");
    let feat = args.get(1).map(String::as_str).unwrap_or("global");
    let st = structure(args.get(2).map(String::as_str).unwrap_or("diagonal"));
    let seed: u64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0);

    let mut spec = if task == "lp" {
        let f = match feat {
            "random" => LpFeatures::Random,
            "local" => LpFeatures::Local,
            _ => LpFeatures::Global,
        };
        SynthSpec::lp(st, f, seed)
    } else {
        let f = if feat == "random" { NcFeatures::Random } else { NcFeatures::Useful };
        SynthSpec::nc(st, f, seed)
    };
    if let Some(v) = env_f64("DENSITY") {
        spec.target_density = v;
    }
    if let Some(v) = env_f64("NOISE") {
        spec.noise_rate = v;
    }
    if let Some(v) = env_f64("FNOISE") {
        spec.feature_noise = v;
    }
    let t = Instant::now();
    let data = synth::generate(&spec)?;
    println!("{} generated in {:.1}s, {} edges", spec.name, t.elapsed().as_secs_f64(), data.graph.num_edges());
    let embed_cfg = EmbedConfig { seed, ..Default::default() };
    let base = if task == "lp" { ActConfig::default() } else { ActConfig::node_classification() };
    let mut act_cfg = ActConfig { seed, ..base };
    if let Some(v) = env_f64("INNER") {
        act_cfg.train.inner_steps = v as usize;
    }
    if let Some(p) = env_f64("PATIENCE") {
        act_cfg.train.patience = p as usize;
    }
    if let Some(lr) = env_f64("LR") {
        act_cfg.train.lr = lr;
    }
    if std::env::var("NOACCEL").is_ok() {
        act_cfg.train.accelerate = false;
    }

    if task == "lp" {
        let split = graph::split_edges(&data.graph, (0.7, 0.1, 0.2), seed)?;
        let t = Instant::now();
        let g = act::train_graph(&split, spec.num_nodes)?;
        let emb = embed::compute_embeddings(&g, &data.features, &embed_cfg)?;
        println!("embed {:.1}s", t.elapsed().as_secs_f64());
        let t = Instant::now();
        let fits = score::fit_components(&emb, &split.train_pos, &CompatConfig::default(), seed)?;
        println!("compat {:.1}s", t.elapsed().as_secs_f64());
        for c in Component::ALL {
            let f = &fits[&c];
            println!(
                "  {c}: mask {:.3} energy {:.3} iters {} converged {}",
                f.h_star.mask.density(),
                f.h.energy_kept,
                f.h_star.iterations,
                f.h_star.converged
            );
        }
        let report = score::probe_link_prediction_with(&emb, &fits, &split, 32, seed)?;
        for c in Component::ALL {
            let s = &report.components[&c];
            print!("{c} probe {:.1} (acc {:.1})  ", 100.0 * s.score, 100.0 * s.accuracy_bound);
            if std::env::var("SKIP_SINGLE").is_ok() && c != Component::F {
                println!();
                continue;
            }
            let single = ActConfig { components: vec![c], ..act_cfg.clone() };
            let t = Instant::now();
            let r = act::act_link_prediction_with(&emb, &fits, &split, &single)?;
            println!("test {:.1} valid {:.1} epoch {} ({:.1}s)", 100.0 * r.test, 100.0 * r.valid, r.best_epoch, t.elapsed().as_secs_f64());
        }
        let modes: &[CompatMode] = if std::env::var("SKIP_ALL").is_ok() {
            &[]
        } else {
            &[CompatMode::HStar, CompatMode::PlainH, CompatMode::None]
        };
        for &mode in modes {
            let t = Instant::now();
            let r = act::act_link_prediction_with(&emb, &fits, &split, &ActConfig { compat_mode: mode, ..act_cfg.clone() })?;
            println!(
                "ALL {mode:?}: test {:.1} valid {:.1} wd=({}, {}) epoch {} ({:.1}s) norms {:?}",
                100.0 * r.test,
                100.0 * r.valid,
                r.wd1,
                r.wd2,
                r.best_epoch,
                t.elapsed().as_secs_f64(),
                r.group_norms.values().map(|v| format!("{v:.2}")).collect::<Vec<_>>()
            );
        }
    } else {
        let t = Instant::now();
        let emb = embed::compute_embeddings(&data.graph, &data.features, &embed_cfg)?;
        println!("embed {:.1}s", t.elapsed().as_secs_f64());
        let splits = env_f64("SPLITS").map_or(1, |v| v as u64);
        let mut probe = [0.0; 5];
        let mut test = [0.0; 5];
        let mut all = 0.0;
        for k in 0..splits {
            let split = graph::split_nodes(spec.num_nodes, (0.025, 0.025, 0.95), seed + k)?;
            let report = score::probe_node_classification(
                &emb,
                &data.labels,
                &split,
                &ProbeNcConfig { seed: seed + k, ..Default::default() },
            )?;
            for (i, c) in Component::ALL.into_iter().enumerate() {
                let single = ActConfig { components: vec![c], seed: seed + k, ..act_cfg.clone() };
                let r = act::act_node_classification(&emb, &data.labels, &split, &single)?;
                probe[i] += report.components[&c].score / splits as f64;
                test[i] += r.test / splits as f64;
            }
            let r = act::act_node_classification(&emb, &data.labels, &split, &ActConfig { seed: seed + k, ..act_cfg.clone() })?;
            all += r.test / splits as f64;
        }
        for (i, c) in Component::ALL.into_iter().enumerate() {
            println!("{c} probe {:.1} test {:.1}", 100.0 * probe[i], 100.0 * test[i]);
        }
        println!("ALL: test {:.1}", 100.0 * all);
    }
    Ok(())
}

