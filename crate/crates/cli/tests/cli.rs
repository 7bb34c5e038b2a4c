use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use netinfof_core::io;
use netinfof_core::synth::{self, LpFeatures, NcFeatures, Structure, SynthSpec};
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_netinfof"));
    c.env("RUST_LOG", "warn");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = run(args);
    assert!(
        out.status.success(),
        "netinfof {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

struct Data {
    graph: PathBuf,
    features: PathBuf,
    labels: PathBuf,
}

fn write_small(dir: &Path, mut spec: SynthSpec) -> Data {
    spec.num_nodes = 240;
    spec.num_features = 40;
    spec.walk_trials = 50;
    let d = synth::generate(&spec).unwrap();
    let data = Data {
        graph: dir.join("graph.tsv"),
        features: dir.join("features.csv"),
        labels: dir.join("labels.txt"),
    };
    io::write_edge_list(&data.graph, &d.graph.edges()).unwrap();
    let csv: String = d
        .features
        .row_iter()
        .map(|r| r.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",") + "\n")
        .collect();
    std::fs::write(&data.features, csv).unwrap();
    io::write_labels(&data.labels, &d.labels).unwrap();
    data
}

fn lp_data(dir: &Path) -> Data {
    write_small(dir, SynthSpec::lp(Structure::Diagonal, LpFeatures::Global, 3))
}

fn nc_data(dir: &Path) -> Data {
    write_small(dir, SynthSpec::nc(Structure::Diagonal, NcFeatures::Useful, 3))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SMALL: &[&str] = &[
    "--dim",
    "8",
    "--walk-trials",
    "30",
    "--sample-size",
    "2000",
    "--splits",
    "2",
    "--wd1",
    "1e-4",
    "--wd2",
    "1e-4",
];

fn read(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn cache_entries(out: &Path) -> usize {
    std::fs::read_dir(out.join("cache"))
        .map(|it| it.filter(|e| !e.as_ref().unwrap().file_name().to_string_lossy().starts_with('.')).count())
        .unwrap_or(0)
}

#[test]
fn act_lp_is_deterministic_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let d = lp_data(tmp.path());
    let mut results = Vec::new();
    for name in ["a", "b"] {
        let out = tmp.path().join(name);
        let mut args = vec!["act-lp", "--graph", s(&d.graph), "--features", s(&d.features), "--out", s(&out), "--no-cache"];
        args.extend_from_slice(SMALL);
        ok(&args);
        let m = read(&out.join("metrics.json"));
        let splits: Vec<(Value, Value, Value)> = m["splits"]
            .as_array()
            .unwrap()
            .iter()
            .map(|r| (r["valid"].clone(), r["test"].clone(), r["best_epoch"].clone()))
            .collect();
        assert_eq!(splits.len(), 2);
        results.push((splits, std::fs::read(out.join("splits/weights-0.bin")).unwrap()));
        assert!(out.join("summary.txt").exists() && out.join("timings.csv").exists());
        assert_eq!(cache_entries(&out), 0);
    }
    assert_eq!(results[0], results[1]);
}

#[test]
fn probe_nc_reports_every_component() {
    let tmp = tempfile::tempdir().unwrap();
    let d = nc_data(tmp.path());
    let out = tmp.path().join("out");
    let mut args = vec![
        "probe-nc", "--graph", s(&d.graph), "--features", s(&d.features), "--labels", s(&d.labels), "--out", s(&out),
    ];
    args.extend_from_slice(SMALL);
    let o = ok(&args);
    assert!(String::from_utf8_lossy(&o.stdout).contains("accuracy bound"));
    let r = read(&out.join("score_report.json"));
    assert_eq!(r["ranking"].as_array().unwrap().len(), 5);
    for c in ["U", "R", "F", "P", "S"] {
        let score = r["summary"][c]["score_mean"].as_f64().unwrap();
        let bound = r["summary"][c]["bound_mean"].as_f64().unwrap();
        assert!(score > 0.0 && score <= bound + 1e-12, "{c}: {score} vs {bound}");
    }
    assert!(out.join("splits/split-1.json").exists());
    let m = read(&out.join("manifest.json"));
    assert_eq!(m["split_seeds"].as_array().unwrap().len(), 2);
    assert_eq!(m["inputs"]["labels"]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn act_nc_trains_a_classifier() {
    let tmp = tempfile::tempdir().unwrap();
    let d = nc_data(tmp.path());
    let out = tmp.path().join("out");
    let mut args = vec![
        "act-nc", "--graph", s(&d.graph), "--features", s(&d.features), "--labels", s(&d.labels), "--out", s(&out),
        "--split-ratios", "0.2,0.2,0.6",
    ];
    args.extend_from_slice(SMALL);
    ok(&args);
    let m = read(&out.join("metrics.json"));
    assert_eq!(m["metric"], "accuracy");
    // Four balanced classes: a working model beats the 25% chance rate.
    assert!(m["test_mean"].as_f64().unwrap() > 0.4);
}

#[test]
fn errors_exit_nonzero_with_one_line() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = run(&["probe-lp", "--graph", "/no/such/graph.tsv", "--features", "/no/such.csv"]);
    assert_eq!(missing.status.code(), Some(2));
    let err = String::from_utf8_lossy(&missing.stderr);
    assert_eq!(err.trim().lines().count(), 1, "{err}");
    assert!(err.contains("graph.tsv"));

    let d = lp_data(tmp.path());
    let bad = tmp.path().join("bad.tsv");
    std::fs::write(&bad, "0\t1\n1\tzwei\n").unwrap();
    let out = tmp.path().join("out");
    let o = run(&["probe-lp", "--graph", s(&bad), "--features", s(&d.features), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(":2:"), "{err}");

    let o = run(&["synth-gen", "--suite", "xl", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let d = lp_data(tmp.path());
    let out = tmp.path().join("out");
    let conf = tmp.path().join("run.conf");
    std::fs::write(
        &conf,
        format!(
            "# small run\ngraph = {}\nfeatures = {}\ndim = 4\nwalk-trials = 20\nsample_size = 2000\nsplits = 1\nwd1 = 1e-4\nwd2 = 1e-4\nbins = 8\n",
            s(&d.graph),
            s(&d.features)
        ),
    )
    .unwrap();
    ok(&["probe-lp", "--config", s(&conf), "--dim", "6", "--out", s(&out)]);
    let m = read(&out.join("manifest.json"));
    assert_eq!(m["config"]["dim"], 6);
    assert_eq!(m["config"]["walk_trials"], 20);
    assert_eq!(m["config"]["bins"], 8);
    assert_eq!(m["embed"]["dim"], 6);
}

#[test]
fn embedding_cache_is_reused_and_invalidated() {
    let tmp = tempfile::tempdir().unwrap();
    let d = nc_data(tmp.path());
    let out = tmp.path().join("out");
    let base = |trials: &'static str| {
        vec![
            "probe-nc", "--graph", s(&d.graph), "--features", s(&d.features), "--labels", s(&d.labels), "--out", s(&out),
            "--dim", "8", "--splits", "1", "--walk-trials", trials,
        ]
    };
    ok(&base("30"));
    let first = read(&out.join("score_report.json"))["summary"].clone();
    assert_eq!(cache_entries(&out), 1);
    ok(&base("30"));
    assert_eq!(cache_entries(&out), 1);
    assert_eq!(read(&out.join("score_report.json"))["summary"], first);
    ok(&base("31"));
    assert_eq!(cache_entries(&out), 2);

    // Changed features change the key too.
    let text = std::fs::read_to_string(&d.features).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let rest = lines[0].split_once(',').unwrap().1.to_string();
    lines[0] = format!("9.5,{rest}");
    std::fs::write(&d.features, lines.join("\n") + "\n").unwrap();
    ok(&base("30"));
    assert_eq!(cache_entries(&out), 3);
}

#[test]
fn synth_gen_writes_each_scenario() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("suite");
    ok(&["synth-gen", "--suite", "nc", "--out", s(&out), "--seed", "2"]);
    let dirs: Vec<_> = std::fs::read_dir(&out).unwrap().filter(|e| e.as_ref().unwrap().path().is_dir()).collect();
    assert_eq!(dirs.len(), 5);
    let one = out.join("nc-useful-diagonal");
    let (edges, n) = io::read_edge_list(&one.join("graph.tsv")).unwrap();
    let x = io::read_dense(&one.join("features.bin")).unwrap();
    let labels = io::read_labels(&one.join("labels.txt")).unwrap();
    assert!(!edges.is_empty() && n <= x.nrows());
    assert_eq!(x.nrows(), labels.len());
    assert_eq!(read(&one.join("manifest.json"))["spec"]["seed"], 2);
}
