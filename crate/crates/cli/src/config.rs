//! Resolved run parameters: command-line flags over an optional key=value
//! file over defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::Serialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    ProbeLp,
    ProbeNc,
    ActLp,
    ActNc,
    SynthGen,
    BenchScaling,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ProbeLp => "probe-lp",
            Command::ProbeNc => "probe-nc",
            Command::ActLp => "act-lp",
            Command::ActNc => "act-nc",
            Command::SynthGen => "synth-gen",
            Command::BenchScaling => "bench-scaling",
        }
    }

    pub fn is_link_prediction(self) -> bool {
        matches!(self, Command::ProbeLp | Command::ActLp)
    }
}

/// Flags shared by every subcommand; unset flags fall back to `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Edge list: one `u<TAB>v` pair per line, `#` comments.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Node features: NIFDENSE binary or CSV.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// One class id per line (node classification).
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Embedding dimension d.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Discretizer bins for the link-prediction probe.
    #[arg(long)]
    pub bins: Option<usize>,
    /// k-means clusters for the node-classification probe (default 2c).
    #[arg(long)]
    pub clusters: Option<usize>,
    /// Edge sample size S for the compatibility matrix.
    #[arg(long)]
    pub sample_size: Option<usize>,
    /// Random-walk trials per node T.
    #[arg(long)]
    pub walk_trials: Option<usize>,
    /// Master seed; every random stream derives from it.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of random splits.
    #[arg(long)]
    pub splits: Option<usize>,
    /// key=value file; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Train/valid/test fractions, e.g. `0.7,0.1,0.2`.
    #[arg(long)]
    pub split_ratios: Option<String>,
    /// Comma-separated wd1 grid.
    #[arg(long)]
    pub wd1: Option<String>,
    /// Comma-separated wd2 grid.
    #[arg(long)]
    pub wd2: Option<String>,
    /// K of Hits@K.
    #[arg(long)]
    pub hits_k: Option<usize>,
    /// Recompute embeddings even when a matching cache entry exists.
    #[arg(long)]
    pub no_cache: bool,
    /// `lp` or `nc` (synth-gen).
    #[arg(long)]
    pub suite: Option<String>,
    /// Comma-separated edge-count factors (bench-scaling).
    #[arg(long)]
    pub factors: Option<String>,
    /// Node count at factor 1 (bench-scaling).
    #[arg(long)]
    pub base_nodes: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub graph: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub out: PathBuf,
    pub dim: usize,
    pub bins: usize,
    pub clusters: Option<usize>,
    pub sample_size: usize,
    pub walk_trials: usize,
    pub seed: u64,
    pub splits: usize,
    pub split_ratios: (f64, f64, f64),
    pub wd1: Vec<f64>,
    pub wd2: Vec<f64>,
    pub hits_k: usize,
    pub cache: bool,
    pub suite: Option<String>,
    pub factors: Vec<usize>,
    pub base_nodes: usize,
}

const KEYS: &[&str] = &[
    "graph",
    "features",
    "labels",
    "out",
    "dim",
    "bins",
    "clusters",
    "sample_size",
    "walk_trials",
    "seed",
    "splits",
    "split_ratios",
    "wd1",
    "wd2",
    "hits_k",
    "cache",
    "suite",
    "factors",
    "base_nodes",
];

/// Parse `key = value` lines; `#` starts a comment, `-` and `_` are
/// interchangeable in keys.
pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("{}:{}: expected key=value", path.display(), i + 1)))?;
        let key = k.trim().replace('-', "_");
        if !KEYS.contains(&key.as_str()) {
            return Err(CliError::Config(format!("{}:{}: unknown key {key:?}", path.display(), i + 1)));
        }
        out.insert(key, v.trim().to_string());
    }
    Ok(out)
}

fn parse<T: FromStr>(key: &str, raw: &str) -> Result<T, CliError>
where
    T::Err: Display,
{
    raw.parse().map_err(|e| CliError::Config(format!("{key}: cannot parse {raw:?}: {e}")))
}

fn parse_list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>, CliError>
where
    T::Err: Display,
{
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

fn parse_bool(key: &str, raw: &str) -> Result<bool, CliError> {
    match raw.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(CliError::Config(format!("{key}: expected a boolean, got {raw:?}"))),
    }
}

impl RunConfig {
    pub fn resolve(command: Command, flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => parse_config_file(p)?,
            None => BTreeMap::new(),
        };
        let from_file = |key: &str| file.get(key).map(String::as_str);

        macro_rules! pick {
            ($flag:expr, $key:literal, $default:expr) => {
                match $flag.clone() {
                    Some(v) => v,
                    None => match from_file($key) {
                        Some(raw) => parse($key, raw)?,
                        None => $default,
                    },
                }
            };
        }
        let path = |flag: &Option<PathBuf>, key: &str| flag.clone().or_else(|| from_file(key).map(PathBuf::from));
        let list = |flag: &Option<String>, key: &str| flag.clone().or_else(|| from_file(key).map(str::to_string));

        let default_ratios = if command.is_link_prediction() { "0.7,0.1,0.2" } else { "0.025,0.025,0.95" };
        let ratios: Vec<f64> = parse_list(
            "split_ratios",
            &list(&flags.split_ratios, "split_ratios").unwrap_or_else(|| default_ratios.to_string()),
        )?;
        let [a, b, c] = ratios[..] else {
            return Err(CliError::Config(format!("split_ratios needs three values, got {}", ratios.len())));
        };
        // The scaling sweep runs the pipeline several times over; fewer walks
        // keep it to minutes without changing the growth rate.
        let default_trials = if command == Command::BenchScaling { 200 } else { 1000 };
        let cache = if flags.no_cache {
            false
        } else {
            from_file("cache").map(|v| parse_bool("cache", v)).transpose()?.unwrap_or(true)
        };
        let clusters = match flags.clusters {
            Some(k) => Some(k),
            None => from_file("clusters").map(|v| parse("clusters", v)).transpose()?,
        };

        let cfg = Self {
            command,
            graph: path(&flags.graph, "graph"),
            features: path(&flags.features, "features"),
            labels: path(&flags.labels, "labels"),
            out: path(&flags.out, "out").unwrap_or_else(|| PathBuf::from("netinfof-out")),
            dim: pick!(flags.dim, "dim", 128),
            bins: pick!(flags.bins, "bins", 32),
            clusters,
            sample_size: pick!(flags.sample_size, "sample_size", 200_000),
            walk_trials: pick!(flags.walk_trials, "walk_trials", default_trials),
            seed: pick!(flags.seed, "seed", 0),
            splits: pick!(flags.splits, "splits", 5),
            split_ratios: (a, b, c),
            wd1: parse_list("wd1", &list(&flags.wd1, "wd1").unwrap_or_else(|| "1e-4,1e-5".into()))?,
            wd2: parse_list("wd2", &list(&flags.wd2, "wd2").unwrap_or_else(|| "1e-3,1e-4,1e-5,1e-6".into()))?,
            hits_k: pick!(flags.hits_k, "hits_k", 100),
            cache,
            suite: list(&flags.suite, "suite"),
            factors: parse_list("factors", &list(&flags.factors, "factors").unwrap_or_else(|| "1,2,4,8".into()))?,
            base_nodes: pick!(flags.base_nodes, "base_nodes", 1000),
        };
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if self.splits == 0 {
            return bad("splits must be at least 1");
        }
        if self.bins < 2 {
            return bad("bins must be at least 2");
        }
        let (a, b, c) = self.split_ratios;
        if a <= 0.0 || b <= 0.0 || c <= 0.0 || (a + b + c - 1.0).abs() > 1e-9 {
            return bad("split_ratios must be three positive fractions summing to 1");
        }
        if self.wd1.is_empty() || self.wd2.is_empty() {
            return bad("wd1 and wd2 grids must be non-empty");
        }
        match self.command {
            Command::SynthGen => {
                if !matches!(self.suite.as_deref(), Some("lp" | "nc")) {
                    return bad("synth-gen needs --suite lp or --suite nc");
                }
            }
            Command::BenchScaling => {
                if self.factors.is_empty() || self.factors.contains(&0) {
                    return bad("factors must be positive integers");
                }
            }
            cmd => {
                let need = |p: &Option<PathBuf>, flag: &str| -> Result<(), CliError> {
                    match p {
                        None => Err(CliError::Config(format!("{} needs --{flag}", cmd.name()))),
                        Some(p) if !p.exists() => Err(CliError::Config(format!("{}: no such file", p.display()))),
                        Some(_) => Ok(()),
                    }
                };
                need(&self.graph, "graph")?;
                need(&self.features, "features")?;
                if !cmd.is_link_prediction() {
                    need(&self.labels, "labels")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_and_file_overrides_defaults() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.conf");
        std::fs::write(&file, "# comment\ndim = 16\nwalk-trials=50 # inline\nsuite = lp\ncache = no\n").unwrap();
        let flags = Flags {
            dim: Some(8),
            config: Some(file),
            ..Flags::default()
        };
        let cfg = RunConfig::resolve(Command::SynthGen, &flags).unwrap();
        assert_eq!(cfg.dim, 8);
        assert_eq!(cfg.walk_trials, 50);
        assert_eq!(cfg.bins, 32);
        assert!(!cfg.cache);
        assert_eq!(cfg.split_ratios, (0.025, 0.025, 0.95));
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("run.conf");
        std::fs::write(&file, "dimension = 3\n").unwrap();
        let flags = Flags {
            config: Some(file.clone()),
            suite: Some("lp".into()),
            ..Flags::default()
        };
        assert!(RunConfig::resolve(Command::SynthGen, &flags).is_err());
        std::fs::write(&file, "dim = many\n").unwrap();
        assert!(RunConfig::resolve(Command::SynthGen, &flags).is_err());
        let flags = Flags {
            split_ratios: Some("0.5,0.5".into()),
            suite: Some("lp".into()),
            ..Flags::default()
        };
        assert!(RunConfig::resolve(Command::SynthGen, &flags).is_err());
    }

    #[test]
    fn missing_inputs_are_reported() {
        let err = RunConfig::resolve(Command::ProbeLp, &Flags::default()).unwrap_err();
        assert!(err.to_string().contains("--graph"));
    }
}
