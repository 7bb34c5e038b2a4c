mod cache;
mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Command, Flags, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] netinfof_core::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Score how much usable information each embedding of a graph carries, and
/// train the linear models that exploit it.
#[derive(Parser)]
#[command(name = "netinfof", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Link-prediction probe scores per embedding component.
    ProbeLp(Flags),
    /// Node-classification probe scores per embedding component.
    ProbeNc(Flags),
    /// Train and evaluate the link predictor (Hits@K).
    ActLp(Flags),
    /// Train and evaluate the node classifier (accuracy).
    ActNc(Flags),
    /// Write the synthetic scenario suite (`--suite lp|nc`).
    SynthGen(Flags),
    /// Time the link-prediction pipeline on growing synthetic graphs.
    BenchScaling(Flags),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Sub::ProbeLp(f) => (Command::ProbeLp, f),
        Sub::ProbeNc(f) => (Command::ProbeNc, f),
        Sub::ActLp(f) => (Command::ActLp, f),
        Sub::ActNc(f) => (Command::ActNc, f),
        Sub::SynthGen(f) => (Command::SynthGen, f),
        Sub::BenchScaling(f) => (Command::BenchScaling, f),
    };
    let result = RunConfig::resolve(command, &flags).and_then(|cfg| commands::run(&cfg));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("netinfof {}: error: {msg}", command.name());
            ExitCode::from(match e {
                CliError::Config(_) => 2,
                _ => 1,
            })
        }
    }
}
