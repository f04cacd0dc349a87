use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

mod commands;
mod config;
mod output;

use config::{Kind, ModelChoice, Overrides};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] ferrostack::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.kind() == ferrostack::ErrorKind::Numerical => 3,
            _ => 2,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "ferrostack", version, about = "Ferroelectric capacitor-stack simulator and switching-kinetics fitter")]
struct Cli {
    /// Run configuration (JSON), or a manifest.json from an earlier run.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory (overrides output.directory).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// Disorder seed (overrides grid.disorder.seed).
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Triangular-sweep P-E loop with P_r and E_C extraction.
    Hysteresis,
    /// Constant-field polarization reversal over a field list.
    Reversal,
    /// Fit KAI and/or NLS kinetics to reversal data.
    Fit {
        /// Reversal family CSV or two-column (t, delta P) CSV.
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
        #[arg(long, value_parser = config::parse_model, value_name = "kai|nls|auto")]
        model: Option<ModelChoice>,
    },
    /// Quasi-static Landau S-curve E(P).
    Scurve,
    /// Series-capacitance stability verdict.
    NcCheck,
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(CliError::Usage("--jobs must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("--jobs: {e}")))?;
    }
    let (kind, input, model) = match cli.command {
        Command::Hysteresis => (Kind::Hysteresis, None, None),
        Command::Reversal => (Kind::Reversal, None, None),
        Command::Fit { input, model } => (Kind::Fit, input, model),
        Command::Scurve => (Kind::Scurve, None, None),
        Command::NcCheck => (Kind::NcCheck, None, None),
    };
    let tree = match &cli.config {
        Some(path) => config::load(path)?,
        None if kind == Kind::Fit => serde_json::json!({}),
        None => return Err(CliError::Usage(format!("`{}` needs --config <path>", kind.name()))),
    };
    let overrides = Overrides { out: cli.out, seed: cli.seed, input, model };
    let cfg = config::resolve(&tree, kind, &overrides)?;
    commands::execute(&cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
