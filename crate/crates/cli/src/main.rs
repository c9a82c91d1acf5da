//! Experiment runner: exposes the surrogate pipeline as subcommands with
//! reproducible seeds and machine-readable outputs.
//!
//! Exit codes: 0 success, 2 usage/configuration error, 3 runtime/solver
//! failure. Logs are line-oriented `key=value` pairs on stderr.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::ConfigError;

#[derive(Parser)]
#[command(
    name = "mlcspg",
    about = "Multi-level compressed-sensing Petrov-Galerkin experiment runner",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration (TOML).
    #[arg(long, value_name = "PATH")]
    config: std::path::PathBuf,
    /// Override a scalar config key, e.g. --set schedule.seed=7.
    #[arg(long = "set", value_name = "K=V")]
    set: Vec<String>,
    /// Master seed override (shorthand for --set schedule.seed=N).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: all cores; env MLCSPG_THREADS as fallback).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the level schedule (h_l, s_l, N_l, m_l, work units).
    Schedule {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the pipeline and write the surrogate file.
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Output surrogate path.
        #[arg(long, value_name = "PATH")]
        out: std::path::PathBuf,
    },
    /// Evaluate a surrogate file at parameter points.
    Eval {
        /// Surrogate file written by `run`.
        #[arg(long, value_name = "PATH")]
        surrogate: std::path::PathBuf,
        /// Comma-separated parameter point (repeatable).
        #[arg(long = "point", value_name = "Y1,Y2,...")]
        points: Vec<String>,
        /// File with one comma-separated point per line.
        #[arg(long, value_name = "PATH")]
        points_file: Option<std::path::PathBuf>,
    },
    /// Convergence and work studies; writes convergence.csv and work.csv.
    Bench {
        #[command(flatten)]
        common: CommonArgs,
        /// Output directory for the CSV tables.
        #[arg(long, value_name = "DIR", default_value = ".")]
        out: std::path::PathBuf,
    },
    /// Coefficient comparison (CS vs least squares vs Monte Carlo); writes
    /// coeffs.csv.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        /// Output CSV path.
        #[arg(long, value_name = "PATH", default_value = "coeffs.csv")]
        out: std::path::PathBuf,
    },
}

/// Error wrapper separating configuration failures (exit 2) from runtime
/// failures (exit 3).
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<mlcspg_core::CoreError> for CliError {
    fn from(e: mlcspg_core::CoreError) -> Self {
        use mlcspg_core::CoreError::*;
        match e {
            Domain(_) | Dimension(_) | InvalidIndex(_) | Config(_) | InfiniteSet(_)
            | InvalidWeights(_) | Parse(_) => CliError::Usage(e.to_string()),
            EllipticityViolation(_) | SolverDivergence(_) | RankDeficiency(_) | Infeasible(_)
            | Io(_) => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn init_threads(requested: Option<usize>) -> Result<(), CliError> {
    let threads = match requested {
        Some(n) => Some(n),
        None => std::env::var("MLCSPG_THREADS")
            .ok()
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| CliError::Usage(format!("bad MLCSPG_THREADS value `{v}`")))
            })
            .transpose()?,
    };
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("thread count must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Schedule { common } => init_threads(common.threads)
            .and_then(|()| config::load(&common.config, &common.set, common.seed).map_err(Into::into))
            .and_then(|cfg| commands::cmd_schedule(&cfg)),
        Command::Run { common, out } => init_threads(common.threads)
            .and_then(|()| config::load(&common.config, &common.set, common.seed).map_err(Into::into))
            .and_then(|cfg| commands::cmd_run(&cfg, &out)),
        Command::Eval {
            surrogate,
            points,
            points_file,
        } => commands::cmd_eval(&surrogate, &points, points_file.as_deref()),
        Command::Bench { common, out } => init_threads(common.threads)
            .and_then(|()| config::load(&common.config, &common.set, common.seed).map_err(Into::into))
            .and_then(|cfg| commands::cmd_bench(&cfg, &out)),
        Command::Compare { common, out } => init_threads(common.threads)
            .and_then(|()| config::load(&common.config, &common.set, common.seed).map_err(Into::into))
            .and_then(|cfg| commands::cmd_compare(&cfg, &out)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error=config {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error=runtime {msg}");
            ExitCode::from(3)
        }
    }
}
