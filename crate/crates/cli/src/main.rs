//! `oig-lab`: command-line access to the one-inclusion learners, their
//! combinatorics and the seeded experiment harness.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 unrealizable sample,
//! 4 failed assertion, 5 exhausted search budget.

mod commands;
mod experiment;
mod output;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{BoundsArgs, ClassArgs, DensityArgs, LooArgs, MartingaleArgs, OrientArgs, PredictArgs};
use experiment::ExperimentArgs;

#[derive(Parser, Debug)]
#[command(name = "oig-lab", version, about = "One-inclusion hypergraph learners on finite classes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// VC, DS, V_γ and fat-shattering dimensions of a class, as JSON.
    Dims(ClassArgs),
    /// Class density dens_n and the densest one-inclusion subgraph.
    Density(DensityArgs),
    /// Minimum out-degree orientation of a one-inclusion hypergraph.
    Orient(OrientArgs),
    /// Predict the label of one point from a training sample.
    Predict(PredictArgs),
    /// Leave-one-out audit of a predictor on a sample.
    Loo(LooArgs),
    /// Risk bound values over a parameter grid, as CSV on standard output.
    Bounds(BoundsArgs),
    /// Run a seeded PAC experiment and write CSV (and optionally SVG) results.
    Experiment(ExperimentArgs),
    /// Simulate adapted processes against both martingale inequalities.
    VerifyMartingale(MartingaleArgs),
}

/// Failure carrying its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    pub fn assertion(message: impl Into<String>) -> Self {
        Failure {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<oig_core::Error> for Failure {
    fn from(e: oig_core::Error) -> Self {
        use oig_core::Error;
        let code = match &e {
            Error::Realizability(_) => 3,
            Error::BudgetExceeded { .. } => 5,
            Error::InvalidArgument(_) | Error::Parse { .. } | Error::Io(_) => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast::<oig_core::Error>() {
            Ok(core) => core.into(),
            Err(other) => Failure::usage(format!("{other:#}")),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

fn configure_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("OIG_LAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Failure::usage(format!("OIG_LAB_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::usage(format!("cannot configure thread pool: {e}")))
}

fn run(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    match cli.command {
        Command::Dims(args) => commands::dims(&args),
        Command::Density(args) => commands::density(&args),
        Command::Orient(args) => commands::orient(&args),
        Command::Predict(args) => commands::predict(&args),
        Command::Loo(args) => commands::loo(&args),
        Command::Bounds(args) => commands::bounds(&args),
        Command::Experiment(args) => experiment::run(&args),
        Command::VerifyMartingale(args) => commands::verify_martingale(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("oig-lab: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
