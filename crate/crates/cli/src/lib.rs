//! `measure-sim`: runs the measurement checks from the command line and
//! writes JSON reports and CSV curves.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for
//! usage, configuration or output errors.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use measurement_core::checks::CheckReport;

pub mod commands;
pub mod config;
pub mod output;

pub use config::RunConfig;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] measurement_core::Error),
    #[error("cannot write output: {0}")]
    Output(String),
}

#[derive(Debug, Parser)]
#[command(name = "measure-sim", version, about = "Finite-dimensional quantum measurement checks")]
pub struct Cli {
    /// JSON run configuration; omitted fields take their defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed (overrides the configuration).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for JSON reports and CSV curves.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Monte Carlo samples for the collapse frequency bands.
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    /// Born weight for the convergence curve.
    #[arg(long, global = true)]
    pub p: Option<f64>,
    /// Error margin for the convergence curve.
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    /// Comma-separated ascending repetition counts.
    #[arg(long, global = true, value_delimiter = ',')]
    pub n_list: Option<Vec<u64>>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Outcome-subspace closure and orthogonality.
    PostulateA,
    /// The observer always attests to an allowed outcome.
    PostulateB,
    /// Exact binomial tails against the Hoeffding bound, and the convergence curve.
    Born,
    /// Sequential-measurement weights, factorization and frequencies.
    Collapse,
    /// Overlaps of random vectors and subspaces.
    Overlap,
    /// Dense evolution against the branch ledger.
    CrossValidate,
    /// Every check; writes one JSON per check and `summary.json` last.
    Suite,
}

/// What a run produced: the reports, in order, and the JSON for stdout.
#[derive(Debug)]
pub struct Outcome {
    pub reports: Vec<CheckReport>,
    pub stdout: serde_json::Value,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            EXIT_PASS
        } else {
            EXIT_FAIL
        }
    }
}

/// Configuration after applying command-line overrides.
pub fn effective_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.samples {
        cfg.collapse.samples = n;
    }
    if let Some(p) = cli.p {
        cfg.born.p = p;
    }
    if let Some(e) = cli.eps {
        cfg.born.epsilon = e;
    }
    if let Some(list) = &cli.n_list {
        cfg.born.n_list = list.clone();
    }
    Ok(cfg)
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = effective_config(cli)?;
    let out = match &cli.out {
        Some(dir) => Some(output::OutputDir::create(dir)?),
        None => None,
    };
    commands::dispatch(cli.command, &cfg, out.as_ref())
}
