//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use divgrad_core::checks::Suite;
use divgrad_core::{Algorithm, Family, Variant};

/// Seed used when neither `--seed` nor `DIVGRAD_SEED` is given.
pub const DEFAULT_SEED: u64 = 20_240_611;

#[derive(Debug, Parser)]
#[command(name = "divgrad", version, about = "Divergences, gradient decompositions and split-gradient solvers")]
pub struct Cli {
    /// Accumulate every sum left to right in input order. Reports record
    /// the flag.
    #[arg(long, global = true)]
    pub canonical_sum: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Value, gradient and U/V decomposition at one pair of fields.
    Eval(EvalArgs),
    /// Identity and gradient suites on seeded random or given inputs.
    Check(CheckArgs),
    /// Minimize the divergence between y and H x over x > 0.
    Solve(SolveArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ObjectiveArgs {
    #[arg(long, value_parser = clap::value_parser!(Family))]
    pub family: Option<Family>,
    /// base, invariant, nominal or star
    #[arg(long, default_value = "base")]
    pub variant: Variant,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    /// Deformed-log parameter a (with --log-b).
    #[arg(long, requires = "log_b", conflicts_with = "log_family")]
    pub log_a: Option<f64>,
    #[arg(long, requires = "log_a", conflicts_with = "log_family")]
    pub log_b: Option<f64>,
    /// Named log family: shannon, tsallis:T, kaniadakis:K, abe:Z, gamma:G
    /// or kls:R,K.
    #[arg(long)]
    pub log_family: Option<String>,
    /// Raise every input component below this value to it.
    #[arg(long)]
    pub floor: Option<f64>,
    #[arg(long, env = "DIVGRAD_SEED")]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    /// Data field: a file with one value per line, or an inline list `1,2,3`.
    #[arg(long)]
    pub p: String,
    /// Model field, same forms as --p.
    #[arg(long)]
    pub q: String,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// Without --family every catalog entry is checked.
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    /// Suites to run; all of them when omitted.
    #[arg(long, value_delimiter = ',')]
    pub suite: Vec<Suite>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Length of the random fields.
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    /// Check at this data field instead of random ones (needs --q).
    #[arg(long, requires = "q")]
    pub p: Option<String>,
    #[arg(long, requires = "p")]
    pub q: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, hide = true)]
    pub corrupt_gradient: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    /// Model matrix, CSV rows.
    #[arg(long = "H")]
    pub h: PathBuf,
    /// Measurements.
    #[arg(long)]
    pub y: String,
    /// Starting point; uniform with total C (or Σy) when omitted.
    #[arg(long)]
    pub x0: Option<String>,
    /// additive, preconditioned or multiplicative
    #[arg(long, default_value = "additive")]
    pub algo: Algorithm,
    /// Keep Σx = C; needs an invariant objective.
    #[arg(long = "sum")]
    pub sum: Option<f64>,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Relative decrease below which an iteration counts as stalled.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Directory for trace.csv, summary.json and x.csv.
    #[arg(long)]
    pub out: PathBuf,
}
