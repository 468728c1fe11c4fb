//! `loco-surv`: config-driven survival feature-importance pipeline.
//!
//! Exit codes: 0 success, 1 validation error, 2 computation abort. Every
//! failure also prints one machine-readable JSON line to stderr.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use loco_surv::error::Error;

#[derive(Parser)]
#[command(
    name = "loco-surv",
    version,
    about = "Minipatch LOCO feature importance for right-censored survival data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset with planted features and ground truth.
    Synth(CommonArgs),
    /// Score every feature by minipatch occlusion (LOCO-MP).
    Loco(CommonArgs),
    /// Subsample ranks, Jaccard curves, and the permutation pseudo-null.
    Stability(CommonArgs),
    /// Repeated cross-validated C-index over feature groupings.
    Cv(CommonArgs),
}

#[derive(Args, Clone, Default)]
pub struct CommonArgs {
    /// JSON config file; command-line flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing (default ".").
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Master seed for all randomness.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; 0 = one per core. Env LOCO_SURV_WORKERS applies
    /// when neither flag nor config sets this.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Minipatch count K for LOCO-MP runs.
    #[arg(long)]
    pub k: Option<usize>,
    /// Patch model: forest, cox_ridge, or cox_lasso.
    #[arg(long)]
    pub backend: Option<String>,
    /// Stratify CV folds by event status (true/false).
    #[arg(long)]
    pub stratify: Option<bool>,
    /// Recompute the top-k ranking inside each training fold (true/false).
    #[arg(long)]
    pub refit_loco_per_fold: Option<bool>,
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidInput(_) => "invalid_input",
        Error::BadData { .. } => "bad_data",
        Error::CensoringSaturation { .. } => "censoring_saturation",
        Error::NoConvergence { .. } => "no_convergence",
        Error::NoComparablePairs { .. } => "no_comparable_pairs",
        Error::ZeroContribution { .. } => "zero_contribution",
        Error::Csv(_) => "csv",
        Error::Json(_) => "json",
        Error::Io(_) => "io",
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let message = e.to_string();
            eprint!("{message}");
            let payload = serde_json::json!({
                "error": { "kind": "invalid_input", "message": message.lines().next().unwrap_or("bad arguments") }
            });
            eprintln!("{payload}");
            return ExitCode::from(1);
        }
        Err(e) => {
            // --help / --version land here; clap wants stdout and code 0.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let payload = serde_json::json!({
                "error": { "kind": error_kind(&e), "message": e.to_string() }
            });
            eprintln!("{payload}");
            ExitCode::from(if e.is_abort() { 2 } else { 1 })
        }
    }
}
