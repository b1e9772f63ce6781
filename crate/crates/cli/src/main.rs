//! `ecofollow`: prepare, stats, train, eval and compare for the eco-driving
//! car-following pipeline.

// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "ecofollow",
    version,
    about = "Eco-driving car-following: data preparation, DDPG training and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract car-following events from a trajectory CSV into the normalized layout.
    Prepare(PrepareArgs),
    /// Descriptive statistics, histograms and the lognormal headway fit.
    Stats(StatsArgs),
    /// Generate synthetic IDM-follower events.
    Synth(SynthArgs),
    /// Grid-search IDM parameters against recorded followers.
    Calibrate(CalibrateArgs),
    /// Train a DDPG policy on the training split.
    Train(TrainArgs),
    /// Evaluate controllers on events and write indicator summaries and reports.
    Eval(EvalArgs),
    /// Build a comparison report from previously written summaries.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct PrepareArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// JSON column mapping (names and unit scales); defaults to the normalized layout.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    #[arg(long, default_value_t = 15.0)]
    pub min_duration: f64,
    /// Required sampling interval, s.
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub events: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub bins: usize,
    /// |TTC| cap for the TTC summary, s.
    #[arg(long, default_value_t = 50.0)]
    pub ttc_cap: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Event length, s.
    #[arg(long, default_value_t = 30.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub events: PathBuf,
    /// JSON search space; defaults to a small grid around conventional values.
    #[arg(long)]
    pub search: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeadwayFit {
    /// Use the reward config's μ, σ unchanged.
    Fixed,
    /// Refit on all loaded events.
    All,
    /// Refit on the training split only.
    Train,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub events: PathBuf,
    /// Training fraction.
    #[arg(long, default_value_t = 0.7)]
    pub split: f64,
    /// Overrides `train.seed` from the config.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// VT-Micro coefficient JSON; defaults to the bundled table.
    #[arg(long)]
    pub vt_micro: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = HeadwayFit::Fixed)]
    pub headway_fit: HeadwayFit,
    /// Overrides `train.episodes` from the config.
    #[arg(long)]
    pub episodes: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub events: PathBuf,
    /// Trained policy file.
    #[arg(long)]
    pub policy: Option<PathBuf>,
    /// IDM parameter JSON (e.g. from `calibrate`).
    #[arg(long)]
    pub idm_params: Option<PathBuf>,
    /// IDM with the config's `idm` block (defaults when absent).
    #[arg(long)]
    pub idm: bool,
    /// Recorded-acceleration replay, the comparison baseline.
    #[arg(long)]
    pub ground_truth: bool,
    #[arg(long)]
    pub vt_micro: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Average per-event means instead of pooling steps.
    #[arg(long)]
    pub per_event_means: bool,
    #[arg(long)]
    pub bins: Option<usize>,
    /// Skip per-event trace CSVs.
    #[arg(long)]
    pub no_traces: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Summary JSON files written by `eval`.
    #[arg(long, num_args = 1.., required = true)]
    pub summaries: Vec<PathBuf>,
    #[arg(long, default_value = "ground_truth")]
    pub baseline: String,
    #[arg(long)]
    pub out: PathBuf,
}

fn configure_threads() {
    if let Some(n) = std::env::var("ECOFOLLOW_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(error::ExitCode::Usage as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    configure_threads();
    let result = match cli.command {
        Command::Prepare(a) => commands::prepare(&a),
        Command::Stats(a) => commands::stats(&a),
        Command::Synth(a) => commands::synth(&a),
        Command::Calibrate(a) => commands::calibrate(&a),
        Command::Train(a) => commands::train(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Compare(a) => commands::compare(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
