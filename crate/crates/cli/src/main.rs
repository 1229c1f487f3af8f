//! `hashcoarsen` command-line interface.
//!
//! Exit codes: 0 success, 1 a theory check failed, 2 malformed input,
//! 3 invalid configuration, 4 eigensolve larger than the dense limit.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hashcoarsen::lsh::{Aggregate, DEFAULT_PROJECTORS};
use hashcoarsen::spectral::{LiftNorm, SpectrumEnd, DEFAULT_DENSE_LIMIT};
use hashcoarsen::{AlphaMode, Error};

#[derive(Parser, Debug)]
#[command(
    name = "hashcoarsen",
    version,
    about = "Adaptive graph coarsening by random-projection hashing"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Coarsen a homogeneous graph at one or more ratios.
    Coarsen(CoarsenArgs),
    /// Coarsen a heterogeneous graph type by type.
    CoarsenHetero(HeteroArgs),
    /// Spectral quality of coarsened graphs, from their sidecars.
    Metrics(MetricsArgs),
    /// Monte-Carlo checks of the hashing and load-balance bounds.
    ValidateTheory(TheoryArgs),
    /// Adaptive vs per-ratio timing on synthetic graphs.
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone)]
pub struct HashArgs {
    /// `auto` (cross-label edge fraction) or a value in [0, 1].
    #[arg(long, default_value = "auto")]
    pub alpha: AlphaMode,
    #[arg(long, default_value_t = DEFAULT_PROJECTORS)]
    pub projectors: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// mean, max or median.
    #[arg(long, default_value = "mean")]
    pub aggregate: Aggregate,
}

#[derive(Args, Debug, Clone)]
pub struct EigenArgs {
    /// Number of eigenvalues compared.
    #[arg(long, default_value_t = 10)]
    pub ree_k: usize,
    /// low or high end of the spectrum.
    #[arg(long, default_value = "low")]
    pub ree_end: SpectrumEnd,
    /// Largest N solved densely.
    #[arg(long, default_value_t = DEFAULT_DENSE_LIMIT)]
    pub dense_eig_limit: usize,
    /// Use Lanczos iteration above the dense limit instead of failing.
    #[arg(long)]
    pub iterative: bool,
    /// binary or normalized lift.
    #[arg(long, default_value = "binary")]
    pub lift: LiftNorm,
}

#[derive(Args, Debug)]
pub struct CoarsenArgs {
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long)]
    pub features: PathBuf,
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Comma-separated, strictly descending; values above 1 are percents.
    #[arg(long, value_delimiter = ',', required = true)]
    pub ratios: Vec<String>,
    #[command(flatten)]
    pub hash: HashArgs,
    /// z-score feature columns before hashing.
    #[arg(long)]
    pub standardize: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write metrics.json per ratio and metrics.csv.
    #[arg(long)]
    pub emit_metrics: bool,
    #[command(flatten)]
    pub eigen: EigenArgs,
}

#[derive(Args, Debug)]
pub struct HeteroArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    pub ratios: Vec<String>,
    /// Per-type override, `name=ratio`; repeatable.
    #[arg(long = "type-ratio")]
    pub type_ratios: Vec<String>,
    #[command(flatten)]
    pub hash: HashArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// Sidecar files written by `coarsen`.
    #[arg(required = true)]
    pub sidecars: Vec<PathBuf>,
    #[command(flatten)]
    pub eigen: EigenArgs,
    /// JSON report path; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// One row per sidecar.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct TheoryArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trials for the projection checks.
    #[arg(long, default_value_t = 100_000)]
    pub trials: usize,
    /// Overrides the per-check projector counts (4 and 16).
    #[arg(long)]
    pub projectors: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub lb_nodes: usize,
    #[arg(long, default_value_t = 100)]
    pub lb_supernodes: usize,
    #[arg(long, default_value_t = 3.0)]
    pub lb_c: f64,
    #[arg(long, default_value_t = 500)]
    pub lb_trials: usize,
    /// Directory for checks.json and proximity_curve.csv; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "10000,20000,40000,80000")]
    pub sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "55,50,45,40,35,30,25,20,15,10")]
    pub ratios: Vec<String>,
    #[command(flatten)]
    pub hash: HashArgs,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 10.0)]
    pub avg_degree: f64,
    #[arg(long, default_value_t = 16)]
    pub feature_dim: usize,
    /// CSV path; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::TooLarge { .. }) => 4,
        Some(
            Error::InvalidGraph(_)
            | Error::EmptyGraph
            | Error::SizeMismatch(_)
            | Error::UnknownType(_)
            | Error::EmptyType(_)
            | Error::MissingTargetLabels(_),
        ) => 2,
        Some(e) if e.is_input_error() => 2,
        Some(_) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Coarsen(a) => commands::coarsen(&a),
        Command::CoarsenHetero(a) => commands::coarsen_hetero(&a),
        Command::Metrics(a) => commands::metrics(&a),
        Command::ValidateTheory(a) => commands::validate_theory(&a),
        Command::Bench(a) => commands::bench(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
