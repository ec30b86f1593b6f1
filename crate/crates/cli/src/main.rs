//! `kernellab`: evaluate Hermite and Gaussian product kernels, convert shape
//! parameters, check domains and run the verification suites.
//!
//! Machine-readable output goes to stdout (or `--out`/`--report`), messages
//! to stderr. Exit codes: 0 success, 1 bad input or failed verification,
//! 2 domain error, 3 truncation failure.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "kernellab",
    version,
    about = "Hermite and Gaussian kernels of countably many variables"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate a kernel at a pair of points.
    EvalKernel(EvalArgs),
    /// Shape parameter conversions.
    #[command(subcommand)]
    Params(ParamsCommand),
    /// Run a verification suite and emit its report.
    Verify(VerifyArgs),
    /// Time the product, superposition and series evaluators.
    Bench(BenchArgs),
    /// Tabulate kernel values on a grid of the first coordinate.
    Grid(GridArgs),
    /// ANOVA tools.
    #[command(subcommand)]
    Anova(AnovaCommand),
    /// Decide whether a point lies in the kernel's domain.
    DomainCheck(DomainArgs),
}

#[derive(Debug, Args)]
struct Accuracy {
    /// Absolute tolerance for truncated series.
    #[arg(long)]
    tol: Option<f64>,
    /// Cap on the number of series terms.
    #[arg(long)]
    max_terms: Option<usize>,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Kernel spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// First point (JSON).
    #[arg(long)]
    x: PathBuf,
    /// Second point (JSON); defaults to `--x`.
    #[arg(long)]
    y: Option<PathBuf>,
    #[command(flatten)]
    accuracy: Accuracy,
}

#[derive(Debug, Subcommand)]
enum ParamsCommand {
    /// Mehler parameters `c, β, τ` and weights `α_ν` for a shape parameter.
    Convert(ConvertArgs),
}

#[derive(Debug, Args)]
struct ConvertArgs {
    /// A single shape parameter.
    #[arg(
        long,
        allow_hyphen_values = true,
        conflicts_with = "spec",
        required_unless_present = "spec"
    )]
    sigma: Option<f64>,
    /// Shape parameter rule (JSON) for a sequence of coordinates.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Number of weights per coordinate, and coordinates for `--spec`.
    #[arg(long, default_value_t = 8)]
    count: usize,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Suite name.
    #[arg(long, required_unless_present = "check")]
    suite: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the report; stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Re-read a report and check that it is consistent and passing.
    #[arg(long, conflicts_with = "suite")]
    check: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Strategy {
    Product,
    Superposition,
    Series,
    All,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Hermite kernel spec (JSON) without `dim`.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, value_enum, default_value_t = Strategy::All)]
    strategy: Strategy,
    /// Number of random point pairs.
    #[arg(long, default_value_t = 100)]
    points: usize,
    /// Nonzero coordinates per point.
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long, default_value_t = 1)]
    repetitions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Degree cap of the multi-index series.
    #[arg(long, default_value_t = 10_000_000)]
    degree_cap: usize,
    /// Support cap of the multi-index series.
    #[arg(long, default_value_t = 8)]
    active_cap: usize,
    #[command(flatten)]
    accuracy: Accuracy,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long)]
    spec: PathBuf,
    /// `start:end:count` for the first coordinate of x.
    #[arg(long, default_value = "-3:3:61", allow_hyphen_values = true)]
    x_range: String,
    /// `start:end:count` for the first coordinate of y.
    #[arg(long, default_value = "-3:3:61", allow_hyphen_values = true)]
    y_range: String,
    /// Tabulate `k(x, x)` along the x range instead.
    #[arg(long)]
    diagonal: bool,
    #[command(flatten)]
    accuracy: Accuracy,
    /// CSV destination.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum AnovaCommand {
    /// Split a polynomial into ANOVA components.
    Decompose(DecomposeArgs),
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    /// Polynomial spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Number of coordinates; defaults to those the polynomial uses.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DomainArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    x: PathBuf,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("KERNELLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "KERNELLAB_THREADS must be a positive integer, got {v:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::EvalKernel(a) => commands::eval_kernel(&a),
        Command::Params(ParamsCommand::Convert(a)) => commands::convert(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Bench(a) => commands::bench(&a),
        Command::Grid(a) => commands::grid(&a),
        Command::Anova(AnovaCommand::Decompose(a)) => commands::anova(&a),
        Command::DomainCheck(a) => commands::domain_check(&a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
