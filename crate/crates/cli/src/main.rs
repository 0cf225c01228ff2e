//! `tube` — tube-formula constants and tail calibration for suprema of
//! Gaussian-type random fields, from the command line.
//!
//! Exit status: `0` success, `1` numerical-domain failure, `2` usage error,
//! `3` input/output failure.  Numerical warnings (clamped probabilities,
//! mesh rounding) are printed but never change the exit status.

mod data;
mod error;
mod registry;
mod run;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "tube",
    version,
    about = "Tube-formula constants and tail probabilities for suprema of Gaussian-type processes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonOpts,
}

#[derive(Args)]
struct CommonOpts {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Print extra diagnostic detail (repeatable).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    /// Cap the worker-thread count (default: the TUBE_THREADS environment
    /// variable, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Human-readable lines, five decimal places.
    Text,
    /// One flat JSON document with full-precision numbers.
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the tube-formula coefficients of a model manifold.
    Constants(ConstantsArgs),
    /// Tail probability of a supremum at a given cutoff.
    Tailp(TailpArgs),
    /// Critical value attaining a given tail level.
    Critval(CritvalArgs),
    /// Exponential-regression alignment test on a data file.
    Nlreg(NlregArgs),
    /// Simultaneous confidence band for a quadratic trend surface.
    Scb(ScbArgs),
    /// Normal-location mixture score test (scan-statistic calibration).
    Mixture(MixtureArgs),
    /// Check a tube tail probability against Monte Carlo simulation.
    Validate(ValidateArgs),
}

/// Flags selecting a model manifold and the tube-constant computation on it.
#[derive(Args)]
struct ManifoldArgs {
    /// Model manifold; see `constants --help` for the list.
    #[arg(long)]
    model: Option<String>,
    /// Data file for data-driven models (whitespace-separated columns,
    /// `#` comment lines).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Parameter box lo1,hi1[,lo2,hi2,...] (two values per axis).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    limits: Option<Vec<f64>>,
    /// Simpson subintervals per axis (one value, or one per axis).
    #[arg(long = "grid", value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    /// Number of series coefficients to compute (1-4).
    #[arg(long)]
    terms: Option<usize>,
    /// Evaluation route.
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Extra mass added to the boundary coefficient kap[1] (models with a
    /// hidden boundary set this automatically).
    #[arg(long, allow_hyphen_values = true)]
    boundary_increment: Option<f64>,
    /// For dimension >= 3, set the final coefficient to the Euler
    /// characteristic of the domain (check the result with `validate`).
    #[arg(long)]
    euler_closure: bool,
    /// Treat an axis as periodic (repeatable).
    #[arg(long, value_name = "AXIS")]
    periodic: Vec<usize>,
    /// Remove an open slab from an axis: AXIS,LO,HI (repeatable).
    #[arg(long, value_name = "AXIS,LO,HI")]
    exclude: Vec<String>,
}

/// Flags describing the perturbation process being calibrated.
#[derive(Args)]
struct ProcessArgs {
    /// Length distribution of the perturbation.
    #[arg(long, value_enum)]
    process: ProcArg,
    /// One- or two-sided supremum.
    #[arg(long, value_enum, default_value_t = SideArg::One)]
    side: SideArg,
    /// Residual degrees of freedom (--process t only).
    #[arg(long)]
    df: Option<f64>,
    /// Ambient dimension (--process unif only).
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ProcArg {
    /// Standard Gaussian length.
    Gauss,
    /// Gaussian length over an independent chi factor.
    #[value(alias = "tproc")]
    T,
    /// Direction uniform on the unit sphere; cutoffs are inner products.
    Unif,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SideArg {
    One,
    Two,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Explicit coordinate functions and their derivatives.
    Vector,
    /// Covariance kernel and its derivatives on the diagonal.
    #[value(alias = "cov")]
    Covariance,
}

#[derive(Args)]
struct ConstantsArgs {
    #[command(flatten)]
    manifold: ManifoldArgs,
}

#[derive(Args)]
struct TailpArgs {
    /// Precomputed coefficients kap0,kap1[,...] (give --d too), instead of
    /// --model.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    constants: Option<Vec<f64>>,
    /// Manifold dimension accompanying --constants.
    #[arg(long)]
    d: Option<usize>,
    #[command(flatten)]
    manifold: ManifoldArgs,
    #[command(flatten)]
    process: ProcessArgs,
    /// Cutoff at which the upper tail is evaluated.
    #[arg(long)]
    cutoff: f64,
}

#[derive(Args)]
struct CritvalArgs {
    /// Precomputed coefficients kap0,kap1[,...] (give --d too), instead of
    /// --model.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    constants: Option<Vec<f64>>,
    /// Manifold dimension accompanying --constants.
    #[arg(long)]
    d: Option<usize>,
    #[command(flatten)]
    manifold: ManifoldArgs,
    #[command(flatten)]
    process: ProcessArgs,
    /// Tail level to attain.
    #[arg(long)]
    alpha: f64,
}

#[derive(Args)]
struct NlregArgs {
    /// Data file: one `x y` pair per row.
    #[arg(long)]
    data: PathBuf,
    /// Rate window lo,hi.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
          default_values_t = [-2.0, 2.0])]
    limits: Vec<f64>,
    /// Simpson subintervals for the rate axis.
    #[arg(long = "grid", default_value_t = 100)]
    grid: usize,
    /// When given, also report the reject decision at this level.
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct ScbArgs {
    /// Data file: the predictor columns, then the response, per row.
    #[arg(long)]
    data: PathBuf,
    /// Prediction box lo1,hi1[,lo2,hi2,...] (two values per axis).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    limits: Vec<f64>,
    /// Simpson subintervals per axis (one value, or one per axis).
    #[arg(long = "grid", value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    /// Simultaneous coverage is 1 - alpha.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Band evaluation points per axis in the report.
    #[arg(long, default_value_t = 21)]
    points: usize,
}

#[derive(Args)]
struct MixtureArgs {
    /// Optional data file: one observation per row.  Without it only the
    /// calibration (constants and critical value) is reported.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Scan window lo,hi.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true,
          default_values_t = [-3.0, 3.0])]
    limits: Vec<f64>,
    /// Simpson subintervals for the scan axis.
    #[arg(long = "grid", default_value_t = 200)]
    grid: usize,
    /// Test level.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    manifold: ManifoldArgs,
    #[command(flatten)]
    process: ProcessArgs,
    /// Cutoff whose tail probability is checked.
    #[arg(long)]
    cutoff: f64,
    /// Monte Carlo replicates (at least 1000).
    #[arg(long, default_value_t = 100_000)]
    reps: u64,
    /// Seed of the reproducible generator.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Simulation-grid refinement over the Simpson mesh.
    #[arg(long, default_value_t = 4)]
    grid_mult: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
