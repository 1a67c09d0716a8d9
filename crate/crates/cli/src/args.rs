//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Positive definiteness of zonal kernels on two-point homogeneous spaces.
#[derive(Debug, Parser)]
#[command(name = "zonalpd", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Certified Jacobi coefficients of a kernel.
    Coeffs(CoeffsArgs),
    /// Positive definiteness verdict from certified coefficient signs.
    Classify(ClassifyArgs),
    /// Sign-transition scan over Riesz exponents.
    Scan(ScanArgs),
    /// Coefficient signs of the logarithmic geodesic kernel on projective spaces.
    Table1(Table1Args),
    /// Energies of the invariant, discrete or perturbed measures.
    Energy(EnergyArgs),
    /// Poisson kernel by series and closed form.
    Poisson(PoissonArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Flags shared by every subcommand.
#[derive(Debug, Args)]
pub struct Common {
    /// Working precision in significant decimal digits (ZONALPD_DEFAULT_DIGITS overrides the default of 50).
    #[arg(long)]
    pub digits: Option<u32>,
    /// Worker threads; output does not depend on this.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Re-parse the produced output against its schema before writing.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long)]
    pub kernel: String,
    #[arg(long, default_value_t = 32)]
    pub nmax: usize,
    /// de, gj or both.
    #[arg(long, default_value = "both")]
    pub method: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long)]
    pub kernel: String,
    #[arg(long, default_value_t = 32)]
    pub nmax: usize,
    #[arg(long, default_value = "both")]
    pub method: String,
    /// pd or cpd.
    #[arg(long, default_value = "pd")]
    pub mode: String,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long)]
    pub space: String,
    /// riesz-geodesic or riesz-chordal.
    #[arg(long)]
    pub kernel: String,
    #[arg(long, allow_negative_numbers = true)]
    pub s_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub s_max: f64,
    #[arg(long, default_value_t = 0.05)]
    pub step: f64,
    #[arg(long, default_value_t = 48)]
    pub nmax: usize,
    /// Bisection tolerance on the transition exponent.
    #[arg(long, default_value_t = 0.01)]
    pub bisect: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Table1Args {
    #[arg(long, default_value_t = 16)]
    pub nmax: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct EnergyArgs {
    #[arg(long)]
    pub space: Option<String>,
    #[arg(long)]
    pub kernel: String,
    /// Point file; the discrete energy of these points is computed.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Weight file for the points; uniform weights when absent.
    #[arg(long)]
    pub weights: Option<PathBuf>,
    /// Density 1 + eps P_n(t(x, z)) given as n=<int>,eps=<float>.
    #[arg(long)]
    pub perturb: Option<String>,
    /// Monte Carlo samples for the perturbed energy (0 disables).
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct PoissonArgs {
    #[arg(long)]
    pub space: String,
    #[arg(long)]
    pub r: f64,
    /// Geodesic distance theta.
    #[arg(long)]
    pub theta: f64,
    #[command(flatten)]
    pub common: Common,
}
