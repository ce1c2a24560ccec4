//! Command-line front end: catalog listing, verification reports, curvature
//! field export and Laplacian identity checks.

pub mod error;
pub mod laplacian;
pub mod list;
pub mod map;
pub mod source;
pub mod tolerances;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use error::CliError;
pub use tolerances::Tolerances;

#[derive(Debug, Parser)]
#[command(
    name = "wintgen",
    version,
    about = "Curvature checks for space-like surfaces in neutral 4-space forms"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the built-in surfaces.
    List {
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run every pointwise and differential check on a grid.
    Verify(VerifyArgs),
    /// Write a curvature field (the defect by default) as CSV or JSON.
    DefectMap(MapArgs),
    /// Check a Laplacian identity of minimal equality surfaces.
    LaplacianCheck(LaplacianArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct SurfaceArgs {
    /// Catalog name; omit when --file is given.
    pub surface: Option<String>,
    /// Surface definition file.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Catalog parameter, repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    pub params: Vec<String>,
    /// Seed for random_polynomial.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Parameter rectangle overriding the default domain.
    #[arg(long, value_name = "S0:S1,T0:T1")]
    pub domain: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[arg(long, value_name = "NxM", default_value = "33x33")]
    pub grid: String,
    /// Tolerance override, repeatable.
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    #[arg(long, value_name = "NxM", default_value = "33x33")]
    pub grid: String,
    /// K, KD, H2, defect, ln(K+1), ln(K) or ln(K-1).
    #[arg(long, default_value = "defect")]
    pub quantity: String,
    /// Output path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct LaplacianArgs {
    #[command(flatten)]
    pub surface: SurfaceArgs,
    /// eq5_11 (c = -1), eq6_6 (c = 0) or eq7_7 (c = 1).
    pub identity: Option<String>,
    #[arg(long, value_name = "NxM", default_value = "65x65")]
    pub grid: String,
    #[arg(long = "tol", value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
    /// Also run the 17/33/65 grid refinement study.
    #[arg(long)]
    pub refine: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

/// Execute a parsed command, writing its report to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::List { format } => list::run(format, out),
        Command::Verify(args) => verify::run(&args, out),
        Command::DefectMap(args) => map::run(&args, out),
        Command::LaplacianCheck(args) => laplacian::run(args, out),
    }
}

pub(crate) fn sci(x: f64) -> String {
    // avoid printing "-0.000e0"
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.3e}")
}
