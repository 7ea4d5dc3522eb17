//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 hypothesis violation,
//! 3 verification failure, 4 compute budget refusal.

mod commands;
pub mod format;
pub mod tables;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_VERIFY_FAILED: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 20_190_601;

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Hypothesis(_) => EXIT_HYPOTHESIS,
        Error::Budget { .. } => EXIT_BUDGET,
        _ => EXIT_USAGE,
    }
}

#[derive(Debug, Parser)]
#[command(name = "sepbound", version, about = "Stochastic Fisher-separation bounds and their Monte Carlo checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample-size bounds M for one or more theorems.
    Bound(BoundArgs),
    /// Regenerate a reference table (1-11, or "all").
    Table(TableArgs),
    /// The two-point probability f(n, alpha) of a family.
    TwoPoint(TwoPointArgs),
    /// Compare a Monte Carlo estimate with the computed value.
    Verify(VerifyArgs),
    /// Bounds over a range of dimensions, as CSV or JSON.
    Sweep(SweepArgs),
    /// Count inseparable pairs in a CSV of points (one point per row).
    CheckDataset(CheckDatasetArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Human,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum VerifyMode {
    #[default]
    TwoPoint,
    Set,
}

/// Parameters shared by the family-specific theorems.
#[derive(Debug, Clone, Default, Args)]
pub struct FamilyParams {
    /// Strong log-concavity constant.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Expected norm for the SLC bounds (default √(n − 1/γ)).
    #[arg(long)]
    pub mu: Option<f64>,
    /// Coordinate standard deviation for the product bounds.
    #[arg(long)]
    pub sigma0: Option<f64>,
    /// Perturbation radius.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Inner radius of the spherical layer.
    #[arg(long = "R")]
    pub inner: Option<f64>,
    /// Excluded-ball ratio for the prototype bounds.
    #[arg(long)]
    pub r: Option<f64>,
    /// Density constant for the prototype bounds.
    #[arg(long = "C")]
    pub c: Option<f64>,
    /// Product components: uniform01, bernoulli, three-point[:sigma0],
    /// laplace[:scale], normal, tabulated:<csv of x,density>.
    #[arg(long = "component", value_delimiter = ',')]
    pub components: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = OutputFormat::Human)]
    pub format: OutputFormat,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Theorem ids, comma separated, or "all".
    #[arg(long, value_delimiter = ',', required = true)]
    pub theorem: Vec<String>,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    /// origin, mean, cube-center, any, or comma-separated coordinates.
    #[arg(long, default_value = "mean")]
    pub center: String,
    #[command(flatten)]
    pub family: FamilyParams,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// Table number 1-11, or "all".
    pub id: String,
    /// Compare with the printed values and report deviations.
    #[arg(long)]
    pub check: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TwoPointArgs {
    /// ball, ball_upper, layer, normal, exponential, slc, rot_general, ...
    /// or any theorem id with a two-point function.
    #[arg(long, alias = "theorem")]
    pub family: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value = "mean")]
    pub center: String,
    #[command(flatten)]
    pub params: FamilyParams,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// ball, layer, normal, exponential, slc, cube, product, laplace, halfcube.
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Pairs (two-point mode) or point sets (set mode); accepts 1e7.
    #[arg(long, value_parser = parse_count)]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = VerifyMode::TwoPoint)]
    pub mode: VerifyMode,
    /// Points per set; defaults to the bound at --delta.
    #[arg(long = "M", alias = "m")]
    pub m: Option<usize>,
    /// Target expected number of inseparable pairs when choosing M.
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    /// Centre; defaults to the family mean.
    #[arg(long)]
    pub center: Option<String>,
    #[command(flatten)]
    pub params: FamilyParams,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub theorem: Vec<String>,
    /// start:end:step, or a comma-separated list.
    #[arg(long)]
    pub n: String,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    /// Fix M and report the failure probability M(M−1)f instead of M.
    #[arg(long = "M", alias = "m")]
    pub m: Option<f64>,
    #[arg(long, default_value = "mean")]
    pub center: String,
    #[command(flatten)]
    pub family: FamilyParams,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckDatasetArgs {
    pub path: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// mean, origin, cube-center, or comma-separated coordinates.
    #[arg(long, default_value = "mean")]
    pub center: String,
    /// Family assumed to have generated the data, for the expected count.
    #[arg(long)]
    pub assume: Option<String>,
    /// Number of worst pairs to list.
    #[arg(long, default_value_t = 10)]
    pub top: usize,
    #[command(flatten)]
    pub params: FamilyParams,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_count(s: &str) -> Result<u64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !((1.0..1.8e19).contains(&v) && v.fract() == 0.0) {
        return Err(format!("'{s}' is not a positive whole number"));
    }
    Ok(v as u64)
}

/// Runs the command line, writing results to `out`; diagnostics go to
/// standard error. Returns the process exit code.
pub fn run_with<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = e.print();
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    match commands::dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    run_with(args, &mut lock)
}
