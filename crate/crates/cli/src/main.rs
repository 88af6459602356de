//! `suprw`: p-values for `H0: R > alpha` from bounded losses.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod input;

use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Overrides the default display precision (4) when `--digits` is not given.
pub const DIGITS_ENV: &str = "SUPRW_DIGITS";

#[derive(Parser, Debug)]
#[command(
    name = "suprw",
    version,
    about = "Super-uniform p-values for the mean of [0,1]-bounded losses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// P-value(s) for one empirical risk, given directly or from a loss file.
    Pvalue(PvalueArgs),
    /// Rounded table of all three p-values over an R̂ grid.
    Compare(CompareArgs),
    /// Unrounded p-value curves for plotting, with a capped-region flag.
    Plotdata(PlotdataArgs),
    /// Run an FWER procedure over an ordered file of p-values.
    Fwer(FwerArgs),
    /// Monte Carlo check that a p-value is super-uniform under H0.
    Validate(ValidateArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodArg {
    Prw,
    Bentkus,
    HoeffdingTight,
    All,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProcedureArg {
    FixedSequence,
    Fallback,
    Bonferroni,
}

#[derive(Args, Debug)]
pub struct PvalueArgs {
    /// Empirical risk; requires --n.
    #[arg(long, conflicts_with = "losses", requires = "n")]
    pub rhat: Option<f64>,
    #[arg(long)]
    pub n: Option<u64>,
    /// CSV with a single `loss` column.
    #[arg(long, required_unless_present = "rhat")]
    pub losses: Option<PathBuf>,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    pub method: MethodArg,
    #[arg(long)]
    pub digits: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Report PRW and Bentkus without the clamp to 1.
    #[arg(long)]
    pub unclamped: bool,
}

#[derive(Args, Debug)]
pub struct CompareArgs {
    #[arg(long, default_value_t = 100)]
    pub n: u64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// `table` (i/660, i = 0..44), `START:STEP:STOP`, or `x1,x2,...`.
    #[arg(long, default_value = "table")]
    pub grid: String,
    #[arg(long)]
    pub digits: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct PlotdataArgs {
    #[arg(long, default_value_t = 100)]
    pub n: u64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value = "0:0.001:1")]
    pub grid: String,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub unclamped: bool,
}

#[derive(Args, Debug)]
pub struct FwerArgs {
    /// CSV with a single `pvalue` column, in the a-priori test order (`-` for stdin).
    pub pvalues: PathBuf,
    #[arg(long, value_enum)]
    pub procedure: ProcedureArg,
    #[arg(long)]
    pub delta: f64,
    /// Fallback weights, comma separated, summing to 1.
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    /// `bernoulli:P`, `beta:A:B` or `discrete:X1,X2,..:P1,P2,..`.
    #[arg(long)]
    pub dist: String,
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = MethodArg::Prw)]
    pub method: MethodArg,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Levels at which `P(p <= delta)` is estimated.
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.05,0.1,0.2")]
    pub delta: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let result = commands::run(cli.command, &mut out);
    let _ = out.flush();
    match result {
        Ok(commands::Status::Success) => ExitCode::SUCCESS,
        Ok(commands::Status::ValidationFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
