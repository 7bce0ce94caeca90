//! Batch front end: ingestion -> fitting -> reporting -> cycle
//! estimation -> simulation, emitting machine-readable results and
//! plot-ready data files.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical
//! non-convergence.

mod commands;
mod records;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gpdcycle::Error;

#[derive(Parser)]
#[command(
    name = "gpdcycle",
    version,
    about = "Fit two-segment income distributions per year, compute inequality metrics, \
             and estimate growth-cycle coefficients",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit every year in a `year,income` CSV and write per-year records
    /// plus a summary table
    Fit(FitArgs),
    /// Estimate cycle coefficients, center, and period from per-year fits
    /// or a `year,u,v` CSV
    Cycle(CycleArgs),
    /// Integrate the Lotka-Volterra system and write the trajectory
    Simulate(SimulateArgs),
    /// Draw synthetic incomes from a parameterized distribution
    Sample(SampleArgs),
    /// Re-emit the summary table and per-year Lorenz curves from fit records
    Report(ReportArgs),
}

#[derive(Args)]
pub struct FitArgs {
    /// Input CSV with header `year,income`
    #[arg(long)]
    pub input: PathBuf,
    /// Run configuration: `minwage.<year> = <wage>` lines, optional
    /// `x_d_fraction` and `xt.<year>` entries
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub outdir: PathBuf,
    /// Iteration cap for each damped Gauss-Newton run
    #[arg(long, default_value_t = 200)]
    pub max_iterations: usize,
    /// Fix the threshold for a year instead of searching, e.g. `--xt 2002=2.135`
    #[arg(long, value_parser = parse_year_value)]
    pub xt: Vec<(i32, f64)>,
}

#[derive(Args)]
pub struct CycleArgs {
    /// Directory holding fit_<year>.kv records
    #[arg(long, conflicts_with = "uv")]
    pub fits: Option<PathBuf>,
    /// A `year,u,v` CSV (as written by this tool)
    #[arg(long)]
    pub uv: Option<PathBuf>,
    #[arg(long)]
    pub outdir: PathBuf,
}

#[derive(Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub a1: f64,
    #[arg(long)]
    pub b1: f64,
    #[arg(long)]
    pub a2: f64,
    #[arg(long)]
    pub b2: f64,
    #[arg(long)]
    pub x0: f64,
    #[arg(long)]
    pub y0: f64,
    /// Step size in years
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Duration in years
    #[arg(long)]
    pub t_end: f64,
    #[arg(long)]
    pub outdir: PathBuf,
}

#[derive(Args)]
pub struct SampleArgs {
    /// Segment boundary x_t in normalized units
    #[arg(long)]
    pub threshold: f64,
    #[arg(long)]
    pub eta: f64,
    #[arg(long)]
    pub b: f64,
    #[arg(long)]
    pub alpha: f64,
    /// Number of draws
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub seed: u64,
    /// Year written into the output rows
    #[arg(long, default_value_t = 0)]
    pub year: i32,
    /// Scale factor applied to every draw, e.g. a currency mean income
    #[arg(long, default_value_t = 1.0)]
    pub mean_income: f64,
    #[arg(long)]
    pub outdir: PathBuf,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Directory holding fit_<year>.kv records
    #[arg(long)]
    pub fits: PathBuf,
    #[arg(long)]
    pub outdir: PathBuf,
    /// Number of quantile grid points per Lorenz curve
    #[arg(long, default_value_t = 200)]
    pub grid_points: usize,
}

fn parse_year_value(raw: &str) -> Result<(i32, f64), String> {
    let (year, value) = raw
        .split_once('=')
        .ok_or_else(|| format!("expected YEAR=VALUE, got `{raw}`"))?;
    let year: i32 = year.trim().parse().map_err(|_| format!("bad year in `{raw}`"))?;
    let value: f64 = value.trim().parse().map_err(|_| format!("bad value in `{raw}`"))?;
    Ok((year, value))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help/version requests are not usage errors
            use clap::error::ErrorKind;
            let _ = err.print();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };

    let result = match &cli.command {
        Command::Fit(args) => commands::cmd_fit(args),
        Command::Cycle(args) => commands::cmd_cycle(args),
        Command::Simulate(args) => commands::cmd_simulate(args),
        Command::Sample(args) => commands::cmd_sample(args),
        Command::Report(args) => commands::cmd_report(args),
    };

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::NonConvergence(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
