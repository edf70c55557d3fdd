//! `eemax` — energy-efficiency-optimal power and rate allocation for
//! multicast groups under per-channel interference budgets.
//!
//! Subcommands:
//! - `solve`   — one allocation for a scenario, human summary + optional CSV
//! - `sweep`   — re-solve across a swept parameter, CSV output
//! - `compare` — joint scheme vs power-adaptation-only baseline, CSV output
//! - `verify`  — Monte Carlo and grid-search checks of a solved scenario
//!
//! Every failure class maps to its own exit code (see [`exit_codes`]).

mod commands;
mod output;
mod scenario;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// One exit code per documented failure class.
pub mod exit_codes {
    /// Success (including sweeps with recorded per-point failures).
    pub const OK: u8 = 0;
    /// I/O failure (unreadable scenario, unwritable output).
    pub const IO: u8 = 1;
    /// Scenario parse or validation error.
    pub const PARSE: u8 = 2;
    /// Instance rejected: empty feasible power interval.
    pub const INFEASIBLE: u8 = 3;
    /// Solver hit the iteration cap without converging.
    pub const NON_CONVERGED: u8 = 4;
    /// Numerical failure inside a root search.
    pub const NUMERICAL: u8 = 5;
    /// A verification check failed.
    pub const VERIFICATION: u8 = 6;
    /// A `--assert-trends` monotonicity assertion failed.
    pub const TREND: u8 = 7;
}

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Parse(String),
    Infeasible(String),
    NonConverged,
    Numerical(String),
    Verification(String),
    Trend(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => exit_codes::IO,
            CliError::Parse(_) => exit_codes::PARSE,
            CliError::Infeasible(_) => exit_codes::INFEASIBLE,
            CliError::NonConverged => exit_codes::NON_CONVERGED,
            CliError::Numerical(_) => exit_codes::NUMERICAL,
            CliError::Verification(_) => exit_codes::VERIFICATION,
            CliError::Trend(_) => exit_codes::TREND,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Io(msg) => write!(f, "i/o: {msg}"),
            CliError::Parse(msg) => write!(f, "scenario: {msg}"),
            CliError::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            CliError::NonConverged => write!(f, "solver did not converge within the iteration cap"),
            CliError::Numerical(msg) => write!(f, "numerical: {msg}"),
            CliError::Verification(msg) => write!(f, "verification failed: {msg}"),
            CliError::Trend(msg) => write!(f, "trend assertion failed: {msg}"),
        }
    }
}

/// Map library errors onto the CLI failure classes.
pub fn map_core_err(err: eemax_core::Error) -> CliError {
    use eemax_core::Error;
    match err {
        Error::Infeasible { .. } => CliError::Infeasible(err.to_string()),
        Error::Bracket { .. } | Error::GridCap { .. } => CliError::Numerical(err.to_string()),
        Error::Domain { .. } | Error::Invalid(_) => CliError::Parse(err.to_string()),
    }
}

#[derive(Parser)]
#[command(
    name = "eemax",
    version,
    about = "Energy-efficiency-optimal multicast power/rate allocation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and print the allocation.
    Solve {
        /// Scenario file (TOML); the bundled default is used when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Write the allocation as CSV rows to this path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the solver iteration cap.
        #[arg(long)]
        max_iter: Option<usize>,
        /// Override the solver's relative EE convergence tolerance.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Re-solve across a swept parameter and write one CSV row per group
    /// per sweep value.
    Sweep {
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        /// Swept parameter: user_count, group_count,
        /// interference_threshold or circuit_power (overrides the
        /// scenario's sweep section).
        #[arg(long)]
        param: Option<String>,
        /// Sweep values, comma separated (overrides the scenario).
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// Fail (exit 7) unless the documented monotone trends hold
        /// across the sweep.
        #[arg(long)]
        assert_trends: bool,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Joint power/rate optimization vs power-only at the maximum rate,
    /// one CSV row per sweep value.
    Compare {
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        param: Option<String>,
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Solve, then check the closed-form outage/throughput against a
    /// seeded Monte Carlo simulation and the EE against a grid search.
    Verify {
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Write the check results as CSV to this path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Monte Carlo seed (overrides the scenario).
        #[arg(long)]
        seed: Option<u64>,
        /// Perturb the allocation fed to the Monte Carlo checks. Negative
        /// control: verification must then fail.
        #[arg(long)]
        corrupt_allocation: bool,
        #[arg(long)]
        max_iter: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Solve {
            scenario,
            out,
            max_iter,
            tol,
        } => {
            let scn = scenario::load(scenario.as_deref(), max_iter, tol)?;
            commands::run_solve(&scn, out.as_deref())
        }
        Command::Sweep {
            scenario,
            out,
            param,
            values,
            assert_trends,
            max_iter,
            tol,
        } => {
            let scn = scenario::load(scenario.as_deref(), max_iter, tol)?;
            commands::run_sweep(&scn, param.as_deref(), values, &out, assert_trends)
        }
        Command::Compare {
            scenario,
            out,
            param,
            values,
            max_iter,
            tol,
        } => {
            let scn = scenario::load(scenario.as_deref(), max_iter, tol)?;
            commands::run_compare(&scn, param.as_deref(), values, &out)
        }
        Command::Verify {
            scenario,
            out,
            seed,
            corrupt_allocation,
            max_iter,
            tol,
        } => {
            let scn = scenario::load(scenario.as_deref(), max_iter, tol)?;
            commands::run_verify(&scn, seed, out.as_deref(), corrupt_allocation)
        }
    }
}
