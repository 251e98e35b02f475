//! `ezgames`: solve, verify and study Epstein–Zin portfolio games with
//! relative performance concerns from JSON inputs.
//!
//! Exit codes: 0 success, 2 input or validation error, 3 numerical or solver
//! error, 4 a verification or rate check failed.

mod commands;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ezgames_core::Tolerances;

#[derive(Debug)]
pub enum Failure {
    Validation(String),
    Solver(String),
    Verification(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Verification(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Solver(m) | Failure::Verification(m) => m,
        }
    }
}

impl From<ezgames_core::Error> for Failure {
    fn from(e: ezgames_core::Error) -> Self {
        if e.is_validation() {
            Failure::Validation(e.to_string())
        } else {
            Failure::Solver(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ezgames",
    version,
    about = "Epstein-Zin portfolio games with relative performance concerns"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Common {
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Override the number of grid intervals of the horizon.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub grid_n: Option<u64>,
    /// Override a tolerance, e.g. `deviation=1e-6` (repeatable).
    #[arg(long = "tol-override", value_name = "KEY=VAL")]
    pub tol_override: Vec<String>,
}

impl Common {
    pub fn tolerances(&self) -> Result<Tolerances, Failure> {
        Ok(Tolerances::default().with_overrides(&self.tol_override)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve the N-player Nash equilibrium of the `agents` in a game file.
    SolveNe {
        /// Game JSON with `horizon` and `agents` and/or `mfg_atoms`.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Solve the mean-field equilibrium of the `mfg_atoms` in a game file.
    SolveMfg {
        /// Game JSON with `horizon` and `agents` and/or `mfg_atoms`.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Certify a strategy profile: best-reply fixed point, consumption
    /// identity, deviation scans, Bernoulli residuals and, when lambda = 1, a
    /// Monte Carlo value check.
    Verify {
        /// Game JSON with `horizon` and `agents` and/or `mfg_atoms`.
        #[arg(long)]
        input: PathBuf,
        /// Strategy profile to check instead of the solved equilibrium.
        #[arg(long)]
        strategies: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Monte Carlo paths for the time-additive value check.
        #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(2..))]
        paths: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Utility of each player under a strategy profile (the equilibrium by default).
    Value {
        /// Game JSON with `horizon` and `agents` and/or `mfg_atoms`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        strategies: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Finite-N convergence experiments on a symmetric fixture.
    Converge {
        /// Symmetric fixture JSON; the standard fixture when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Player counts, e.g. "10,100,1000".
        #[arg(long)]
        ns: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Common-noise realizations of the wealth experiment.
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
        paths: u64,
        /// Grid intervals of the wealth simulation.
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(2..))]
        sim_grid_n: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Comparative statics of portfolio and consumption, with curve data.
    Statics {
        /// Statics JSON; the reference consumption figure when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::SolveNe { input, common } => commands::solve_ne(&input, &common),
        Command::SolveMfg { input, common } => commands::solve_mfg(&input, &common),
        Command::Verify { input, strategies, seed, paths, common } => {
            verify::run(&input, strategies.as_deref(), seed, paths as usize, &common)
        }
        Command::Value { input, strategies, common } => {
            commands::value(&input, strategies.as_deref(), &common)
        }
        Command::Converge { input, ns, seed, paths, sim_grid_n, common } => commands::converge(
            input.as_deref(),
            ns.as_deref(),
            seed,
            paths as usize,
            sim_grid_n as usize,
            &common,
        ),
        Command::Statics { input, common } => commands::statics(input.as_deref(), &common),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
