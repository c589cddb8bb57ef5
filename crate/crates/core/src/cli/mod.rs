//! Command-line front end.
//!
//! Exit codes: 0 ok, 2 configuration error, 3 overflow, 4 non-convergence,
//! 5 singular Hessian.

mod commands;
mod io;
pub mod model_file;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::Error;

pub use model_file::ModelFile;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_OVERFLOW: i32 = 3;
pub const EXIT_NONCONVERGENCE: i32 = 4;
pub const EXIT_SINGULAR: i32 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self { code: EXIT_CONFIG, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Overflow { .. } => EXIT_OVERFLOW,
            Error::SingularHessian { .. } => EXIT_SINGULAR,
            _ => EXIT_CONFIG,
        };
        Self { code, message: e.to_string() }
    }
}

#[derive(Debug, Parser)]
#[command(name = "archinf", version, about = "Simulate, fit and check ARCH(infinity) models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a return series to CSV (columns t,y).
    Simulate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long = "T")]
        t_len: usize,
        /// Presample length; defaults to min(10 n_w, 100000).
        #[arg(long)]
        burn: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate the model on a CSV series with a `y` column; writes JSON.
    Fit {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0.95)]
        level: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate the fractional moment condition over a grid of rho (TSV to stdout).
    Check {
        #[arg(long)]
        model: PathBuf,
        /// LO:HI:STEP inside (0, 1).
        #[arg(long = "rho-grid")]
        rho_grid: String,
        #[arg(long, default_value_t = crate::process::DEFAULT_MOMENT_NW)]
        nw: usize,
    },
    /// Write psi_1..psi_n and optional derivatives as CSV.
    Weights {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=2))]
        derivs: u8,
        /// Output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo study from a JSON config; writes a JSON report.
    Mc {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (results do not depend on this).
        #[arg(long)]
        threads: Option<usize>,
    },
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Simulate { model, t_len, burn, seed, out } => commands::simulate(&model, t_len, burn, seed, &out),
        Command::Fit { model, data, level, out, starts, seed } => commands::fit(&model, &data, level, &out, starts, seed),
        Command::Check { model, rho_grid, nw } => commands::check(&model, &rho_grid, nw),
        Command::Weights { model, n, derivs, out } => commands::weights(&model, n, derivs, out.as_deref()),
        Command::Mc { config, out, threads } => commands::mc(&config, &out, threads),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}
