//! `hotspot` command-line workflows: simulate, check, table, verify, steady.

// `!(x <= y)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] hotspot_core::Error),
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Usage(String),
}

/// Exit codes shared by all verbs.
pub mod exit {
    pub const OK: i32 = 0;
    /// Invalid input, failed run or I/O failure.
    pub const FAILURE: i32 = 1;
    /// The computation ran but the checked property does not hold.
    pub const NOT_SATISFIED: i32 = 2;
    pub const BLOWUP_SUSPECTED: i32 = 3;
}

#[derive(Debug, Parser)]
#[command(name = "hotspot", version, about = "Crime hotspot chemotaxis simulator and condition calculators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one or more JSON-configured simulations (concurrently when several are given).
    Simulate {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
    },
    /// Evaluate the global-existence conditions and print a JSON report.
    Check(commands::CheckArgs),
    /// Print gamma and the critical attractiveness for each diffusivity.
    Table(commands::TableArgs),
    /// Probe the functional inequalities on seeded random cosine fields.
    Verify(commands::VerifyArgs),
    /// Print the homogeneous steady state.
    Steady(commands::SteadyArgs),
}

/// Parses `args` and runs the selected verb, returning the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::FAILURE } else { exit::OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate { configs } => Ok(commands::simulate(&configs)),
        Command::Check(a) => commands::check(&a),
        Command::Table(a) => commands::table(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Steady(a) => commands::steady(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit::FAILURE
        }
    }
}
