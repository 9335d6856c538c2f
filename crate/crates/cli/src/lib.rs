//! Library backing the `coastal` command-line harness: experiment
//! configuration, run orchestration, the eps-sweep convergence comparison
//! and deterministic artifact writing.
//!
//! Every invocation with identical configuration and inputs produces
//! byte-identical outputs: run directories are named by a hash of the
//! canonical configuration, report maps are ordered, float formatting is
//! fixed, and sweep members write only inside their own directories.

pub mod compare;
pub mod config;
pub mod output;
pub mod residual;
pub mod runner;
pub mod scales_cmd;

use std::fmt;

/// Harness errors carrying the process exit code contract:
/// 2 configuration, 3 solver abort, 4 partial sweep.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Solver(String),
    PartialSweep(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
            CliError::PartialSweep(_) => 4,
        }
    }

    pub fn io(context: &str, e: std::io::Error) -> Self {
        CliError::Config(format!("{context}: {e}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Solver(m) => write!(f, "solver abort: {m}"),
            CliError::PartialSweep(m) => write!(f, "partial sweep: {m}"),
        }
    }
}

impl std::error::Error for CliError {}
