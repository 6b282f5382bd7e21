//! Command-line front end for `anomalylab`: scenario files, figure data as
//! CSV, and a self test.

pub mod commands;
pub mod config;
pub mod kpath;
pub mod output;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("oracle check failed: {0}")]
    Oracle(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Oracle(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

pub use commands::{cmd_bands, cmd_calibrate, cmd_current, cmd_drift, cmd_phase_diagram, cmd_selftest};
pub use config::{OracleMode, ScenarioConfig};
pub use kpath::KPath;
pub use output::{Cell, Table};
