//! Config-driven experiment runner: constants self-check, QFI time scans,
//! ultimate-bound sweeps and adaptive-estimation ensembles, written as CSV.

pub mod commands;
pub mod config;
pub mod format;

use thiserror::Error;

pub use commands::{
    cmd_adaptive, cmd_bound_sweep, cmd_constants, cmd_qfi_scan, run, AdaptiveOutput, ConstantRow, ConstantsReport,
    QfiRow, QfiScan, SweepRow,
};
pub use config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("self-check failed: {0}")]
    SelfCheck(String),
    #[error(transparent)]
    Core(#[from] qprobe_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// A core validation error surfaced while building objects from a config.
    pub fn invalid(err: qprobe_core::Error) -> Self {
        CliError::Config(err.to_string())
    }

    /// 2 for config errors, 3 for self-check failures, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::SelfCheck(_) => 3,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
