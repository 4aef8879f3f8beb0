//! Std companion to `algpois-core`: scenario files, the polynomial parser,
//! CSV/SVG/JSON output and the verification suites behind the `algpois`
//! binary.

pub mod config;
pub mod export;
pub mod polyparse;
pub mod report;
pub mod suites;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("{0}")]
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 3,
            CliError::Io(_) | CliError::Compute(_) => 1,
        }
    }
}

/// Process exit code for a finished report.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_RESIDUAL: i32 = 2;
