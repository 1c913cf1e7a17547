//! Library surface of the nmch command-line tool: configuration parsing,
//! CSV output and the subcommand implementations.

pub mod commands;
pub mod config;
pub mod output;

use std::fmt;
use std::path::PathBuf;

#[derive(Debug)]
pub enum AppError {
    /// Bad configuration or arguments (exit code 1).
    Config(String),
    /// Numerical or I/O failure during a run (exit code 2).
    Numerical(String),
    /// Oracle verification mismatch (exit code 3).
    VerifyMismatch(String),
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Config(m) => write!(f, "config error: {m}"),
            AppError::Numerical(m) => write!(f, "numerical error: {m}"),
            AppError::VerifyMismatch(m) => write!(f, "verification mismatch: {m}"),
        }
    }
}

impl std::error::Error for AppError {}

impl From<nmch_core::Error> for AppError {
    fn from(e: nmch_core::Error) -> Self {
        match e {
            nmch_core::Error::InvalidParam(m) => AppError::Config(m),
            other => AppError::Numerical(other.to_string()),
        }
    }
}

impl AppError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) => 1,
            AppError::Numerical(_) => 2,
            AppError::VerifyMismatch(_) => 3,
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    /// Path to a key = value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated measure selection (blp,lpp,rhp,lfs).
    #[arg(long)]
    pub measures: Option<String>,
    /// Time-grid upper end, units 1/J.
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Number of time-grid samples.
    #[arg(long)]
    pub samples: Option<usize>,
}
