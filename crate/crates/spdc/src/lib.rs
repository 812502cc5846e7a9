//! Command-line front end for `spdc-core`: strict TOML configs, CSV and
//! SVG output, parameter sweeps and a self-test runner.

use std::path::PathBuf;

pub mod commands;
pub mod config;
pub mod output;
pub mod selftest;
pub mod svg;

pub use commands::{run, Command, Options};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at {path}: {msg}")]
    Config { path: String, msg: String },
    #[error(transparent)]
    Core(#[from] spdc_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    /// 2 for bad input, 3 for numerical non-convergence, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Core(e) if e.is_validation() => 2,
            CliError::Core(_) => 3,
            CliError::Io { .. } | CliError::Failed(_) => 1,
        }
    }
}
