//! Batch experiment harness around the fairwatch library.
//!
//! An experiment is described by a flat `key = value` config file and run
//! to a CSV artifact. Five experiment kinds are supported: `simulate`,
//! `monitor`, `enforce`, `coverage`, and `synthesize-shield`. Outputs are
//! deterministic for a fixed config (including the seed): re-running a
//! config reproduces the artifact byte for byte, and every artifact
//! carries the hash of the effective config for post-hoc audit.

mod config;
mod run;

pub use config::{Config, ConfigError};
pub use run::{run, RunSummary};

use std::fmt;
use std::path::PathBuf;

/// Harness errors, each mapped to a process exit code.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Invalid or inconsistent configuration (exit 2).
    Config(String),
    /// The instance admits no sound enforcer (exit 3).
    Infeasible(String),
    /// An instance-size cap was exceeded (exit 4).
    Resource(String),
    /// Filesystem failure (exit 1).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io(_) => 1,
            Self::Config(_) => 2,
            Self::Infeasible(_) => 3,
            Self::Resource(_) => 4,
        }
    }

    /// Machine-parseable one-line code.
    pub fn code(&self) -> &'static str {
        match self {
            Self::Io(_) => "E_IO",
            Self::Config(_) => "E_CONFIG",
            Self::Infeasible(_) => "E_INFEASIBLE",
            Self::Resource(_) => "E_RESOURCE",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            Self::Config(m) | Self::Infeasible(m) | Self::Resource(m) | Self::Io(m) => m,
        };
        write!(f, "{} {}", self.code(), msg)
    }
}

impl std::error::Error for CliError {}

/// One resolved invocation: config path plus command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Invocation {
    pub config_path: PathBuf,
    pub seed_override: Option<u64>,
    pub out_override: Option<PathBuf>,
    pub jobs: Option<usize>,
}
