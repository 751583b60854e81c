//! Std companion of `magnocool-core`: TOML configs, CSV/JSON output, run
//! directories, a rayon-backed runner and the `magnocool` command line.

// `!(x > 0.0)` style checks are deliberate: they reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};

use magnocool_core::Error;

pub mod cli;
pub mod config;
pub mod output;
pub mod parallel;
pub mod physical;
pub mod validate;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{failed} of {total} validation checks failed")]
    Validation { failed: usize, total: usize },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 0 success; 1 domain/config; 2 instability or runaway heating;
    /// 3 convergence failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e {
                Error::Unstable { .. } | Error::Runaway { .. } | Error::ParametricThreshold { .. } => 2,
                Error::Convergence { .. } | Error::StepUnderflow { .. } => 3,
                Error::Domain { .. }
                | Error::Bracket { .. }
                | Error::Singular { .. }
                | Error::Infeasible
                | Error::Config(_) => 1,
            },
            CliError::Config(_) | CliError::Io { .. } | CliError::Validation { .. } => 1,
        }
    }
}
