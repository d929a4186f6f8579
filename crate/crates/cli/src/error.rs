use std::io;
use std::path::PathBuf;

use rbi_core::RbiError;
use thiserror::Error;

/// Failures of a CLI command, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration or parameters (exit 2).
    #[error("config error: {0}")]
    Config(String),

    /// Failure while running or writing results (exit 1).
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Runtime(_) => 1,
        }
    }

    pub fn io(path: &PathBuf, err: io::Error) -> Self {
        Self::Runtime(format!("{}: {err}", path.display()))
    }
}

impl From<RbiError> for CliError {
    fn from(err: RbiError) -> Self {
        match err {
            RbiError::InvalidConfig { field, reason } => Self::Config(format!("field `{field}`: {reason}")),
            RbiError::InvalidAlpha(_) | RbiError::InvalidBoundary(_) => Self::Config(err.to_string()),
            other => Self::Runtime(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
