use std::io;
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// The config could not be parsed or failed validation.
    #[error("config error: {0}")]
    Config(String),

    #[error("{0}")]
    Compute(#[from] empowerment::Error),

    #[error("cannot {action} {}: {source}", path.display())]
    Io {
        action: &'static str,
        path: PathBuf,
        source: io::Error,
    },
}

impl CliError {
    /// 2 for config problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }

    pub(crate) fn config(path: &str, err: impl std::fmt::Display) -> Self {
        CliError::Config(format!("{path}: {err}"))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
