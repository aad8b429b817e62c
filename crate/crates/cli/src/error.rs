use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error(transparent)]
    Domain(#[from] qsmatch_core::Error),

    #[error("decomposition residual {0:.3e} exceeds 1e-9")]
    Residual(f64),
}

impl CliError {
    /// 0 success, 1 domain error, 2 usage, configuration or input error.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Domain(_) | CliError::Residual(_) => 1,
            CliError::Usage(_) | CliError::Config(_) | CliError::Io { .. } | CliError::Input { .. } => 2,
        }
    }

    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn input(path: &Path, message: impl ToString) -> Self {
        CliError::Input {
            path: path.to_path_buf(),
            message: message.to_string(),
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
