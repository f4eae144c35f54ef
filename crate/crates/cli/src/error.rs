use thiserror::Error;

/// Failures of a CLI command, split by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed input (exit code 2).
    #[error("{0}")]
    Input(String),
    /// Anything else (exit code 1).
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl From<st2e_core::Error> for CliError {
    fn from(e: st2e_core::Error) -> Self {
        use st2e_core::Error::*;
        match e {
            NotPositiveDefinite => CliError::Internal(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Internal(format!("I/O error: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Internal(format!("JSON error: {e}"))
    }
}

pub type CliResult<T> = Result<T, CliError>;
