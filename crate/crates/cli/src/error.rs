//! Harness-level errors, mapped onto process exit codes by `main`.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// The experiment spec or command line is invalid (exit code 1).
    /// Messages name the offending field.
    #[error("config error: {0}")]
    Config(String),
    /// Simulation or I/O failed after validation (exit code 2).
    #[error("runtime error: {0}")]
    Runtime(String),
    /// A verification suite found a violated inequality (exit code 3).
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 1,
            HarnessError::Runtime(_) => 2,
            HarnessError::VerificationFailed(_) => 3,
        }
    }

    pub fn config(msg: impl Into<String>) -> Self {
        HarnessError::Config(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        HarnessError::Runtime(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
