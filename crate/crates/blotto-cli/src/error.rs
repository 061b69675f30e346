use std::process::ExitCode;

use thiserror::Error;

/// CLI-level failures, partitioned by exit code: configuration problems
/// (bad flags, unreadable files, invalid games) exit with 2, numerical
/// failures during computation with 3.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Config(_) => ExitCode::from(2),
            CliError::Numerical(_) => ExitCode::from(3),
            CliError::Io(_) => ExitCode::from(3),
        }
    }
}

impl From<blotto_core::Error> for CliError {
    fn from(e: blotto_core::Error) -> Self {
        use blotto_core::Error::*;
        match &e {
            InvalidGame(_)
            | LengthMismatch { .. }
            | GridTooSmall(_)
            | EmptyBatch
            | AlphaOutOfRange { .. }
            | EpsOutOfRange { .. } => CliError::Config(e.to_string()),
            InfeasibleAllocation { .. } | NotARoot { .. } | NumericalFailure(_) => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
