use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("invalid setup: {0}")]
    InvalidSetup(String),
    #[error("flagged inconsistency: {0}")]
    FlaggedInconsistency(String),
    #[error("scheme violation: {0}")]
    SchemeViolation(String),
    #[error("step failure: {0}")]
    StepFailure(String),
    #[error("temperature positivity violated: {0}")]
    PositivityViolation(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("internal error: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid_param(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
