use thiserror::Error;

/// Errors raised anywhere in the training engine.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller passed an argument that violates an operation's precondition.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// An object was used in a state that does not support the request.
    #[error("invalid state: {0}")]
    State(String),
    /// A non-finite value appeared in a loss or gradient.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// The requested quantity does not exist for this problem.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A text file could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// The metric is mathematically undefined for the input.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}
