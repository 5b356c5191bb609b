//! Experiment runner: configs, run directories, reports and exports.

pub mod config;
pub mod export;
pub mod report;
pub mod run;
pub mod store;

use thiserror::Error;

/// A failed command, classified by process exit status.
#[derive(Debug, Error)]
pub enum Failure {
    /// Bad arguments, invalid configs or missing inputs.
    #[error("{0}")]
    Usage(String),
    /// At least one run stopped on a numeric error.
    #[error("{0}")]
    Diverged(String),
    #[error("{0}")]
    Other(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Diverged(_) => 3,
            Failure::Other(_) => 1,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.to_string())
    }
}

impl From<gapinn::Error> for Failure {
    fn from(e: gapinn::Error) -> Self {
        match e {
            gapinn::Error::Argument(_) | gapinn::Error::Parse { .. } => Failure::Usage(e.to_string()),
            gapinn::Error::Numeric(_) => Failure::Diverged(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Usage(msg.into()))
}
