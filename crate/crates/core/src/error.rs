use thiserror::Error;

use crate::trajectory::format::FormatError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Format(#[from] FormatError),

    #[error("degenerate trajectory: T = {rows}, at least 2 states are required")]
    DegenerateTrajectory { rows: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("labels contain a single class; both correct and incorrect instances are required")]
    SingleClass,

    #[error("malformed table: {0}")]
    Table(String),

    #[error("malformed model: {0}")]
    Model(String),

    #[error("numerical failure: {0}")]
    Computation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Computation,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Computation(_) => ErrorKind::Computation,
            _ => ErrorKind::Validation,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Table(err.to_string())
    }
}
