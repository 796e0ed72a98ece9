//! Error type shared by every module of the crate.

use std::fmt;
use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by simulation, recovery, analytics and I/O operations.
#[derive(Debug)]
pub enum Error {
    /// An argument violated a documented precondition.
    InvalidArgument(String),
    /// Threshold calibration saw a statistic distribution it cannot quantile
    /// (all calibration statistics equal, or too much mass at the maximum).
    DegenerateCalibration(String),
    /// A numerical routine failed to converge to its requested tolerance.
    NumericalFailure(String),
    /// File I/O failed; carries the path for context.
    Io { path: PathBuf, source: std::io::Error },
    /// A lower-level error wrapped with pipeline context (sweep point, trial).
    Context { context: String, source: Box<Error> },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Wraps `self` with a context string describing where it happened.
    pub fn in_context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::DegenerateCalibration(msg) => write!(f, "degenerate calibration: {msg}"),
            Error::NumericalFailure(msg) => write!(f, "numerical failure: {msg}"),
            Error::Io { path, source } => write!(f, "I/O error on {}: {source}", path.display()),
            Error::Context { context, source } => write!(f, "{context}: {source}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io { source, .. } => Some(source),
            Error::Context { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
