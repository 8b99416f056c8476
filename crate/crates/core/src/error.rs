use std::path::PathBuf;

use crate::model::ElementId;

/// Errors produced by the library.
///
/// The variants split into two families that callers treat differently:
/// input/parameter problems (bad files, impossible configurations) and run
/// failures (an oracle guard breach or a broken internal invariant).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// The algorithm queried the value oracle on an element outside its ground set.
    #[error("value oracle guard violated: element {0} is not in the ground set")]
    GuardViolation(ElementId),

    /// An internal invariant or an algorithm contract was broken. Always a bug.
    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("instance too large: {size} elements exceeds the cap of {cap}")]
    SizeLimit { size: usize, cap: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// True for errors that mean a run itself failed rather than being misconfigured.
    pub fn is_run_failure(&self) -> bool {
        matches!(self, Error::GuardViolation(_) | Error::Invariant(_))
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
