use std::path::PathBuf;

use thiserror::Error;

use crate::stochastic::EmTrace;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a precondition (shape mismatch, out-of-range
    /// parameter, malformed configuration, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A value that must be finite is NaN or infinite.
    #[error("non-finite value: {0}")]
    NonFinite(String),

    /// A matrix required to be symmetric positive semidefinite is not.
    #[error("matrix is not positive semidefinite: {0}")]
    NotPsd(String),

    /// An operation was called with the wrong prior-covariance mode.
    #[error("operation requires {expected} mode")]
    WrongMode { expected: &'static str },

    /// A linear system has no usable solution.
    #[error("singular system: {0}")]
    Singular(String),

    /// A numerical routine failed to produce a usable result.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The EM objective became non-finite. Carries the trace accumulated
    /// up to the failing iteration.
    #[error("EM diverged after {} iteration(s): objective became non-finite", trace.iterations.len())]
    Diverged { trace: EmTrace },

    /// A text file could not be parsed. `line` is 1-based.
    #[error("parse error in {path} at line {line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// An I/O operation failed; the offending path is included.
    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// One or more verification checks failed.
    #[error("verification failed: {0}")]
    VerificationFailed(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
