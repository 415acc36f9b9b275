use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the toolkit.
///
/// The variants mirror the failure classes callers need to tell apart: bad
/// shapes, states that violate a physical or numerical guard, iterative
/// methods that did not converge, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("no convergence after {iterations} iterations (last energy {last_energy})")]
    Convergence { iterations: usize, last_energy: f64 },

    #[error("capability error: {0}")]
    Capability(String),

    #[error("coverage error: {0}")]
    Coverage(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("format error in {path}: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Wraps the error with a short description of what was being attempted.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context { context: context.into(), source: Box::new(self) }
    }

    /// The innermost error, with all context layers stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::Context { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for errors caused by how the toolkit was invoked rather than by
    /// the numbers it was asked to process.
    pub fn is_usage(&self) -> bool {
        matches!(self.root(), Error::Usage(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
