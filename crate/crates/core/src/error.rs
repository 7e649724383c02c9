use std::fmt;

/// Errors produced anywhere in the toolkit.
///
/// The variants map onto CLI exit codes: usage problems are handled by the
/// argument parser, everything here is a domain-level failure (exit 1).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Arguments violate an operation's precondition.
    #[error("domain error: {0}")]
    Domain(String),
    /// Malformed text input; `line` is 1-based, 0 when not attributable to a line.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// A randomized or combinatorial construction could not satisfy its contract.
    #[error("construction error: {0}")]
    Construction(String),
    /// Unknown fixture or dataset name.
    #[error("lookup error: unknown name `{0}`")]
    Lookup(String),
    /// A numerical estimator could not locate its target.
    #[error("estimation error: {0}")]
    Estimation(String),
    /// Optimizer produced a non-finite objective.
    #[error("non-finite objective: {0}")]
    NonFinite(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl fmt::Display) -> Self {
        Error::Domain(msg.to_string())
    }

    pub(crate) fn parse(line: usize, msg: impl fmt::Display) -> Self {
        Error::Parse {
            line,
            msg: msg.to_string(),
        }
    }
}
