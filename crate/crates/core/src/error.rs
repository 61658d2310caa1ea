use thiserror::Error;

/// Errors raised by the engines in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A size cap (ground set, word length, series degree, ...) was exceeded.
    #[error("{what} {got} exceeds the configured limit {limit}")]
    SizeLimit {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    /// An index or label is out of range for the covariance spec.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// A pairing block does not match the (p, q, star) pattern needed for the adapted coloring.
    #[error("block {block:?} is not adapted: {reason}")]
    NotAdapted { block: Vec<usize>, reason: String },

    /// Invalid numeric parameters (negative covariance, degenerate Meixner data, ...).
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    /// A documented precondition of an operation does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Parse failure for textual inputs such as eps-words.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
