//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must be square; got {rows} rows with a row of length {cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix entries must be finite")]
    NonFiniteEntry,

    #[error("declared dimension m = {declared} does not match {actual} rows")]
    DimensionMismatchJson { declared: usize, actual: usize },

    #[error("permanent limited to m <= {max}; got m = {m}")]
    PermanentTooLarge { m: usize, max: usize },

    #[error("mode count {m} is not a power of two >= 2; block doubling only reaches m = 2^k")]
    UnsupportedModeCount { m: usize },

    #[error("{what} = {value} out of range for {m} modes")]
    IndexOutOfRange {
        what: &'static str,
        value: usize,
        m: usize,
    },

    #[error("invalid mode pair ({i}, {j}): indices must be distinct")]
    InvalidModePair { i: usize, j: usize },

    #[error("{name} = {value} outside [{lo}, {hi}]")]
    OutOfDomain {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("grouping does not match this network and input: {reason}")]
    GroupingMismatch { reason: String },

    #[error("degenerate grouping: zero column product at output mode {mode}")]
    DegenerateGrouping { mode: usize },

    #[error("invalid source configuration: {reason}")]
    InvalidSource { reason: String },

    #[error("dimension mismatch: {reason}")]
    DimensionMismatch { reason: String },

    #[error("decomposition failed: {reason}")]
    DecompositionFailed { reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("internal consistency failure: {reason}")]
    Internal { reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures that indicate a bug in the artifact rather than bad
    /// user input; the CLI maps these to exit code 2.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            Error::Internal { .. } | Error::DecompositionFailed { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
