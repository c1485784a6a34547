//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

/// Errors produced by data ingestion, model fitting, and detection.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },

    #[error("duplicate timestamp {timestamp} in series {id}")]
    DuplicateTimestamp { id: String, timestamp: i64 },

    #[error("series {id}: gap of {gap}s at timestamp {timestamp} is not a multiple of the {interval}s interval")]
    IrregularSpacing {
        id: String,
        timestamp: i64,
        gap: i64,
        interval: i64,
    },

    #[error("empty series")]
    EmptySeries,

    #[error("constant series: standard deviation is zero")]
    ConstantSeries,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("out-of-order timestamp {got} (last seen {last})")]
    OutOfOrderTimestamp { got: i64, last: i64 },

    #[error("timestamp {got} does not fall on the {interval}s grid after {last}")]
    MisalignedTimestamp { got: i64, last: i64, interval: i64 },

    #[error("interval mismatch: pipeline expects {expected}s, series has {got}s")]
    IntervalMismatch { expected: i64, got: i64 },

    #[error("learner {learner}: {source}")]
    Learner {
        learner: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}

impl Error {
    /// Wrap an error with the name of the learner it came from.
    pub fn for_learner(learner: &'static str, source: Error) -> Self {
        Error::Learner {
            learner,
            source: Box::new(source),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
