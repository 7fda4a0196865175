use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("ragged input: row {row} has {found} columns, expected {expected}")]
    Shape {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("cannot parse row {row}, column {column}: {cell:?}")]
    Parse {
        row: usize,
        column: usize,
        cell: String,
    },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid arguments: {0}")]
    InvalidArguments(String),

    #[error("index {index} out of range for {len} points")]
    Index { index: usize, len: usize },

    #[error("unknown metric {name:?}; registered metrics: {}", .registered.join(", "))]
    UnknownMetric {
        name: String,
        registered: Vec<String>,
    },

    #[error("configurations {left:?} and {right:?} overlap")]
    DisjointnessViolation { left: Vec<usize>, right: Vec<usize> },

    #[error("C({n}, {k}) does not fit in a 63-bit rank")]
    RankOverflow { n: u64, k: u64 },

    #[error(
        "instance too large: {configurations} configurations exceed the enumeration limit {limit}"
    )]
    InstanceTooLarge { configurations: u128, limit: u128 },

    #[error(
        "instance infeasible: retained partial configurations need ~{estimated_bytes} bytes, budget is {budget_bytes}"
    )]
    MemoryEstimate {
        estimated_bytes: u128,
        budget_bytes: u128,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors that describe an instance the solver refuses on size grounds.
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            Error::InstanceTooLarge { .. }
                | Error::MemoryEstimate { .. }
                | Error::RankOverflow { .. }
        )
    }
}
