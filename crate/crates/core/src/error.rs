use thiserror::Error;

use crate::index::NodeId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("cannot build an index over an empty point set")]
    EmptyInput,

    #[error("fanout must be at least 2, got {0}")]
    InvalidFanout(usize),

    #[error("unknown node id {0:?}")]
    UnknownNode(NodeId),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("k must satisfy 1 <= k <= {available}, got {k}")]
    KOutOfRange { k: usize, available: usize },

    #[error(
        "exhaustive search over C({n}, {k}) subsets exceeds the limit of {limit}; use the greedy selector instead"
    )]
    SearchTooLarge { n: usize, k: usize, limit: u64 },

    #[error("csv row {row}: {message}")]
    Csv { row: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
