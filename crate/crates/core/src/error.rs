use thiserror::Error;

use crate::graphs::VertexId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("agents {0} and {1} are constrained but have coincident positions")]
    DegeneratePair(VertexId, VertexId),

    #[error("implied distance {0} is not positive")]
    NonPositiveDistance(f64),

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(
        "{singles} single edges exceed the enumeration limit of {limit}; use the matroid-union rank instead"
    )]
    EnumerationLimit { singles: usize, limit: usize },

    #[error("matroid oracle is inconsistent: {0}")]
    OracleInconsistency(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("unknown id `{0}`")]
    UnknownId(String),

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
