use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cycle detected: {0}")]
    Cycle(String),

    #[error("multiple roots: nodes {0} and {1} have no parent")]
    MultipleRoots(i64, i64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("malformed tree: {0}")]
    Malformed(String),

    #[error("invalid node index {index} (tree has {len} nodes)")]
    InvalidIndex { index: usize, len: usize },

    #[error("incompatible kernel spec: {0}")]
    IncompatibleSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("normalization degenerate for scalar linear kernel {0}")]
    ScalarLinearNormalization(String),

    #[error("non-positive diagonal entry {value} for tree {id}")]
    NonPositiveDiagonal { id: String, value: f64 },

    #[error("matrix is not symmetric: |G[{i}][{j}] - G[{j}][{i}]| = {diff:e}")]
    Asymmetric { i: usize, j: usize, diff: f64 },

    #[error("id mismatch: {0}")]
    IdMismatch(String),

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("gram file: {0}")]
    GramFormat(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
