use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("non-finite feature value for id {id}")]
    NonFiniteFeature { id: String },

    #[error("need at least {required} rows, got {actual}")]
    TooFewRows { required: usize, actual: usize },

    #[error("cluster count {k} out of range 1..={n}")]
    InvalidK { k: usize, n: usize },

    #[error("Dunn index needs at least two clusters, got {k}")]
    TooFewClusters { k: usize },

    #[error("partitions differ in length: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("unknown scenario {name:?}; valid names: {valid}")]
    UnknownScenario { name: String, valid: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("truth labels do not match panel ids: {0}")]
    TruthMismatch(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
