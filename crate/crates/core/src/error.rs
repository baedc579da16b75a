use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("pixel {index} out of range [{lo}, {hi}]: {value}")]
    PixelOutOfRange {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("label is not a valid distribution: {0}")]
    InvalidLabel(String),

    #[error("mix weights invalid: {0}")]
    InvalidWeights(String),

    #[error("not a valid mixed label: {nonzero} nonzero entries (expected 1 or 2)")]
    InvalidMixedLabel { nonzero: usize },

    #[error("parse error in {field}: {message}")]
    Parse { field: String, message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("clique set already contains every encoding")]
    InsertExhausted,

    #[error("clustering failed: {0}")]
    Clustering(String),

    #[error("flow network infeasible: routed {routed} of {required} units")]
    InfeasibleFlow { routed: i64, required: i64 },

    #[error("empty clique for source {0}")]
    EmptyClique(usize),

    #[error("objective became NaN at iteration {0}")]
    NanObjective(usize),

    #[error("public pool has {pool} images but k={k} needs {needed}")]
    PoolTooSmall { pool: usize, k: usize, needed: usize },

    #[error("recovered secrets are unverified; run the search with verification first")]
    UnverifiedSecrets,

    #[error("rejection sampling exceeded its draw budget of {0}")]
    RejectionBudget(u64),

    #[error("training budget exhausted: {0}")]
    TrainingBudget(String),

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
