use thiserror::Error;

/// Errors produced anywhere in the analysis pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("input is empty (no header or no data rows)")]
    EmptyFile,

    #[error("missing required column `{0}`")]
    MissingColumn(String),

    #[error("row {row}: invalid {field} label `{value}` (allowed: {allowed})")]
    BadLabel {
        row: usize,
        field: &'static str,
        value: String,
        allowed: String,
    },

    #[error("row {row}: column `{column}` is not a finite number: `{value}`")]
    NonNumeric { row: usize, column: String, value: String },

    #[error("row {row}: duplicate obs_id {obs_id}")]
    DuplicateId { row: usize, obs_id: u64 },

    #[error("no linear-phase rows remain after filtering")]
    EmptyAfterFilter,

    #[error("cannot process an empty column")]
    EmptyColumn,

    #[error("delta is undefined when the M1 mean is zero")]
    DivisionByZero,

    #[error("trajectory needs at least 2 points, got {0}")]
    TooFewPoints(usize),

    #[error("k = {k} is too large for {n} points (need {constraint})")]
    KTooLarge {
        k: usize,
        n: usize,
        constraint: &'static str,
    },

    #[error("curve fit for min_dist = {min_dist}, spread = {spread} did not converge (rms residual {residual:.3e})")]
    FitDiverged { min_dist: f64, spread: f64, residual: f64 },

    #[error("embedding produced non-finite coordinates")]
    NonFinite,

    #[error("condition {0} is missing from the score summaries or embedding")]
    MissingCondition(String),

    #[error("session mismatch: {0}")]
    SessionMismatch(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
