use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid size {nx}x{ny} rejected: both sizes must be even and at least 8")]
    GridSize { nx: usize, ny: usize },

    #[error("box lengths must be positive and finite, got {lx} x {ly}")]
    BoxLength { lx: f64, ly: f64 },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("operation of order {order} needs a zero-mean field, mean coefficient is {mean:e}")]
    NonzeroMean { order: f64, mean: f64 },

    #[error("relaxation parameter eps = {0} outside (0, 1/2]")]
    EpsOutOfRange(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("non-finite value detected at t = {t}: {what}")]
    NonFinite { t: f64, what: String },

    #[error("accumulator has not been fed: {0}")]
    Unfed(String),

    #[error("bad snapshot file: {0}")]
    Snapshot(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
