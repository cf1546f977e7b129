use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular")]
    SingularMatrix,

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("map {index} is not contracting (largest singular value {norm})")]
    NotContracting { index: usize, norm: f64 },

    #[error("{0}")]
    Domain(String),

    #[error("axis index {m} out of range for dimension {n}")]
    AxisOutOfRange { m: usize, n: usize },

    #[error("enumeration budget exceeded ({budget} leaves)")]
    BudgetExceeded { budget: u64 },

    #[error("point ({x}, {y}, {z}) lies outside the bounding ball")]
    PointOutsideBall { x: f64, y: f64, z: f64 },

    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {msg}")]
    Semantic { path: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
