use thiserror::Error;

#[derive(Debug, Error)]
pub enum NeuralError {
    #[error("input dimension mismatch: network expects {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("network shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("tau must lie in (0, 1], got {0}")]
    InvalidTau(f64),

    #[error("stale forward trace: parameters changed since the trace was recorded")]
    StaleTrace,

    #[error("corrupt weight file: {0}")]
    CorruptFile(String),

    #[error("unsupported weight file version {0}")]
    UnsupportedVersion(u32),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
