use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty rectangle on axis {axis}: lo {lo} >= hi {hi}")]
    EmptyRect { axis: usize, lo: i64, hi: i64 },

    #[error("degenerate query: {0}")]
    Degenerate(&'static str),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),

    #[error("invalid exponent: {0}")]
    InvalidExponent(String),

    #[error("window does not cover the rectangle family")]
    WindowTooSmall,

    #[error("field is identically zero")]
    ZeroField,

    #[error("level must be positive, got {0}")]
    InvalidLevel(f64),

    #[error("selection does not belong to this rectangle list: {0}")]
    SelectionMismatch(String),

    #[error("resource limit: {0}")]
    ResourceLimit(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
