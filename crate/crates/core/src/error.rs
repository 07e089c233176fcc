use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("insufficient window: {0}")]
    InsufficientWindow(String),

    #[error("window of {requested} points exceeds the cap of {cap}")]
    ResourceCap { requested: u128, cap: u64 },

    #[error("point is not on layer {layer}")]
    NotOnLayer { layer: i64 },

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// Whether the error comes from window sizing rather than bad input.
    pub fn is_window_error(&self) -> bool {
        matches!(self, Error::InsufficientWindow(_) | Error::ResourceCap { .. })
    }
}
