use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} items, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("query point coincides with a ball center")]
    CoincidentPoint,

    #[error("unsupported dimension d={0} (exact coverage supports d in {{2, 3}})")]
    UnsupportedDimension(usize),

    #[error("radius law has unbounded support and no truncation level was given")]
    UnboundedLaw,

    #[error("region cannot be {k}-covered by {points} points")]
    Uncoverable { k: usize, points: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
