use thiserror::Error;

/// Errors shared across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Mismatched dimensions between problem data and an argument.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// A removal rule was asked to pick a link while every link is satisfied.
    #[error("no link violates its constraints; nothing to remove")]
    NothingToRemove,

    /// The exhaustive search refuses instances above its size cap.
    #[error("instance has {links} links; exhaustive search is capped at {max}")]
    TooLarge { links: usize, max: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// Malformed or internally inconsistent input data.
    #[error("invalid instance: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
