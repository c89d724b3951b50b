use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Exact mode was asked to enumerate beyond the configured cap.
    #[error("capacity error: n = {n} exceeds the exact-mode cap of {cap}")]
    Capacity { n: usize, cap: usize },

    /// An internal consistency check on exact data failed.
    #[error("consistency failure: {0}")]
    Consistency(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
