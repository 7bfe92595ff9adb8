use thiserror::Error;

/// Errors produced by the clustering and data-generation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violates a precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The input data admits no meaningful clustering (e.g. all rows identical).
    #[error("degenerate data: {0}")]
    DegenerateData(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateData(msg.into())
    }
}
