use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the domain of an encoder (NaN, non-positive scale, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Caller misuse: wrong lengths, mismatched shapes, bad arguments.
    #[error("usage error: {0}")]
    Usage(String),

    /// Malformed serialized data.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    /// A datapath invariant (accumulator width, route equivalence) was broken.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn format(offset: u64, message: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: message.into(),
        }
    }
}
