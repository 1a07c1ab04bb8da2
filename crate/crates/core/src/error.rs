use std::path::PathBuf;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Two vectors that must share a dimension do not.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// A parameter is outside its mathematical domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// An operation that needs samples received none.
    #[error("empty dataset")]
    EmptyDataset,

    /// A binary dataset file is malformed.
    #[error("{path}: invalid idx data at byte {offset}: {reason}")]
    IdxFormat {
        path: PathBuf,
        offset: u64,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A run produced a non-finite loss and was aborted.
    #[error("divergence: non-finite loss at iteration {iteration}")]
    Divergence { iteration: usize },

    /// A closed-form bound was requested outside its hypotheses.
    #[error("bound hypothesis violated: {condition}")]
    HypothesisViolated { condition: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
