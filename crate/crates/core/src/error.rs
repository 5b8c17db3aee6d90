use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unreadable file {path}: {reason}")]
    Unreadable { path: PathBuf, reason: String },

    #[error("unsupported image format in {path}: {reason}")]
    UnsupportedImage { path: PathBuf, reason: String },

    #[error("{path}: line {line}: {reason}")]
    Parse {
        path: PathBuf,
        line: u64,
        reason: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("singular stain matrix")]
    SingularMatrix,

    #[error("no tissue: every pixel is brighter than the tissue cutoff")]
    NoTissue,

    #[error("training data contains a single class")]
    SingleClass,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("too dense: could not place dot {placed} after {attempts} attempts")]
    TooDense { placed: usize, attempts: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by the caller's files or arguments, as opposed
    /// to a failure inside a pipeline stage.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Unreadable { .. }
                | Error::UnsupportedImage { .. }
                | Error::Parse { .. }
                | Error::InvalidInput(_)
                | Error::DimensionMismatch { .. }
                | Error::Io(_)
        )
    }
}
