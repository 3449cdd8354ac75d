use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range caller input.
    #[error("invalid input: {0}")]
    Input(String),

    /// A distribution or binning could not be built from otherwise valid input.
    #[error("construction failed: {0}")]
    Construction(String),

    #[error("{path}: {message}")]
    SampleFile { path: PathBuf, message: String },

    #[error("{path}: need {required} samples, file holds {available}")]
    InsufficientSamples {
        path: PathBuf,
        required: usize,
        available: usize,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn construction(msg: impl Into<String>) -> Self {
        Error::Construction(msg.into())
    }
}
