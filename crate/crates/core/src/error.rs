use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("value {value} is not on the dyadic grid of {max} (checked levels 0..={max_level})")]
    NoLevel { value: f64, max: f64, max_level: u32 },

    #[error("goal lies on the backward axis of the tip; the connecting plane is undefined")]
    UndefinedDirection,

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid problem instance: {0}")]
    Validation(String),

    #[error("invalid planner configuration: {0}")]
    Config(String),

    #[error("test-case generation exhausted after {attempts} attempts ({accepted} of {requested} cases accepted)")]
    Exhausted {
        attempts: usize,
        accepted: usize,
        requested: usize,
    },

    #[error("I/O error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
