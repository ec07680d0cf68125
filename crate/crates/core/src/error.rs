use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed document (not valid GeoJSON/CSV, wrong feature type, ...).
    #[error("parse error: {0}")]
    Parse(String),

    /// A named field or column is missing.
    #[error("schema error: {0}")]
    Schema(String),

    /// Record-level invariant violation (duplicate ids, negative values, ...).
    #[error("validation error: {0}")]
    Validation(String),

    #[error("geometry error in feature {id}: {reason}")]
    Geometry { id: String, reason: String },

    /// Nearest network node lies beyond the snap tolerance.
    #[error("snap failure: nearest node is {distance_m} m away")]
    SnapFailure { distance_m: f64 },

    /// Caller broke an operation precondition.
    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
