use std::path::PathBuf;

use thiserror::Error;

use crate::model::ValidationError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("invalid session: {0}")]
    Validation(#[from] ValidationError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid window [{t0}, {t1}] for session of {duration_s} s")]
    InvalidWindow { t0: f64, t1: f64, duration_s: f64 },
    #[error("unknown channel `{channel}`; valid channels: {}", valid.join(", "))]
    UnknownChannel { channel: String, valid: Vec<String> },
    #[error("stream `{0}` is absent from this session")]
    StreamAbsent(String),
    #[error("no session carries the `{0}` stream")]
    NoEmbeddableSessions(String),
    #[error("synthgen spec: {0}")]
    Spec(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
