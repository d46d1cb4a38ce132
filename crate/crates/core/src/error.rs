use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("instance does not match schema at attribute `{attribute}` (position {position}): {reason}")]
    SchemaMismatch {
        attribute: String,
        position: usize,
        reason: String,
    },

    #[error("invalid schema: {0}")]
    InvalidSchema(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("value {value} is outside the detector bounds [0, 1]")]
    OutOfBounds { value: f64 },

    #[error("synthetic instances cannot be stored in the window")]
    SyntheticObserved,

    #[error("sub-group {key} holds {have} natural samples, {need} required for oversampling")]
    GroupTooSmall { key: usize, have: usize, need: usize },

    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("{malformed} of {total} rows in {path} are malformed (more than 1%); first problem: {first}")]
    TooManyMalformed {
        path: PathBuf,
        malformed: usize,
        total: usize,
        first: String,
    },

    #[error("infeasible stream parameters: {0}")]
    InfeasibleStream(String),

    #[error("run for seed {seed} failed: {source}")]
    SeedFailed {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("report mismatch: {0}")]
    ReportMismatch(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("toml parse error in {path}: {source}")]
    Toml {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
