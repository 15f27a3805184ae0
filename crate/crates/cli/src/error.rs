use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] stoq_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version {0}")]
    Version(u32),
    #[error("instance {index} ({kind}) is incompatible with suite {suite}")]
    Incompatible { index: usize, kind: String, suite: String },
    #[error("{0}")]
    Invalid(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;
