use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("missing input file {path}")]
    MissingFile { path: PathBuf },

    #[error("{path}:{row}: {message}")]
    Schema {
        path: PathBuf,
        /// 1-based data row (header excluded).
        row: usize,
        message: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("validation failed for sku {sku}: {message}")]
    Validation { sku: String, message: String },

    #[error("range error: {0}")]
    Range(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("empty distribution: {0}")]
    EmptyDistribution(String),

    #[error("savings undefined: denominator (actual inventory holding cost) is zero")]
    UndefinedSavings,
}

pub type Result<T> = std::result::Result<T, Error>;
