use std::io;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A density, weight table or experiment configuration is malformed.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// A numeric parameter is outside the range an operation accepts.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A numerical routine was asked to evaluate outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A constructive tree could not be assembled from the graph's edges.
    #[error("construction violation: {0}")]
    ConstructionViolation(String),

    /// The request is valid but deliberately refused (e.g. exhaustive search too large).
    #[error("refused: {0}")]
    Refused(String),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
