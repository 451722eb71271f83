use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("Hilbert space mismatch: {0}")]
    SpecMismatch(String),

    #[error(
        "unstable squeezing parameters: delta_m = {delta_m:e} rad/s, two-magnon = {two_magnon:e} rad/s, \
         stability margin (delta_m - |K|)/delta_m = {margin:.6}"
    )]
    Unstable { delta_m: f64, two_magnon: f64, margin: f64 },

    #[error("singular detuning: {0}")]
    SingularDetuning(String),

    #[error("operator is not hermitian (max |A - A^dag| = {0:e})")]
    NonHermitian(f64),

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("integration step {step:e} s violates step * (spectral radius + max rate) <= {limit} (value {value:.4})")]
    StepSize { step: f64, value: f64, limit: f64 },

    #[error("diagnostics failure: {0}")]
    Diagnostics(String),

    #[error("invalid configuration at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("internal error: {0}")]
    Internal(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
