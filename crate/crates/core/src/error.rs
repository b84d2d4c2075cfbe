use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid degradation parameters: {0}")]
    InvalidDegradation(String),

    #[error("system is not Hurwitz (max real part of eigenvalues = {max_real:.3e}); norm is infinite")]
    Unstable { max_real: f64 },

    #[error("resolvent (jwI - A) is singular at w = {omega} rad/s")]
    SingularResolvent { omega: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("simulation diverged at step {step} (t = {time} s)")]
    Divergence { step: usize, time: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("conic backend error: {0}")]
    Backend(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }
}
