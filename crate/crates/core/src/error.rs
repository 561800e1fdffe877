use std::path::PathBuf;

/// Errors raised by samplers, evaluators and the experiment runner.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid ensemble spec: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("eigensolver failed to converge (sample {sample}, attempt {attempt}): {detail}")]
    EigenFailure {
        sample: u64,
        attempt: u32,
        detail: String,
    },

    #[error("quadrature did not reach tolerance {requested:e} (achieved {achieved:e})")]
    Quadrature { requested: f64, achieved: f64 },

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::EigenFailure { .. } | Error::Quadrature { .. } | Error::Numeric(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
