use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A distribution or model parameter is outside its domain.
    #[error("parameter domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Cholesky factorization failed even after the jitter schedule.
    #[error("matrix is not numerically positive definite (dimension {dim}, last jitter {jitter:e})")]
    Factorization { dim: usize, jitter: f64 },

    #[error("degenerate categorical weights: {0}")]
    Degenerate(String),

    #[error("invalid dataset: {0}")]
    InvalidData(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("chain is empty")]
    EmptyChain,

    #[error("AUROC needs at least one positive and one negative label")]
    DegenerateLabels,

    #[error("manifest mismatch in {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Short machine-readable tag used by the CLI error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::DimensionMismatch(_) => "dimension",
            Error::Factorization { .. } => "factorization",
            Error::Degenerate(_) => "degenerate",
            Error::InvalidData(_) => "data",
            Error::Parse { .. } => "parse",
            Error::Config(_) => "config",
            Error::EmptyChain => "empty-chain",
            Error::DegenerateLabels => "labels",
            Error::Manifest { .. } => "manifest",
            Error::Io { .. } => "io",
        }
    }

    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Factorization { .. } | Error::Degenerate(_))
    }
}
