use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("kernel evaluated outside its domain at t = {t}")]
    KernelDomain { t: f64 },

    #[error("Adams weights are singular for power-law exponent p = {p} (p must stay away from 1 and 2)")]
    SingularWeights { p: f64 },

    #[error("right-hand side is not finite at step {step}")]
    NonFinite { step: usize },

    #[error("index {index} out of range for a grid with {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("event catalog is empty")]
    EmptyCatalog,

    #[error("invalid event catalog: {0}")]
    InvalidCatalog(String),

    #[error("catalog line {line}: {reason}")]
    CatalogRow { line: usize, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("optimizer: {0}")]
    Optimizer(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
