use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam { field: &'static str, reason: String },

    #[error("quadrature did not converge after {nodes} nodes (last relative change {delta:e})")]
    Quadrature { nodes: usize, delta: f64 },

    #[error("channel has no energy on the direct links")]
    ZeroEnergy,

    #[error("codebook index {index} out of range for codebook of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("non-finite value in transfer function at subcarrier {subcarrier}")]
    NonFinite { subcarrier: usize },

    #[error("{context}: {message}")]
    Parse { context: String, message: String },

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            field,
            reason: reason.into(),
        }
    }
}
