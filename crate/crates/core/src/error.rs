use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid increment spec: {field}: {reason}")]
    InvalidSpec { field: String, reason: String },

    #[error("unsupported spec: {0}")]
    UnsupportedSpec(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported dimension {dimension}: {reason}")]
    UnsupportedDimension { dimension: usize, reason: String },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("tail exhausted at k = {0}")]
    TailExhausted(usize),

    #[error("invalid config: {field}: {reason}")]
    InvalidConfig { field: String, reason: String },

    #[error("observer `{observer}` failed at step {step}: {reason}")]
    Observer {
        observer: String,
        step: u64,
        reason: String,
    },

    #[error("unknown example `{0}`")]
    UnknownExample(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn spec(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidSpec {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
