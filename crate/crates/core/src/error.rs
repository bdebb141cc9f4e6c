use thiserror::Error;

/// Errors raised by the empowerment library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("horizon too large: {sequences} action sequences exceed the enumeration budget of {budget}; use impoverished mode")]
    HorizonTooLarge { sequences: u128, budget: usize },

    #[error("model is stochastic; use the Blahut-Arimoto path (state_empowerment) instead")]
    NotDeterministic,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("noiseless subchannel (noise covariance eigenvalue {0:e} below 1e-12) gives infinite capacity")]
    NoiselessSubchannel(f64),

    #[error("too many states for exhaustive context search: {states} > {limit}")]
    TooManyStates { states: usize, limit: usize },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid_param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
