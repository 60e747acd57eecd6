use thiserror::Error;

/// Errors raised by model construction and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// Inconsistent inputs: mismatched message sets, malformed tables, bad parameters.
    #[error("configuration error: {0}")]
    Config(String),

    /// A distribution whose masses or knots violate the invariants.
    #[error("invalid distribution: {0}")]
    Distribution(String),

    /// Conditioning on a message that is sent with probability zero.
    #[error("message `{0}` is sent with probability zero")]
    ZeroProbabilityMessage(String),

    /// A constructor needs more message labels than were supplied.
    #[error("message capacity: need at least {needed} labels, got {available}")]
    Capacity { needed: usize, available: usize },

    /// An operation was called outside its documented domain.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Left tendency requested for a strategy lacking the three properties.
    #[error("left tendency is undefined: {0}")]
    UndefinedLeftTendency(String),
}

pub type Result<T> = std::result::Result<T, ModelError>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(ModelError::Config(msg.into()))
}
