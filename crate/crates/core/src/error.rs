use thiserror::Error;

/// Errors surfaced by the toolkit. Bound violations are not errors: they
/// are reported as check outcomes so callers can tell them apart.
#[derive(Debug, Error)]
pub enum Error {
    #[error("budget exceeded in {what}: limit {limit}")]
    BudgetExceeded { what: &'static str, limit: u64 },

    #[error("precondition unmet: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cannot parse rational {input:?}: {reason}")]
    ParseRational { input: String, reason: &'static str },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition(msg: impl Into<String>) -> Error {
    Error::Precondition(msg.into())
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
