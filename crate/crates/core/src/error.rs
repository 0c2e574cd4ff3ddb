use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is missing, malformed, or out of its domain.
    #[error("invalid config{}: `{key}`: {reason}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    InvalidConfig {
        key: String,
        line: Option<usize>,
        reason: String,
    },

    /// Lifetime estimation needs a strictly positive per-round consumption.
    #[error("cannot estimate lifetime from per-round energy {0} J")]
    Estimation(f64),

    #[error("debit of {amount} J on dead node {node}")]
    DeadNode { node: usize, amount: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.into(),
            line: None,
            reason: reason.into(),
        }
    }
}
