use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A call that violates an operation's contract (dimension mismatch, zero step, ...).
    #[error("usage error: {0}")]
    Usage(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("configuration has no nuclei")]
    EmptyConfig,
    #[error("point lies outside the covered range: {0}")]
    OutOfRange(String),
    /// The simulation window ran out before an answer could be certified.
    #[error("window exhausted: {0}")]
    Window(String),
    #[error("criterion not bracketed: {0}")]
    Bracket(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid decision tree: {0}")]
    InvalidTree(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
