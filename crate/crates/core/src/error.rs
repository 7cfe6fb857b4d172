use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid row {row}: {msg}")]
    Validation { row: usize, msg: String },

    #[error("unknown alphabet `{name}` (valid: {valid})")]
    UnknownAlphabet { name: String, valid: String },

    #[error("scenario needs {count} elements, budget is {budget} (use --allow-large to override)")]
    ElementBudget { count: usize, budget: usize },

    #[error("scenario: {0}")]
    Scenario(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
