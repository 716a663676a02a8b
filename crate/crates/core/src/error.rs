use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("budget exceeded: {what} is {actual}, limit {limit}")]
    BudgetExceeded {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("sample is not realizable: {0}")]
    Realizability(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn budget(what: &'static str, actual: usize, limit: usize) -> Self {
        Error::BudgetExceeded {
            what,
            actual,
            limit,
        }
    }
}
