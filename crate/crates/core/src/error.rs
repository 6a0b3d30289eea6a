use thiserror::Error;

use crate::constraint::Constraint;

#[derive(Debug, Error)]
pub enum Error {
    #[error("arity error: {0}")]
    Arity(String),

    #[error("invalid index: {0}")]
    Index(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("budget exceeded: {what} needs 2^{needed} terms, cap is 2^{cap}")]
    Budget { what: String, needed: usize, cap: usize },

    #[error("verification failed in `{step}`: computed {computed}, claimed {claimed}")]
    Verification { step: String, computed: Box<Constraint>, claimed: Box<Constraint> },

    #[error("verification failed: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse { line, column, message: message.into() }
    }
}
