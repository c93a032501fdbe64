use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parts {parts:?} do not form a composition of {total}")]
    BadComposition { total: i64, parts: Vec<i64> },

    #[error("consistency probe failed: {0}")]
    ProbeFailed(String),

    #[error("enumeration budget exceeded: {needed} deals > {budget}")]
    BudgetExceeded { needed: String, budget: u64 },

    #[error("empty sample")]
    EmptySample,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
