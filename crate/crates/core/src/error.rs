use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite observation: {0}")]
    NonFinite(f64),

    #[error("group {group} is empty")]
    EmptyGroup { group: u8 },

    #[error("insufficient sample size: group {group} has {n} observation(s), at least {required} required")]
    InsufficientSampleSize { group: u8, n: usize, required: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("support truncation failed: {0}")]
    Truncation(String),

    #[error("quadrature failed to converge: {0}")]
    Quadrature(String),

    #[error("enumeration budget exceeded: {needed} outcomes needed, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        Error::Io(err.to_string())
    }
}
