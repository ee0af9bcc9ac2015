use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("inadmissible deformed-log parameters a={a}, b={b}: {reason}")]
    InadmissibleParams { a: f64, b: f64, reason: &'static str },

    #[error("domain error at component {index}: value {value} must be finite and > 0")]
    Domain { index: usize, value: f64 },

    #[error("parameter error: {0}")]
    Param(String),

    #[error("shape mismatch: expected length {expected}, found {found}")]
    Shape { expected: usize, found: usize },

    #[error("infeasible sign case: {0}")]
    InfeasibleCase(String),

    #[error("line search failed after {backtracks} backtracks (last step {last_step:e})")]
    LineSearchFailure { backtracks: usize, last_step: f64 },

    #[error("non-descent: {0}")]
    NonDescent(String),

    #[error("bracket error: {0}")]
    Bracket(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param_err(msg: impl Into<String>) -> Error {
    Error::Param(msg.into())
}
