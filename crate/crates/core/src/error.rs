use thiserror::Error;

/// Errors raised by the toolkit. Validation-style operations return reports
/// instead; these are for malformed inputs and refused computations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("enumeration budget exceeded: {needed} tuples > budget {budget}; use the Monte-Carlo estimator instead")]
    Budget { needed: u128, budget: u128 },

    #[error("arity mismatch: formula has arity {expected}, assignment has length {got}")]
    Arity { expected: usize, got: usize },

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
