use thiserror::Error;

use crate::resource::Certificate;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("system mismatch: `{left}` vs `{right}`")]
    SystemMismatch { left: String, right: String },

    #[error("vector lies outside the cone (distance {distance:.3e})")]
    ConeViolation { distance: f64 },

    #[error("not a channel: unit effect violated by {residual:.3e}")]
    NotAChannel { residual: f64 },

    #[error("invalid channel tag `{tag}`: {reason}")]
    InvalidTag { tag: &'static str, reason: String },

    #[error("composition undefined: {0}")]
    Composition(String),

    #[error("structure error: {0}")]
    Structure(String),

    #[error("diagonalization failed: {message}")]
    Diagonalization { message: String, residue: Vec<f64> },

    #[error("input is not a pure state (largest eigenvalue {top:.6})")]
    NotPure { top: f64 },

    #[error("function undefined at eigenvalue {eigenvalue}")]
    UndefinedFunction { eigenvalue: f64 },

    #[error("matrix is not doubly stochastic (deviation {deviation:.3e})")]
    NotDoublyStochastic { deviation: f64 },

    #[error("majorisation fails: {0}")]
    NotMajorized(Certificate),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate state (norm {norm:.3e})")]
    DegenerateState { norm: f64 },

    #[error("no perfectly distinguishable states")]
    NoDistinguishableStates,

    #[error("ledger check `{check}` failed (residual {residual:.3e})")]
    LedgerViolation { check: &'static str, residual: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
