//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Operand shapes do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A construction would produce a matrix larger than the configured cap.
    #[error("matrix order {order} exceeds the configured cap {cap}")]
    DimensionCapExceeded { order: usize, cap: usize },

    /// A site position falls outside the valid range for its context.
    #[error("position {position} out of range: {context}")]
    PositionOutOfRange { position: usize, context: String },

    /// A position set is not strictly increasing or exceeds its bound.
    #[error("invalid position set: {0}")]
    InvalidPositionSet(String),

    /// A vector or density matrix violates a state invariant.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A rewrite rule was requested at a site that does not match its pattern.
    #[error("rewrite not applicable at index {index}: {reason}")]
    RuleNotApplicable { index: usize, reason: String },

    /// A word's letters do not chain dimensionally.
    #[error("inconsistent word: {0}")]
    InconsistentWord(String),

    /// Enumerating a Kraus family would exceed the configured cap.
    #[error("enumeration of {count} words exceeds the cap {cap}")]
    EnumerationCapExceeded { count: usize, cap: usize },

    /// A caller-facing precondition failed.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// A code file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// An iterative numeric routine failed to converge.
    #[error("numeric routine failed to converge: {0}")]
    Convergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
