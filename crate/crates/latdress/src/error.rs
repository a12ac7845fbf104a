//! Error type shared by all field and solver operations.

use thiserror::Error;

/// Errors raised by field constructors, composers, and solvers.
#[derive(Debug, Clone, Error)]
pub enum FieldError {
    /// Two fields live on different lattices, or an index is out of range.
    #[error("lattice mismatch or out-of-range index: {0}")]
    Lattice(String),

    /// Group kinds of the operands disagree.
    #[error("group kind mismatch: {0}")]
    Kind(String),

    /// An operation was applied to fields whose declared gauge-group
    /// actions are not in the admissible table.
    #[error("action-tag violation: {0}")]
    Tag(String),

    /// A logarithm hit (or came too close to) the cut of the principal branch.
    #[error("branch cut: {0}")]
    Branch(String),

    /// A scalar field vanishes where a polar decomposition is required.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A dense operator would exceed the configured size cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A linear operator is exactly singular where an inverse is required.
    #[error("singular operator: {0}")]
    Singular(String),

    /// Malformed parameters or inconsistent configuration.
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, FieldError>;
