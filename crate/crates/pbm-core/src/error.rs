//! Crate-wide error type.

use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// The raw data is not even a candidate structure (non-square table,
    /// asymmetric entries, negative values, mismatched lengths).
    #[error("structural error: {0}")]
    Structural(String),

    /// Malformed input text (space/map files, rational literals).
    #[error("parse error: {0}")]
    Parse(String),

    /// A parameter is outside its admissible range.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An operation was invoked on data that does not satisfy its
    /// stated precondition.
    #[error("precondition not met: {0}")]
    Precondition(String),

    /// Data that should have been ruled out by the space axioms.
    #[error("axiom violation: {0}")]
    AxiomViolation(String),

    #[error("unknown point: {0}")]
    UnknownPoint(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// A series construction does not converge; carries the witnessing pair.
    #[error("series diverges: {0}")]
    Divergence(String),

    /// Random instance generation ran out of resampling budget.
    #[error("generation failed: {0}")]
    Generation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
