//! Crate-wide error type.
//!
//! Variants are deliberately coarse: each one names a distinct failure mode a
//! caller might branch on (the CLI maps them to exit codes), and carries a
//! human-readable explanation.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A nutrient level (or derived quantity that must stay positive) is not
    /// strictly positive.
    #[error("positivity violation: {0}")]
    PositivityViolation(String),

    /// An argument lies outside the mathematical domain of the operation
    /// (negative thickness, evaluation point outside the layer, ...).
    #[error("domain error: {0}")]
    DomainError(String),

    /// An adaptive computation could not reach the requested tolerance.
    #[error("tolerance not met: {0}")]
    ToleranceNotMet(String),

    /// The requested quantity only exists in the other dynamical regime
    /// (e.g. asking for a periodic orbit of an extinguishing configuration).
    #[error("regime error: {0}")]
    RegimeError(String),

    /// An iteration failed to converge within its budget.
    #[error("convergence error: {0}")]
    ConvergenceError(String),

    /// A probe started too close to the object it is supposed to approach,
    /// so the measurement would be pure noise.
    #[error("degenerate start: {0}")]
    DegenerateStart(String),

    /// A root bracket could not be established (no sign change).
    #[error("bracket error: {0}")]
    BracketError(String),

    /// The integer j carries no bifurcation branch for this configuration.
    #[error("not a bifurcation value: {0}")]
    NotABifurcationValue(String),

    /// Surface amplitude exceeds the validity cap of the first-order branch.
    #[error("amplitude too large: {0}")]
    AmplitudeTooLarge(String),

    /// A linear system that should be solvable turned out singular.
    #[error("singular system: {0}")]
    SingularSystem(String),

    /// Malformed configuration or parameter set.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
