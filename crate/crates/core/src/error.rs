use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An operation that requires an even pulse (or a propagator without a
    /// σy exponent component) received something else.
    #[error("symmetry violation: {0}")]
    SymmetryViolation(String),

    #[error("integration failed at t = {time}: {reason}")]
    IntegrationFailure { time: f64, reason: String },

    #[error("no seed found: {0}")]
    SeedNotFound(String),

    #[error("solver failed: {0}")]
    SolverFailure(String),

    #[error("cannot plan gate: {0}")]
    Plan(String),
}
