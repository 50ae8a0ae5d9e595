use thiserror::Error;

/// Errors raised by the computational modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    /// Requested size is zero or exceeds the configured memory cap.
    #[error("capacity: {0}")]
    Capacity(String),

    /// Argument lies outside the mathematical domain of the operation.
    #[error("domain: {0}")]
    Domain(String),

    /// Evaluation point too close to a pole of the Euler product.
    #[error("pole proximity: z = {z} exceeds the evaluation limit {limit}")]
    PoleProximity { z: f64, limit: f64 },

    /// The estimated cost of an exact computation exceeds its budget.
    #[error("budget exceeded: {what} needs {needed} operations, budget is {budget}")]
    Budget {
        what: &'static str,
        needed: u128,
        budget: u64,
    },

    /// Caller passed an argument the structure cannot answer for.
    #[error("usage: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
