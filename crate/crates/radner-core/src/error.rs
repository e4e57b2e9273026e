use alloc::string::String;
use core::fmt;

/// Errors produced by model, solver, simulation, and analysis operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A parameter violates its domain constraint.
    InvalidParams(String),
    /// An iterative routine failed to reach its tolerance.
    NumericalFailure(String),
    /// The operation applies to a different trade regime than the one in force.
    RegimeMismatch(String),
    /// A hypothesis required by the operation does not hold.
    PreconditionViolated(String),
    /// Inputs that must share parameters were built from different ones.
    MismatchedInputs(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::NumericalFailure(msg) => write!(f, "numerical failure: {msg}"),
            Error::RegimeMismatch(msg) => write!(f, "regime mismatch: {msg}"),
            Error::PreconditionViolated(msg) => write!(f, "precondition violated: {msg}"),
            Error::MismatchedInputs(msg) => write!(f, "mismatched inputs: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
