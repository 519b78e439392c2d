use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("function value is not finite at point {point:?}")]
    NonFiniteSample { point: Vec<f64> },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("tree depth {depth} exceeds the supported maximum of {max}")]
    DepthTooLarge { depth: usize, max: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("point routed to inactive leaf {leaf}")]
    InactiveLeaf { leaf: usize },
    #[error("cannot derive big-M from an empty sample")]
    EmptySample,
    #[error("assignment has no value for variable `{0}`")]
    MissingVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("decoded model disagrees with the assignment: {0}")]
    DecodeIntegrity(String),
    #[error("capacity guard exceeded: {0}")]
    Capacity(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = core::result::Result<T, Error>;
