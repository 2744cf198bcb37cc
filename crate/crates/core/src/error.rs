//! Error types shared by all solver and model layers.

use alloc::string::String;
use core::fmt;

/// Errors produced by kernels, solvers and the experiment layer.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A caller violated an operation precondition (bad site index,
    /// mismatched dimensions, ...).
    Usage(String),
    /// Invalid model or solver configuration.
    Config(String),
    /// An iterative solver failed to converge within its budget.
    Convergence {
        what: String,
        best_residual: f64,
        iterations: usize,
    },
    /// The Chebyshev expansion would need more terms than `max_order`
    /// allows; use a smaller time step or raise the order cap.
    OrderExceeded { required: usize, max_order: usize },
    /// A conservation-law gate tripped during time evolution.
    Integrity {
        what: String,
        step: usize,
        t: f64,
        drift: f64,
        tolerance: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Usage(msg) => write!(f, "usage error: {msg}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
            Error::Convergence {
                what,
                best_residual,
                iterations,
            } => write!(
                f,
                "{what} did not converge after {iterations} iterations (best residual {best_residual:.3e})"
            ),
            Error::OrderExceeded {
                required,
                max_order,
            } => write!(
                f,
                "Chebyshev order {required} exceeds max_order {max_order}; reduce dt or raise chebyshev.max_order"
            ),
            Error::Integrity {
                what,
                step,
                t,
                drift,
                tolerance,
            } => write!(
                f,
                "integrity violation: {what} drift {drift:.3e} exceeds tolerance {tolerance:.3e} at step {step} (t = {t})"
            ),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}
