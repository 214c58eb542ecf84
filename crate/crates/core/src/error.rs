use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the core algorithms.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch for {what}: expected {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("{what} index {index} out of range (limit {limit})")]
    OutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("frame ranges are not aligned: {0}")]
    Alignment(String),

    #[error("histogram is empty")]
    EmptyHistogram,

    #[error("markov chain is reducible; states not mutually reachable: {}", .0.join(", "))]
    Reducible(Vec<String>),

    #[error("stationary distribution did not converge (residual {residual:e})")]
    NotConverged { residual: f64 },

    #[error("could not construct code: {0}")]
    Construction(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
