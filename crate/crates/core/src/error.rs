use thiserror::Error;

use crate::allocation::AllocationResult;

pub type Result<T, E = HarqError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarqError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("truncated series did not converge: tail bound {tail_bound:e} exceeds tolerance {tolerance:e} at order {order}")]
    TruncationNotConverged {
        order: usize,
        tail_bound: f64,
        tolerance: f64,
    },

    #[error("catastrophic cancellation in CDF evaluation at y = {y}: {detail}")]
    Cancellation { y: f64, detail: String },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("bisection bracket failure: outage {outage:e} still above target {target:e} at power {power:e}")]
    BracketFailure {
        power: f64,
        outage: f64,
        target: f64,
    },

    #[error("allocation does not yield strictly positive finite powers: {0}")]
    DegenerateAllocation(String),

    #[error("optimizer exhausted {iterations} iterations; best feasible average power {}", best.average_power)]
    MaxIterations {
        iterations: usize,
        best: Box<AllocationResult>,
    },
}

pub(crate) fn invalid(msg: impl Into<String>) -> HarqError {
    HarqError::InvalidParameter(msg.into())
}
