//! Outage analysis and power allocation for hybrid ARQ over time-correlated
//! Nakagami-m fading.
//!
//! The channel gains of successive rounds follow an exponentially correlated
//! multivariate Nakagami-m law ([`channel`]). On top of it, [`outage`]
//! evaluates the outage probability of Type I HARQ, chase combining (CC) and
//! a lower bound for incremental redundancy (IR), both exactly and in the
//! high-SNR limit. [`allocation`] minimises the expected transmit power under
//! an outage target, and [`monte_carlo`] simulates the outage events
//! directly.

pub mod allocation;
pub mod channel;
mod error;
pub mod monte_carlo;
pub mod outage;
pub mod special;

pub use allocation::{
    allocate_closed_form, allocate_fixed, allocate_numerical_exact, average_power,
    AllocationMethod, AllocationProblem, AllocationResult, OutageModel,
};
pub use channel::{ChannelParams, ChannelSampler, CorrelationMatrix, MixtureIndex};
pub use error::{HarqError, Result};
pub use monte_carlo::{
    estimate_all_schemes, estimate_outage, estimate_outage_sequence, OutageEstimate,
    SchemeEstimates,
};
pub use outage::{HarqConfig, PoleDecomposition, Scheme, TruncatedSeriesResult};
