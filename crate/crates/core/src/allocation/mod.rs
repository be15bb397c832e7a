//! Minimum average transmit power subject to an outage constraint.
//!
//! Round `l` is only sent when the first `l − 1` rounds failed, so the
//! expected power is `P̄ = Σ_l P_l p_out,l−1` with `p_out,0 = 1`. The problem
//! is to minimise `P̄` subject to `p_out,L ≤ ε`.

mod closed_form;
mod fixed;
mod numerical;
mod root;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{invalid, Result};
use crate::outage::{asymptotic_outage, exact_outage, Scheme, DEFAULT_TRUNCATION_TOLERANCE};

pub use crate::outage::phi;
pub use closed_form::allocate_closed_form;
pub use fixed::allocate_fixed;
pub use numerical::{allocate_numerical_exact, MAX_EXACT_ROUNDS};

/// Outage-constrained power minimisation instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationProblem {
    pub scheme: Scheme,
    pub max_rounds: usize,
    pub rate: f64,
    pub epsilon: f64,
    pub params: ChannelParams,
}

impl AllocationProblem {
    pub fn new(
        scheme: Scheme,
        max_rounds: usize,
        rate: f64,
        epsilon: f64,
        params: ChannelParams,
    ) -> Result<Self> {
        let p = AllocationProblem {
            scheme,
            max_rounds,
            rate,
            epsilon,
            params,
        };
        p.validate()?;
        Ok(p)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.max_rounds == 0 {
            return Err(invalid("at least one round is required"));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(invalid(format!(
                "outage target must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if !(self.rate.is_finite() && self.rate > 0.0) {
            return Err(invalid(format!("rate must be positive, got {}", self.rate)));
        }
        self.params.check_rounds(self.max_rounds)
    }

    pub fn asymptotic_model(&self) -> AsymptoticModel<'_> {
        AsymptoticModel {
            scheme: self.scheme,
            rate: self.rate,
            params: &self.params,
        }
    }

    /// Exact model whose Type I truncation error is negligible against `ε`.
    pub fn exact_model(&self) -> ExactModel<'_> {
        ExactModel {
            scheme: self.scheme,
            rate: self.rate,
            params: &self.params,
            truncation_tolerance: DEFAULT_TRUNCATION_TOLERANCE.min(1e-9 * self.epsilon),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AllocationMethod {
    ClosedFormAsymptotic,
    NumericalExact,
    FixedAsymptotic,
    FixedExact,
}

impl AllocationMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            AllocationMethod::ClosedFormAsymptotic => "closed_form_asymptotic",
            AllocationMethod::NumericalExact => "numerical_exact",
            AllocationMethod::FixedAsymptotic => "fixed_asymptotic",
            AllocationMethod::FixedExact => "fixed_exact",
        }
    }
}

impl fmt::Display for AllocationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationResult {
    pub powers: Vec<f64>,
    pub average_power: f64,
    /// `p_out,L` at `powers` under the outage model the method optimised.
    pub achieved_outage: f64,
    pub method: AllocationMethod,
}

/// Source of `p_out,l` for a power prefix `P_1..P_l`.
pub trait OutageModel {
    /// Outage after `powers.len()` rounds; must return 1 for an empty slice.
    fn outage(&self, powers: &[f64]) -> Result<f64>;
}

/// High-SNR outage `φ_l / (Π P)^m`.
#[derive(Debug, Clone, Copy)]
pub struct AsymptoticModel<'a> {
    pub scheme: Scheme,
    pub rate: f64,
    pub params: &'a ChannelParams,
}

impl OutageModel for AsymptoticModel<'_> {
    fn outage(&self, powers: &[f64]) -> Result<f64> {
        asymptotic_outage(self.scheme, powers, self.rate, self.params)
    }
}

/// Exact Type I and CC outage, and the IR lower bound.
#[derive(Debug, Clone, Copy)]
pub struct ExactModel<'a> {
    pub scheme: Scheme,
    pub rate: f64,
    pub params: &'a ChannelParams,
    pub truncation_tolerance: f64,
}

impl OutageModel for ExactModel<'_> {
    fn outage(&self, powers: &[f64]) -> Result<f64> {
        exact_outage(
            self.scheme,
            powers,
            self.rate,
            self.params,
            self.truncation_tolerance,
        )
    }
}

impl<F> OutageModel for F
where
    F: Fn(&[f64]) -> Result<f64>,
{
    fn outage(&self, powers: &[f64]) -> Result<f64> {
        self(powers)
    }
}

/// `P̄ = Σ_{l=1}^{L} P_l p_out,l−1`.
pub fn average_power<M: OutageModel + ?Sized>(powers: &[f64], model: &M) -> Result<f64> {
    let mut total = 0.0;
    for l in 0..powers.len() {
        let p = if l == 0 { 1.0 } else { model.outage(&powers[..l])? };
        total += powers[l] * p;
    }
    Ok(total)
}

pub(crate) fn finish<M: OutageModel + ?Sized>(
    powers: Vec<f64>,
    model: &M,
    method: AllocationMethod,
) -> Result<AllocationResult> {
    let average_power = average_power(&powers, model)?;
    let achieved_outage = model.outage(&powers)?;
    Ok(AllocationResult {
        powers,
        average_power,
        achieved_outage,
        method,
    })
}
