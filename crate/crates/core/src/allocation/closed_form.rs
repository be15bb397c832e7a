//! Optimal powers under the asymptotic outage model.
//!
//! Stationarity of the Lagrangian gives, for `n < L`,
//! `P_n^{m+1} = (m+1) P_{n+1} φ_n / φ_{n−1}`, and the active constraint is
//! `(Π P_k)^m = φ_L / ε`. Writing every `ln P_n` as an affine function of
//! `ln P_L` through the recursion reduces the constraint to one linear
//! equation. Everything is kept in logarithms because the nested exponents
//! over- and underflow for small `ε` and large `L`.

use log::warn;

use crate::error::{HarqError, Result};
use crate::outage::ln_phi;

use super::{finish, AllocationMethod, AllocationProblem, AllocationResult};

pub fn allocate_closed_form(problem: &AllocationProblem) -> Result<AllocationResult> {
    problem.validate()?;
    let l = problem.max_rounds;
    let m = problem.params.m() as f64;
    let ln_m1 = (m + 1.0).ln();
    let ln_phis: Vec<f64> = (0..=l)
        .map(|k| ln_phi(problem.scheme, k, problem.rate, &problem.params))
        .collect::<Result<_>>()?;

    // ln P_n = alpha[n] + beta[n] ln P_L, 0-based n.
    let mut alpha = vec![0.0; l];
    let mut beta = vec![1.0; l];
    for n in (0..l - 1).rev() {
        // Round n + 1 (1-based) pairs with φ_{n+1} / φ_n.
        let b = ln_m1 + ln_phis[n + 1] - ln_phis[n];
        alpha[n] = (b + alpha[n + 1]) / (m + 1.0);
        beta[n] = beta[n + 1] / (m + 1.0);
    }
    let rhs = (ln_phis[l] - problem.epsilon.ln()) / m - alpha.iter().sum::<f64>();
    let ln_last = rhs / beta.iter().sum::<f64>();

    let powers: Vec<f64> = alpha
        .iter()
        .zip(&beta)
        .map(|(a, b)| (a + b * ln_last).exp())
        .collect();
    if let Some(p) = powers.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
        return Err(HarqError::DegenerateAllocation(format!(
            "closed-form power {p} for epsilon {}",
            problem.epsilon
        )));
    }
    if powers.iter().any(|&p| p < 1.0) {
        warn!(
            "closed-form powers {powers:?} fall below 1; the asymptotic outage model is unreliable at epsilon {}",
            problem.epsilon
        );
    }
    finish(
        powers,
        &problem.asymptotic_model(),
        AllocationMethod::ClosedFormAsymptotic,
    )
}
