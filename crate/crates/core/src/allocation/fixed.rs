//! Equal power in every round.

use crate::error::Result;
use crate::outage::ln_phi;

use super::root::solve_power;
use super::{finish, AllocationMethod, AllocationProblem, AllocationResult, OutageModel};

/// Relative slack allowed below the target by the exact-model bisection.
const FIXED_TOLERANCE: f64 = 1e-3;

/// Fixed-power baseline. The asymptotic variant is `P = (φ_L/ε)^{1/(Lm)}`;
/// the exact variant searches `P` until the exact `p_out,L` is within 0.1%
/// below `ε`.
pub fn allocate_fixed(problem: &AllocationProblem, use_exact: bool) -> Result<AllocationResult> {
    problem.validate()?;
    let l = problem.max_rounds;
    let m = problem.params.m() as f64;
    let ln_asym = (ln_phi(problem.scheme, l, problem.rate, &problem.params)?
        - problem.epsilon.ln())
        / (l as f64 * m);
    if !use_exact {
        return finish(
            vec![ln_asym.exp(); l],
            &problem.asymptotic_model(),
            AllocationMethod::FixedAsymptotic,
        );
    }
    let model = problem.exact_model();
    let root = solve_power(
        |p| model.outage(&vec![p; l]),
        problem.epsilon,
        ln_asym,
        FIXED_TOLERANCE,
    )?;
    finish(
        vec![root.ln_power.exp(); l],
        &model,
        AllocationMethod::FixedExact,
    )
}
