//! Average-power minimisation under the exact outage model.
//!
//! The constraint is eliminated: for given `P_1..P_{L−1}`, `p_out,L` is
//! decreasing in `P_L`, so the active constraint fixes `P_L` by a scalar
//! root search that always returns a feasible point. The remaining free
//! variables are optimised in `ln P` with a Nelder–Mead simplex, started from
//! the closed-form asymptotic solution and from the exact fixed-power point.

use std::cell::Cell;

use log::debug;

use crate::error::{invalid, HarqError, Result};

use super::root::{solve_power, MIN_POWER};
use super::{
    allocate_closed_form, allocate_fixed, average_power, finish, AllocationMethod,
    AllocationProblem, AllocationResult, OutageModel,
};

/// Largest number of rounds accepted by the exact solver.
pub const MAX_EXACT_ROUNDS: usize = 6;

const ROOT_TOLERANCE: f64 = 1e-12;
const MAX_EVALUATIONS: usize = 5000;
const INITIAL_STEP: f64 = 0.05;
const F_TOLERANCE: f64 = 1e-10;
const X_TOLERANCE: f64 = 1e-7;

pub fn allocate_numerical_exact(problem: &AllocationProblem) -> Result<AllocationResult> {
    problem.validate()?;
    let l = problem.max_rounds;
    if l > MAX_EXACT_ROUNDS {
        return Err(invalid(format!(
            "exact allocation supports at most {MAX_EXACT_ROUNDS} rounds, got {l}"
        )));
    }
    let model = problem.exact_model();
    let eps = problem.epsilon;
    let warm = allocate_closed_form(problem)?;
    let last_guess = Cell::new(warm.powers[l - 1].ln());

    // Completes P_1..P_{L−1} with the P_L that makes the constraint active.
    let complete = |head: &[f64]| -> Result<Vec<f64>> {
        let mut powers: Vec<f64> = head.iter().map(|x| x.exp()).collect();
        powers.push(0.0);
        let root = solve_power(
            |p| {
                powers[l - 1] = p;
                model.outage(&powers)
            },
            eps,
            last_guess.get(),
            ROOT_TOLERANCE,
        )?;
        last_guess.set(root.ln_power);
        powers[l - 1] = root.ln_power.exp();
        Ok(powers)
    };

    if l == 1 {
        let powers = complete(&[])?;
        return finish(powers, &model, AllocationMethod::NumericalExact);
    }

    let fixed = allocate_fixed(problem, true)?;
    let floor = MIN_POWER.ln();
    let mut error: Option<HarqError> = None;
    let mut objective = |x: &[f64]| -> f64 {
        if error.is_some() {
            return f64::INFINITY;
        }
        // Powers below the floor are projected back and penalised.
        let violation: f64 = x.iter().map(|&v| (floor - v).max(0.0)).sum();
        let clamped: Vec<f64> = x.iter().map(|&v| v.max(floor)).collect();
        let value = complete(&clamped).and_then(|p| average_power(&p, &model));
        match value {
            Ok(v) => v * (1.0 + violation),
            Err(e) => {
                error = Some(e);
                f64::INFINITY
            }
        }
    };

    let starts = [
        warm.powers[..l - 1].iter().map(|p| p.ln()).collect::<Vec<_>>(),
        fixed.powers[..l - 1].iter().map(|p| p.ln()).collect::<Vec<_>>(),
    ];
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut exhausted = 0;
    let mut evaluations = 0;
    for start in &starts {
        let run = nelder_mead(&mut objective, start);
        evaluations += run.evaluations;
        debug!(
            "simplex from {:?}: objective {} after {} evaluations",
            start, run.value, run.evaluations
        );
        if !run.converged {
            exhausted += 1;
        }
        if best.as_ref().is_none_or(|(_, v)| run.value < *v) {
            best = Some((run.point, run.value));
        }
    }
    if let Some(e) = error {
        return Err(e);
    }
    let (point, _) = best.expect("at least one start");
    let clamped: Vec<f64> = point.iter().map(|&v| v.max(floor)).collect();
    let powers = complete(&clamped)?;
    let result = finish(powers, &model, AllocationMethod::NumericalExact)?;
    if exhausted == starts.len() {
        return Err(HarqError::MaxIterations {
            iterations: evaluations,
            best: Box::new(result),
        });
    }
    Ok(result)
}

struct SimplexRun {
    point: Vec<f64>,
    value: f64,
    evaluations: usize,
    converged: bool,
}

/// Nelder–Mead with standard coefficients, restarted once from its own
/// optimum to guard against a collapsed simplex.
fn nelder_mead<F: FnMut(&[f64]) -> f64>(f: &mut F, start: &[f64]) -> SimplexRun {
    let mut point = start.to_vec();
    let mut evaluations = 0;
    let mut value = f64::INFINITY;
    let mut converged = false;
    for _ in 0..2 {
        let run = simplex_once(f, &point, MAX_EVALUATIONS.saturating_sub(evaluations));
        evaluations += run.evaluations;
        let improved = run.value < value;
        if run.value <= value {
            point = run.point;
            value = run.value;
        }
        converged = run.converged;
        if !converged || !improved || evaluations >= MAX_EVALUATIONS {
            break;
        }
    }
    SimplexRun {
        point,
        value,
        evaluations,
        converged,
    }
}

fn simplex_once<F: FnMut(&[f64]) -> f64>(f: &mut F, start: &[f64], budget: usize) -> SimplexRun {
    let n = start.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64], count: &mut usize| {
        *count += 1;
        f(x)
    };
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((start.to_vec(), eval(start, &mut evaluations)));
    for i in 0..n {
        let mut x = start.to_vec();
        x[i] += INITIAL_STEP;
        let v = eval(&x, &mut evaluations);
        simplex.push((x, v));
    }

    let mut converged = false;
    while evaluations < budget {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let f_best = simplex[0].1;
        let f_worst = simplex[n].1;
        let spread = (f_worst - f_best).abs();
        let diameter = simplex[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread <= F_TOLERANCE * f_best.abs().max(1e-300) && diameter <= X_TOLERANCE {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n)
            .map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(1.0);
        let fr = eval(&xr, &mut evaluations);
        if fr < f_best {
            let xe = along(2.0);
            let fe = eval(&xe, &mut evaluations);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < f_worst {
            let xc = along(0.5);
            let fc = eval(&xc, &mut evaluations);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = eval(&xc, &mut evaluations);
            (xc, fc)
        };
        if fc < fr.min(f_worst) {
            simplex[n] = (xc, fc);
            continue;
        }
        let best = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best
                .iter()
                .zip(&vertex.0)
                .map(|(b, v)| b + 0.5 * (v - b))
                .collect();
            let v = eval(&x, &mut evaluations);
            *vertex = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (point, value) = simplex.swap_remove(0);
    SimplexRun {
        point,
        value,
        evaluations,
        converged,
    }
}
