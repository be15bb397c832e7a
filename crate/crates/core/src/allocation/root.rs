//! Scalar power search against an outage target.

use crate::error::{HarqError, Result};

pub(crate) const MIN_POWER: f64 = 1e-6;
const MAX_POWER: f64 = 1e15;
const MAX_STEPS: usize = 300;

/// Point on the feasible side of the target.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PowerRoot {
    pub ln_power: f64,
}

/// Finds `ln P` with `outage(P) ≤ target` and `outage(P) ≥ (1 − rel_tol) target`,
/// for `outage` non-increasing in `P`. Works on `ln p` against `ln P`, which is
/// close to linear at high SNR. If the target is already met at the power
/// floor, the floor is returned.
pub(crate) fn solve_power<F>(mut outage: F, target: f64, ln_guess: f64, rel_tol: f64) -> Result<PowerRoot>
where
    F: FnMut(f64) -> Result<f64>,
{
    let ln_target = target.ln();
    let ln_floor = MIN_POWER.ln();
    let ln_cap = MAX_POWER.ln();
    let accept = (1.0 - rel_tol).ln();
    // Feasibility is decided on p itself so that rounding in the logarithm
    // can never report an infeasible point as feasible.
    let mut eval = |x: f64| -> Result<(f64, f64)> {
        let p = outage(x.exp())?;
        let h = p.ln() - ln_target;
        let h = if p <= target { h.min(0.0) } else { h.max(f64::MIN_POSITIVE) };
        Ok((p, h))
    };

    let mut x = ln_guess.clamp(ln_floor, ln_cap);
    let (_, h) = eval(x)?;
    // (x, h) with h > 0 (infeasible) and h <= 0 (feasible).
    let (mut lo, mut h_lo, mut hi, mut h_hi);
    if h > 0.0 {
        lo = x;
        h_lo = h;
        let mut step = 0.5;
        loop {
            x = (x + step).min(ln_cap);
            let (p, h) = eval(x)?;
            if h <= 0.0 {
                hi = x;
                h_hi = h;
                break;
            }
            if x >= ln_cap {
                return Err(HarqError::BracketFailure {
                    power: x.exp(),
                    outage: p,
                    target,
                });
            }
            lo = x;
            h_lo = h;
            step *= 2.0;
        }
    } else {
        hi = x;
        h_hi = h;
        let mut step = 0.5;
        loop {
            if x <= ln_floor {
                return Ok(PowerRoot { ln_power: ln_floor });
            }
            x = (x - step).max(ln_floor);
            let (_, h) = eval(x)?;
            if h > 0.0 {
                lo = x;
                h_lo = h;
                break;
            }
            hi = x;
            h_hi = h;
            step *= 2.0;
        }
    }

    // Illinois regula falsi on the bracket [lo, hi].
    let mut side = 0i8;
    let mut h_best = h_hi;
    for _ in 0..MAX_STEPS {
        if h_best >= accept || hi - lo <= 1e-15 * hi.abs().max(1.0) {
            break;
        }
        let mut x = if h_lo.is_finite() && h_hi.is_finite() {
            hi - h_hi * (hi - lo) / (h_hi - h_lo)
        } else {
            0.5 * (lo + hi)
        };
        if !(x > lo && x < hi) {
            x = 0.5 * (lo + hi);
        }
        let (_, h) = eval(x)?;
        if h > 0.0 {
            lo = x;
            h_lo = h;
            if side == -1 {
                h_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = x;
            h_hi = h;
            h_best = h;
            if side == 1 {
                h_lo *= 0.5;
            }
            side = 1;
        }
    }
    Ok(PowerRoot { ln_power: hi })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn finds_power_law_root_from_either_side() {
        for guess in [1e-3f64, 1.0, 1e4] {
            let r = solve_power(|p| Ok((3.0 / (p * p)).min(1.0)), 1e-4, guess.ln(), 1e-12).unwrap();
            assert!(3.0 / r.ln_power.exp().powi(2) <= 1e-4);
            assert_relative_eq!(r.ln_power.exp(), (3e4f64).sqrt(), max_relative = 1e-10);
        }
    }

    #[test]
    fn floor_and_cap() {
        let r = solve_power(|_| Ok(1e-9), 1e-4, 0.0, 1e-6).unwrap();
        assert_relative_eq!(r.ln_power, MIN_POWER.ln());
        let err = solve_power(|_| Ok(0.5), 1e-4, 0.0, 1e-6).unwrap_err();
        assert!(matches!(err, HarqError::BracketFailure { .. }));
    }
}
