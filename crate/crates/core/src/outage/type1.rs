//! Type I HARQ outage as a truncated mixture series.
//!
//! The joint CDF of the first `l` amplitudes is a `W_n`-weighted sum of
//! products of independent gamma CDFs. Terms are grouped by total degree
//! `t = Σ n_ι` and the sum stops at `t = N`.
//!
//! The total degree of a negative-multinomial index is negative binomial
//! with shape `m` and success probability `p = Σω / (1 + Σω)`, and given `t`
//! the index is multinomial with cell probabilities `ω_ι / Σω`. The grouped
//! sum is therefore evaluated as a convolution over rounds, in log space.

use crate::channel::ChannelParams;
use crate::error::{invalid, HarqError, Result};
use crate::special::{gamma_p_int, ln_binomial, ln_factorial, ln_gamma_int};

use super::{cc_threshold, check_powers, check_rate};

/// Largest truncation order accepted.
pub const MAX_TRUNCATION_ORDER: usize = 200;

/// Tail-mass tolerance used when no explicit one is given.
pub const DEFAULT_TRUNCATION_TOLERANCE: f64 = 1e-12;

/// Outcome of the truncated Type I series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedSeriesResult {
    /// Partial sum up to and including total degree `order`.
    pub value: f64,
    pub order: usize,
    /// Mixture mass of every omitted index; bounds the truncation error.
    pub tail_bound: f64,
}

/// Probability that the total mixture degree exceeds `order`.
///
/// Uses `P(T > N) = P(Binomial(N + m, 1 − p) < m)`, a finite sum of positive
/// terms, so the bound stays accurate far below machine epsilon.
pub(crate) fn degree_tail(m: u32, sum_weights: f64, order: usize) -> f64 {
    if sum_weights == 0.0 {
        return 0.0;
    }
    let ln_s = sum_weights.ln_1p();
    let ln_p = sum_weights.ln() - ln_s;
    let ln_q = -ln_s;
    let trials = order as u64 + m as u64;
    (0..m as u64)
        .map(|k| (ln_binomial(trials, k) + k as f64 * ln_q + (trials - k) as f64 * ln_p).exp())
        .sum()
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Type I outage after `powers.len()` rounds, truncated at total degree `order`.
pub fn type1_series(
    powers: &[f64],
    rate: f64,
    params: &ChannelParams,
    order: usize,
) -> Result<TruncatedSeriesResult> {
    let l = powers.len();
    if l == 0 {
        return Err(invalid("at least one round is required"));
    }
    if order > MAX_TRUNCATION_ORDER {
        return Err(invalid(format!(
            "truncation order {order} exceeds the maximum {MAX_TRUNCATION_ORDER}"
        )));
    }
    check_rate(rate)?;
    check_powers(powers)?;
    params.check_rounds(l)?;

    let m = params.m();
    let mu = m as u64;
    let threshold = cc_threshold(rate);
    let weights: Vec<f64> = (1..=l).map(|i| params.correlation_weight(i)).collect();
    let sum_w: f64 = weights.iter().sum();

    // Per-round gamma CDF arguments m y_ι² / (Ω_ι (1 − c_ι)), y_ι² = (2^R − 1)/P_ι.
    let args: Vec<f64> = (1..=l)
        .map(|i| {
            m as f64 * threshold
                / (powers[i - 1] * params.omega(i) * (1.0 - params.correlation_power(i)))
        })
        .collect();

    if sum_w == 0.0 {
        let value = args.iter().map(|&x| gamma_p_int(mu, x)).product();
        return Ok(TruncatedSeriesResult {
            value,
            order,
            tail_bound: 0.0,
        });
    }

    // ln of π_ι^k / k! · P(m + k, x_ι), π_ι = ω_ι / Σω.
    let mut acc: Vec<f64> = vec![f64::NEG_INFINITY; order + 1];
    acc[0] = 0.0;
    for (&w, &x) in weights.iter().zip(&args) {
        let factor: Vec<f64> = (0..=order)
            .map(|k| {
                let ln_cdf = gamma_p_int(mu + k as u64, x).ln();
                if k == 0 {
                    ln_cdf
                } else if w == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    k as f64 * (w / sum_w).ln() - ln_factorial(k as u64) + ln_cdf
                }
            })
            .collect();
        let mut next = vec![f64::NEG_INFINITY; order + 1];
        for (t, slot) in next.iter_mut().enumerate() {
            for k in 0..=t {
                if acc[t - k] == f64::NEG_INFINITY || factor[k] == f64::NEG_INFINITY {
                    continue;
                }
                *slot = log_add(*slot, acc[t - k] + factor[k]);
            }
        }
        acc = next;
    }

    // Negative-binomial mass of each total degree, times t! to undo the
    // 1/n_ι! factors of the multinomial.
    let ln_s = sum_w.ln_1p();
    let ln_p = sum_w.ln() - ln_s;
    let mut value = 0.0;
    for (t, &ln_inner) in acc.iter().enumerate() {
        if ln_inner == f64::NEG_INFINITY {
            continue;
        }
        let tu = t as u64;
        let ln_nb = ln_gamma_int(mu + tu) - ln_gamma_int(mu) - ln_factorial(tu)
            + t as f64 * ln_p
            - m as f64 * ln_s;
        value += (ln_nb + ln_factorial(tu) + ln_inner).exp();
    }

    Ok(TruncatedSeriesResult {
        value: value.clamp(0.0, 1.0),
        order,
        tail_bound: degree_tail(m, sum_w, order),
    })
}

/// Type I outage with the smallest truncation order whose tail bound is at
/// most `tolerance`.
pub fn type1_to_tolerance(
    powers: &[f64],
    rate: f64,
    params: &ChannelParams,
    tolerance: f64,
) -> Result<TruncatedSeriesResult> {
    if !(tolerance > 0.0) {
        return Err(invalid("truncation tolerance must be positive"));
    }
    let l = powers.len();
    params.check_rounds(l)?;
    let sum_w: f64 = (1..=l).map(|i| params.correlation_weight(i)).sum();
    let order = (0..=MAX_TRUNCATION_ORDER)
        .find(|&n| degree_tail(params.m(), sum_w, n) <= tolerance)
        .ok_or(HarqError::TruncationNotConverged {
            order: MAX_TRUNCATION_ORDER,
            tail_bound: degree_tail(params.m(), sum_w, MAX_TRUNCATION_ORDER),
            tolerance,
        })?;
    type1_series(powers, rate, params, order)
}
