//! High-SNR outage `φ_l / (Π_{k≤l} P_k)^m`.
//!
//! All three schemes share the diversity order `ml`; they differ only in the
//! coding-gain constant `φ_l`:
//!
//! ```text
//! Type I  m^{ml} ℓ (2^R − 1)^{ml}        / (Γ(m+1)^l  Π Ω^m)
//! CC      m^{ml} ℓ (2^R − 1)^{ml}        / (Γ(ml+1)   Π Ω^m)
//! IR      (ml)^{ml} ℓ (2^{R/l} − 1)^{ml} / (Γ(ml+1)   Π Ω^m)
//! ```

use crate::channel::ChannelParams;
use crate::error::Result;
use crate::special::{exp2_m1, ln_factorial};

use super::{check_powers, check_rate, HarqConfig, Scheme};

/// `ln φ_l`; `φ_0 = 1`.
pub fn ln_phi(scheme: Scheme, l: usize, rate: f64, params: &ChannelParams) -> Result<f64> {
    check_rate(rate)?;
    if l == 0 {
        return Ok(0.0);
    }
    params.check_rounds(l)?;
    let m = params.m() as u64;
    let ml = m * l as u64;
    let mf = m as f64;
    let ln_omegas: f64 = (1..=l).map(|i| params.omega(i).ln()).sum();
    let common = params.ln_correlation_factor(l) - mf * ln_omegas;
    let v = match scheme {
        Scheme::TypeI => {
            ml as f64 * (mf.ln() + exp2_m1(rate).ln()) - l as f64 * ln_factorial(m) + common
        }
        Scheme::ChaseCombining => {
            ml as f64 * (mf.ln() + exp2_m1(rate).ln()) - ln_factorial(ml) + common
        }
        Scheme::IncrementalRedundancy => {
            ml as f64 * ((ml as f64).ln() + exp2_m1(rate / l as f64).ln()) - ln_factorial(ml)
                + common
        }
    };
    Ok(v)
}

/// Coding-gain constant `φ_l`.
pub fn phi(scheme: Scheme, l: usize, rate: f64, params: &ChannelParams) -> Result<f64> {
    ln_phi(scheme, l, rate, params).map(f64::exp)
}

/// Asymptotic outage after `powers.len()` rounds; one for an empty schedule.
pub fn asymptotic_outage(
    scheme: Scheme,
    powers: &[f64],
    rate: f64,
    params: &ChannelParams,
) -> Result<f64> {
    check_powers(powers)?;
    let ln_p: f64 = powers.iter().map(|p| p.ln()).sum();
    let ln = ln_phi(scheme, powers.len(), rate, params)? - params.m() as f64 * ln_p;
    Ok(ln.exp())
}

/// Asymptotic outage of `scheme` after `l` rounds of `config`.
pub fn outage_asymptotic(
    scheme: Scheme,
    l: usize,
    config: &HarqConfig,
    params: &ChannelParams,
) -> Result<f64> {
    asymptotic_outage(scheme, config.rounds(l)?, config.rate, params)
}
