//! Outage probabilities of Type I HARQ, HARQ-CC and the HARQ-IR lower bound.
//!
//! All quantities live in the SNR domain: noise has unit variance, so round
//! `ι` carries mutual information `log2(1 + P_ι |h_ι|²)`.

mod asymptotic;
mod poles;
mod type1;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::error::{invalid, Result};
use crate::special::exp2_m1;

pub use asymptotic::{ln_phi, outage_asymptotic, phi, asymptotic_outage};
pub use poles::{
    cdf_y, mgf, mgf_poles, phi_coefficients, PoleDecomposition, CLUSTER_TOLERANCE,
};
pub use type1::{
    type1_series, type1_to_tolerance, TruncatedSeriesResult, DEFAULT_TRUNCATION_TOLERANCE,
    MAX_TRUNCATION_ORDER,
};

/// HARQ combining scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Only the latest packet is decoded.
    #[serde(rename = "type1")]
    TypeI,
    /// Chase combining: identical packets, maximal-ratio combined.
    #[serde(rename = "cc")]
    ChaseCombining,
    /// Incremental redundancy: mutual information accumulates.
    #[serde(rename = "ir")]
    IncrementalRedundancy,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [
        Scheme::TypeI,
        Scheme::ChaseCombining,
        Scheme::IncrementalRedundancy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::TypeI => "type1",
            Scheme::ChaseCombining => "cc",
            Scheme::IncrementalRedundancy => "ir",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = crate::HarqError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "type1" | "typei" | "type-i" | "i" => Ok(Scheme::TypeI),
            "cc" | "chase" => Ok(Scheme::ChaseCombining),
            "ir" => Ok(Scheme::IncrementalRedundancy),
            other => Err(invalid(format!("unknown HARQ scheme '{other}'"))),
        }
    }
}

/// A HARQ session: scheme, target rate and per-round transmit powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarqConfig {
    pub scheme: Scheme,
    /// Target rate R in bits/s/Hz.
    pub rate: f64,
    /// Transmit powers P_1..P_L (linear scale).
    pub powers: Vec<f64>,
}

impl HarqConfig {
    pub fn new(scheme: Scheme, rate: f64, powers: Vec<f64>) -> Result<Self> {
        if powers.is_empty() {
            return Err(invalid("at least one round is required"));
        }
        check_rate(rate)?;
        check_powers(&powers)?;
        Ok(HarqConfig {
            scheme,
            rate,
            powers,
        })
    }

    /// Maximum number of rounds L.
    pub fn max_rounds(&self) -> usize {
        self.powers.len()
    }

    fn rounds(&self, l: usize) -> Result<&[f64]> {
        if l > self.powers.len() {
            return Err(invalid(format!(
                "{l} rounds requested but the configuration allows {}",
                self.powers.len()
            )));
        }
        Ok(&self.powers[..l])
    }
}

pub(crate) fn check_rate(rate: f64) -> Result<()> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(invalid(format!("rate must be positive, got {rate}")));
    }
    Ok(())
}

pub(crate) fn check_powers(powers: &[f64]) -> Result<()> {
    if let Some(p) = powers.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
        return Err(invalid(format!("transmit power must be positive, got {p}")));
    }
    Ok(())
}

/// CC decoding threshold `2^R − 1` on the combined SNR.
pub fn cc_threshold(rate: f64) -> f64 {
    exp2_m1(rate)
}

/// IR lower-bound threshold `l (2^{R/l} − 1)` on the combined SNR.
pub fn ir_threshold(rate: f64, l: usize) -> f64 {
    l as f64 * exp2_m1(rate / l as f64)
}

/// Type I outage after `l` rounds via the series truncated at total order `order`.
pub fn outage_type1(
    config: &HarqConfig,
    params: &ChannelParams,
    l: usize,
    order: usize,
) -> Result<TruncatedSeriesResult> {
    type1_series(config.rounds(l)?, config.rate, params, order)
}

/// HARQ-CC outage after `l` rounds, `F_Y(2^R − 1)`.
pub fn outage_cc(config: &HarqConfig, params: &ChannelParams, l: usize) -> Result<f64> {
    cc_outage(config.rounds(l)?, config.rate, params)
}

/// Jensen lower bound on the HARQ-IR outage after `l` rounds, `F_Y(l(2^{R/l} − 1))`.
pub fn outage_ir_lower(config: &HarqConfig, params: &ChannelParams, l: usize) -> Result<f64> {
    ir_lower_outage(config.rounds(l)?, config.rate, params)
}

pub fn cc_outage(powers: &[f64], rate: f64, params: &ChannelParams) -> Result<f64> {
    if powers.is_empty() {
        return Ok(1.0);
    }
    check_rate(rate)?;
    let decomposition = mgf_poles(powers, params)?;
    cdf_y(cc_threshold(rate), &decomposition)
}

pub fn ir_lower_outage(powers: &[f64], rate: f64, params: &ChannelParams) -> Result<f64> {
    if powers.is_empty() {
        return Ok(1.0);
    }
    check_rate(rate)?;
    let decomposition = mgf_poles(powers, params)?;
    cdf_y(ir_threshold(rate, powers.len()), &decomposition)
}

/// Exact outage (IR: its lower bound) after `powers.len()` rounds. No rounds
/// means no transmission yet, which is outage with probability one.
pub fn exact_outage(
    scheme: Scheme,
    powers: &[f64],
    rate: f64,
    params: &ChannelParams,
    truncation_tolerance: f64,
) -> Result<f64> {
    if powers.is_empty() {
        return Ok(1.0);
    }
    match scheme {
        Scheme::TypeI => {
            type1_to_tolerance(powers, rate, params, truncation_tolerance).map(|r| r.value)
        }
        Scheme::ChaseCombining => cc_outage(powers, rate, params),
        Scheme::IncrementalRedundancy => ir_lower_outage(powers, rate, params),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn scheme_parsing() {
        assert_eq!("type1".parse::<Scheme>().unwrap(), Scheme::TypeI);
        assert_eq!("CC".parse::<Scheme>().unwrap(), Scheme::ChaseCombining);
        assert_eq!("ir".parse::<Scheme>().unwrap(), Scheme::IncrementalRedundancy);
        assert!("harq".parse::<Scheme>().is_err());
        for s in Scheme::ALL {
            assert_eq!(s.to_string().parse::<Scheme>().unwrap(), s);
        }
    }

    #[test]
    fn config_validation() {
        assert!(HarqConfig::new(Scheme::TypeI, 2.0, vec![]).is_err());
        assert!(HarqConfig::new(Scheme::TypeI, 0.0, vec![1.0]).is_err());
        assert!(HarqConfig::new(Scheme::TypeI, 2.0, vec![1.0, 0.0]).is_err());
        let c = HarqConfig::new(Scheme::TypeI, 2.0, vec![1.0, 2.0]).unwrap();
        assert_eq!(c.max_rounds(), 2);
        let p = ChannelParams::uniform(1, 1.0, 3, 0.0, 1.0).unwrap();
        assert!(outage_cc(&c, &p, 3).is_err());
    }

    #[test]
    fn thresholds_coincide_at_one_round() {
        assert_relative_eq!(ir_threshold(2.0, 1), cc_threshold(2.0), max_relative = 1e-15);
        assert_relative_eq!(ir_threshold(2.0, 2), 2.0, max_relative = 1e-15);
        for l in 2..6 {
            assert!(ir_threshold(2.0, l) < cc_threshold(2.0));
        }
    }

    #[test]
    fn single_round_schemes_coincide() {
        for &(m, rho) in &[(1u32, 0.0), (2, 0.5), (3, 0.8)] {
            let p = ChannelParams::uniform(m, 1.3, 1, rho, 1.0).unwrap();
            let c = HarqConfig::new(Scheme::TypeI, 2.0, vec![12.0]).unwrap();
            let t1 = type1_to_tolerance(&c.powers, 2.0, &p, 1e-15).unwrap().value;
            let cc = outage_cc(&c, &p, 1).unwrap();
            let ir = outage_ir_lower(&c, &p, 1).unwrap();
            assert_relative_eq!(t1, cc, max_relative = 1e-12);
            assert_relative_eq!(ir, cc, max_relative = 1e-12);
        }
    }

    #[test]
    fn scheme_ordering() {
        for &(m, rho) in &[(1u32, 0.0), (2, 0.5), (3, 0.8)] {
            for l in 2..=4 {
                let p = ChannelParams::uniform(m, 1.0, l, rho, 1.0).unwrap();
                let powers: Vec<f64> = (0..l).map(|i| 5.0 + 3.0 * i as f64).collect();
                let t1 = exact_outage(Scheme::TypeI, &powers, 2.0, &p, 1e-14).unwrap();
                let cc = exact_outage(Scheme::ChaseCombining, &powers, 2.0, &p, 1e-14).unwrap();
                let ir = exact_outage(Scheme::IncrementalRedundancy, &powers, 2.0, &p, 1e-14)
                    .unwrap();
                assert!(ir <= cc && cc <= t1, "m={m} rho={rho} l={l}: {ir} {cc} {t1}");
            }
        }
    }

    #[test]
    fn empty_round_set_is_certain_outage() {
        let p = ChannelParams::uniform(1, 1.0, 1, 0.0, 1.0).unwrap();
        for s in Scheme::ALL {
            assert_eq!(exact_outage(s, &[], 2.0, &p, 1e-12).unwrap(), 1.0);
        }
    }
}
