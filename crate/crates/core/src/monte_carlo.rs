//! Direct simulation of the outage events.
//!
//! Trials are split into fixed blocks; block `b` draws from the ChaCha stream
//! `b` of the seed, so the counts depend only on `(seed, trials)` and not on
//! how many worker threads share the blocks. One channel realisation per
//! trial is evaluated against every scheme and every round prefix, which
//! gives common random numbers across schemes and rounds.

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, ChannelSampler};
use crate::error::{invalid, Result};
use crate::outage::{cc_threshold, check_powers, check_rate, Scheme};

const BLOCK: u64 = 4096;
const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub p_hat: f64,
    pub trials: u64,
    /// 95% normal-approximation half-width `1.96 √(p̂(1 − p̂)/n)`.
    pub half_width: f64,
    pub seed: u64,
}

impl OutageEstimate {
    fn from_count(count: u64, trials: u64, seed: u64) -> Self {
        let p_hat = count as f64 / trials as f64;
        OutageEstimate {
            p_hat,
            trials,
            half_width: Z_95 * (p_hat * (1.0 - p_hat) / trials as f64).sqrt(),
            seed,
        }
    }

    /// Standard error `√(p̂(1 − p̂)/n)`.
    pub fn standard_error(&self) -> f64 {
        self.half_width / Z_95
    }
}

/// Estimates for every scheme and every prefix `l = 1..L` from one set of
/// channel draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeEstimates {
    pub type1: Vec<OutageEstimate>,
    pub cc: Vec<OutageEstimate>,
    pub ir: Vec<OutageEstimate>,
}

impl SchemeEstimates {
    pub fn get(&self, scheme: Scheme) -> &[OutageEstimate] {
        match scheme {
            Scheme::TypeI => &self.type1,
            Scheme::ChaseCombining => &self.cc,
            Scheme::IncrementalRedundancy => &self.ir,
        }
    }
}

/// Outage counts indexed `[scheme][l − 1]`.
type Counts = [Vec<u64>; 3];

fn count_block(sampler: &ChannelSampler, powers: &[f64], rate: f64, seed: u64, block: u64, n: u64) -> Counts {
    let l = powers.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    let threshold = cc_threshold(rate);
    let mut counts: Counts = [vec![0; l], vec![0; l], vec![0; l]];
    let mut gains = vec![0.0; l];
    for _ in 0..n {
        sampler.sample_gains(&mut rng, &mut gains);
        let mut all_below = true;
        let mut snr = 0.0;
        let mut info = 0.0;
        for (k, (&g, &p)) in gains.iter().zip(powers).enumerate() {
            let s = p * g;
            all_below &= s < threshold;
            snr += s;
            info += s.ln_1p();
            counts[0][k] += all_below as u64;
            counts[1][k] += (snr < threshold) as u64;
            counts[2][k] += (info / std::f64::consts::LN_2 < rate) as u64;
        }
    }
    counts
}

/// Simulates `trials` realisations over `powers.len()` rounds and estimates
/// the outage of every scheme after each round.
pub fn estimate_all_schemes(
    powers: &[f64],
    rate: f64,
    params: &ChannelParams,
    trials: u64,
    seed: u64,
) -> Result<SchemeEstimates> {
    if trials == 0 {
        return Err(invalid("at least one trial is required"));
    }
    check_rate(rate)?;
    check_powers(powers)?;
    let l = powers.len();
    let sampler = ChannelSampler::new(params, l)?;
    let blocks = trials.div_ceil(BLOCK);
    let counts = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let n = BLOCK.min(trials - b * BLOCK);
            count_block(&sampler, powers, rate, seed, b, n)
        })
        .reduce(
            || [vec![0; l], vec![0; l], vec![0; l]],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    x.iter_mut().zip(y).for_each(|(u, v)| *u += v);
                }
                a
            },
        );
    let to_estimates = |c: &[u64]| -> Vec<OutageEstimate> {
        c.iter()
            .map(|&k| OutageEstimate::from_count(k, trials, seed))
            .collect()
    };
    let out = SchemeEstimates {
        type1: to_estimates(&counts[0]),
        cc: to_estimates(&counts[1]),
        ir: to_estimates(&counts[2]),
    };
    for s in Scheme::ALL {
        if let Some(e) = out.get(s).last() {
            if e.p_hat * (trials as f64) < 100.0 {
                warn!(
                    "{s}: only {} outage events in {trials} trials; the estimate is unreliable",
                    (e.p_hat * trials as f64).round()
                );
            }
        }
    }
    Ok(out)
}

/// Outage estimates of `scheme` after each of the rounds `1..=powers.len()`.
pub fn estimate_outage_sequence(
    scheme: Scheme,
    powers: &[f64],
    rate: f64,
    params: &ChannelParams,
    trials: u64,
    seed: u64,
) -> Result<Vec<OutageEstimate>> {
    let all = estimate_all_schemes(powers, rate, params, trials, seed)?;
    Ok(all.get(scheme).to_vec())
}

/// Outage estimate of `scheme` after `l` rounds with powers `powers[..l]`.
pub fn estimate_outage(
    scheme: Scheme,
    l: usize,
    powers: &[f64],
    rate: f64,
    params: &ChannelParams,
    trials: u64,
    seed: u64,
) -> Result<OutageEstimate> {
    if l == 0 || l > powers.len() {
        return Err(invalid(format!(
            "round count {l} outside 1..={}",
            powers.len()
        )));
    }
    let seq = estimate_outage_sequence(scheme, &powers[..l], rate, params, trials, seed)?;
    Ok(seq[l - 1])
}
