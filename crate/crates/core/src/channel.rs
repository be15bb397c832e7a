//! Exponentially correlated multivariate Nakagami-m block fading.
//!
//! Round `ι` (1-based) has squared amplitude `|h_ι|²` with mean `Ω_ι` and
//! fading order `m`. Rounds are coupled through a shared Gamma(m, 1) variate
//! `t`: conditionally on `t`, each `|h_ι|²` is an independent Poisson mixture
//! of gammas. With `c_ι = ρ^{2(ι+δ−1)}`:
//!
//! ```text
//! n_ι | t   ~ Poisson(ω_ι t),          ω_ι = c_ι / (1 − c_ι)
//! |h_ι|² | n ~ Gamma(m + n_ι, Ω_ι (1 − c_ι) / m)
//! ```
//!
//! Integrating out `t` gives the negative-multinomial mixture weights `W_n`,
//! and the whole vector has the correlation matrix `E` with off-diagonal
//! entries `ρ^{ι+κ+2δ−2}`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, HarqError, Result};
use crate::special::{ln_factorial, ln_gamma_int};

/// Statistical model of the fading process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelParams {
    m: u32,
    omegas: Vec<f64>,
    rho: f64,
    delta: f64,
}

impl ChannelParams {
    /// `omegas[ι-1]` is the mean channel power of round `ι`.
    pub fn new(m: u32, omegas: Vec<f64>, rho: f64, delta: f64) -> Result<Self> {
        if m == 0 {
            return Err(invalid("fading order m must be a positive integer"));
        }
        if omegas.is_empty() {
            return Err(invalid("at least one mean channel power is required"));
        }
        if let Some(bad) = omegas.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(invalid(format!("mean channel power must be positive, got {bad}")));
        }
        if !(0.0..1.0).contains(&rho) {
            return Err(invalid(format!("correlation rho must lie in [0, 1), got {rho}")));
        }
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(invalid(format!("feedback delay must be non-negative, got {delta}")));
        }
        if rho > 0.0 && delta == 0.0 {
            // c_1 = ρ^0 = 1 makes the first round a deterministic function of t.
            return Err(invalid(
                "feedback delay 0 with rho > 0 fully correlates the first round",
            ));
        }
        Ok(ChannelParams {
            m,
            omegas,
            rho,
            delta,
        })
    }

    /// Same mean power `omega` for `rounds` rounds.
    pub fn uniform(m: u32, omega: f64, rounds: usize, rho: f64, delta: f64) -> Result<Self> {
        Self::new(m, vec![omega; rounds.max(1)], rho, delta)
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    /// Number of rounds for which a mean power is configured.
    pub fn max_rounds(&self) -> usize {
        self.omegas.len()
    }

    pub(crate) fn check_rounds(&self, l: usize) -> Result<()> {
        if l > self.omegas.len() {
            return Err(invalid(format!(
                "{l} rounds requested but only {} mean channel powers configured",
                self.omegas.len()
            )));
        }
        Ok(())
    }

    /// Mean power of round `iota` (1-based).
    pub fn omega(&self, iota: usize) -> f64 {
        self.omegas[iota - 1]
    }

    /// `c_ι = ρ^{2(ι+δ−1)}` for round `iota ≥ 1`. Zero when `ρ = 0`.
    pub fn correlation_power(&self, iota: usize) -> f64 {
        assert!(iota >= 1, "round index is 1-based");
        if self.rho == 0.0 {
            return 0.0;
        }
        self.rho.powf(2.0 * (iota as f64 + self.delta - 1.0))
    }

    /// `ω_ι = c_ι / (1 − c_ι)`.
    pub fn correlation_weight(&self, iota: usize) -> f64 {
        let c = self.correlation_power(iota);
        c / (1.0 - c)
    }

    /// `ln ℓ(l, ρ) = −m [ln(1 + Σ ω_ι) + Σ ln(1 − c_ι)]`.
    pub fn ln_correlation_factor(&self, l: usize) -> f64 {
        let mut sum_w = 0.0;
        let mut ln_prod = 0.0;
        for iota in 1..=l {
            let c = self.correlation_power(iota);
            sum_w += c / (1.0 - c);
            ln_prod += (-c).ln_1p();
        }
        -(self.m as f64) * (sum_w.ln_1p() + ln_prod)
    }

    /// `ℓ(l, ρ) = ((1 + Σ ω_ι) Π (1 − c_ι))^{−m}`, which equals `det(E)^{−m}`.
    pub fn correlation_factor(&self, l: usize) -> f64 {
        self.ln_correlation_factor(l).exp()
    }

    /// Negative-multinomial mixture weight `W_n` for the series index `n`.
    pub fn mixture_weight(&self, n: &MixtureIndex) -> f64 {
        let l = n.rounds();
        let m = self.m as u64;
        let weights: Vec<f64> = (1..=l).map(|i| self.correlation_weight(i)).collect();
        let s = 1.0 + weights.iter().sum::<f64>();
        let total = n.total();
        let mut ln_w = ln_gamma_int(m + total) - ln_gamma_int(m) - self.m as f64 * s.ln();
        for (&k, &w) in n.counts().iter().zip(&weights) {
            if k == 0 {
                continue;
            }
            if w == 0.0 {
                return 0.0;
            }
            ln_w += k as f64 * (w / s).ln() - ln_factorial(k);
        }
        ln_w.exp()
    }

    /// Correlation matrix `E` of the first `l` rounds.
    pub fn correlation_matrix(&self, l: usize) -> CorrelationMatrix {
        let mut e = DMatrix::identity(l, l);
        if self.rho > 0.0 {
            for i in 0..l {
                for k in 0..l {
                    if i != k {
                        // 0-based: (i+1) + (k+1) + 2δ − 2 = i + k + 2δ
                        e[(i, k)] = self.rho.powf(i as f64 + k as f64 + 2.0 * self.delta);
                    }
                }
            }
        }
        CorrelationMatrix { entries: e }
    }
}

/// Index `n = (n_1, …, n_l)` of the mixture series.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MixtureIndex(Vec<u64>);

impl MixtureIndex {
    pub fn new(counts: Vec<u64>) -> Self {
        MixtureIndex(counts)
    }

    pub fn zeros(l: usize) -> Self {
        MixtureIndex(vec![0; l])
    }

    pub fn counts(&self) -> &[u64] {
        &self.0
    }

    pub fn rounds(&self) -> usize {
        self.0.len()
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }
}

/// Symmetric, unit-diagonal correlation matrix of the complex channel gains.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    entries: DMatrix<f64>,
}

impl CorrelationMatrix {
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[(row, col)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn determinant(&self) -> f64 {
        self.entries.determinant()
    }

    /// Checks positive definiteness by attempting a Cholesky factorization.
    pub fn check_positive_definite(&self) -> Result<()> {
        self.entries
            .clone()
            .cholesky()
            .map(|_| ())
            .ok_or(HarqError::NotPositiveDefinite)
    }
}

/// Draws `Gamma(shape, 1)` for a positive integer shape.
pub(crate) fn sample_gamma_int<R: Rng + ?Sized>(shape: u64, rng: &mut R) -> f64 {
    if shape <= 16 {
        // Sum of `shape` unit exponentials, as −ln of a product of uniforms.
        let mut prod = 1.0_f64;
        for _ in 0..shape {
            prod *= 1.0 - rng.random::<f64>();
        }
        -prod.ln()
    } else {
        Gamma::new(shape as f64, 1.0)
            .expect("positive shape")
            .sample(rng)
    }
}

/// Precomputed per-round constants for drawing channel realisations.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    m: u64,
    weights: Vec<f64>,
    scales: Vec<f64>,
}

impl ChannelSampler {
    pub fn new(params: &ChannelParams, l: usize) -> Result<Self> {
        if l == 0 {
            return Err(invalid("at least one round must be sampled"));
        }
        params.check_rounds(l)?;
        let weights = (1..=l).map(|i| params.correlation_weight(i)).collect();
        let scales = (1..=l)
            .map(|i| params.omega(i) * (1.0 - params.correlation_power(i)) / params.m() as f64)
            .collect();
        Ok(ChannelSampler {
            m: params.m() as u64,
            weights,
            scales,
        })
    }

    pub fn rounds(&self) -> usize {
        self.scales.len()
    }

    /// Fills `gains` with one realisation of `|h_1|², …, |h_l|²`.
    pub fn sample_gains<R: Rng + ?Sized>(&self, rng: &mut R, gains: &mut [f64]) {
        debug_assert_eq!(gains.len(), self.rounds());
        let t = sample_gamma_int(self.m, rng);
        for ((g, &w), &scale) in gains.iter_mut().zip(&self.weights).zip(&self.scales) {
            let rate = w * t;
            let n = if rate > 0.0 {
                Poisson::new(rate).expect("finite positive rate").sample(rng) as u64
            } else {
                0
            };
            *g = scale * sample_gamma_int(self.m + n, rng);
        }
    }

    /// One realisation of the amplitudes `|h_1|, …, |h_l|`.
    pub fn sample_amplitudes<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut gains = vec![0.0; self.rounds()];
        self.sample_gains(rng, &mut gains);
        gains.iter_mut().for_each(|g| *g = g.sqrt());
        gains
    }
}

/// Draws one vector of `l` correlated channel amplitudes.
pub fn sample_amplitudes<R: Rng + ?Sized>(
    l: usize,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<Vec<f64>> {
    Ok(ChannelSampler::new(params, l)?.sample_amplitudes(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma_p_int;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params(m: u32, rho: f64, delta: f64, l: usize) -> ChannelParams {
        ChannelParams::uniform(m, 1.0, l, rho, delta).unwrap()
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(ChannelParams::new(0, vec![1.0], 0.5, 1.0).is_err());
        assert!(ChannelParams::new(1, vec![], 0.5, 1.0).is_err());
        assert!(ChannelParams::new(1, vec![1.0, -1.0], 0.5, 1.0).is_err());
        assert!(ChannelParams::new(1, vec![1.0], 1.0, 1.0).is_err());
        assert!(ChannelParams::new(1, vec![1.0], -0.1, 1.0).is_err());
        assert!(ChannelParams::new(1, vec![1.0], 0.5, -1.0).is_err());
        assert!(ChannelParams::new(1, vec![1.0], 0.5, 0.0).is_err());
        assert!(ChannelParams::new(1, vec![1.0], 0.0, 0.0).is_ok());
    }

    #[test]
    fn correlation_weight_examples() {
        assert_eq!(params(1, 0.0, 1.0, 1).correlation_weight(1), 0.0);
        let p = params(1, 0.5, 1.0, 2);
        assert_relative_eq!(p.correlation_weight(1), 1.0 / 3.0, max_relative = 1e-15);
        assert_relative_eq!(p.correlation_weight(2), 1.0 / 15.0, max_relative = 1e-15);
    }

    #[test]
    fn correlation_factor_examples() {
        assert_relative_eq!(params(3, 0.7, 1.0, 1).correlation_factor(1), 1.0, max_relative = 1e-14);
        assert_eq!(params(2, 0.0, 1.0, 2).correlation_factor(2), 1.0);
        assert_relative_eq!(
            params(2, 0.5, 1.0, 2).correlation_factor(2),
            0.984375f64.powi(-2),
            max_relative = 1e-14
        );
    }

    #[test]
    fn correlation_factor_is_inverse_determinant_power() {
        for &rho in &[0.0, 0.3, 0.6, 0.9] {
            for l in 1..=5 {
                let p = params(2, rho, 1.5, l);
                let det = p.correlation_matrix(l).determinant();
                assert_relative_eq!(p.correlation_factor(l), det.powi(-2), max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn mixture_weight_examples() {
        let p = params(1, 0.5, 1.0, 1);
        assert_relative_eq!(
            p.mixture_weight(&MixtureIndex::new(vec![1])),
            0.1875,
            max_relative = 1e-14
        );
        let p3 = params(3, 0.5, 1.0, 3);
        let s: f64 = 1.0 + (1..=3).map(|i| p3.correlation_weight(i)).sum::<f64>();
        assert_relative_eq!(
            p3.mixture_weight(&MixtureIndex::zeros(3)),
            s.powi(-3),
            max_relative = 1e-14
        );
        let p0 = params(2, 0.0, 1.0, 2);
        assert_eq!(p0.mixture_weight(&MixtureIndex::new(vec![0, 1])), 0.0);
        assert_eq!(p0.mixture_weight(&MixtureIndex::zeros(2)), 1.0);
    }

    fn partial_weight_sum(p: &ChannelParams, l: usize, max_total: u64) -> f64 {
        // Enumerates every index with total ≤ max_total.
        fn rec(p: &ChannelParams, idx: &mut Vec<u64>, l: usize, left: u64, acc: &mut f64) {
            if idx.len() == l {
                *acc += p.mixture_weight(&MixtureIndex::new(idx.clone()));
                return;
            }
            for k in 0..=left {
                idx.push(k);
                rec(p, idx, l, left - k, acc);
                idx.pop();
            }
        }
        let mut acc = 0.0;
        rec(p, &mut Vec::new(), l, max_total, &mut acc);
        acc
    }

    #[test]
    fn single_round_weights_sum_to_one() {
        let p = params(1, 0.5, 1.0, 1);
        assert_relative_eq!(partial_weight_sum(&p, 1, 50), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn mixture_weights_partial_sums_approach_one() {
        for &rho in &[0.3, 0.6] {
            for &(l, m) in &[(1usize, 1u32), (2, 4), (3, 2), (4, 4)] {
                let p = params(m, rho, 1.0, l);
                let s = partial_weight_sum(&p, l, 50);
                assert!(s <= 1.0 + 1e-12, "partial sum {s} exceeds one");
                assert!(s > 1.0 - 1e-8, "rho={rho} l={l} m={m}: partial sum {s}");
            }
        }
    }

    #[test]
    fn mixture_partial_sums_increase() {
        let p = params(2, 0.8, 1.0, 2);
        let mut prev = 0.0;
        for n in 0..20 {
            let s = partial_weight_sum(&p, 2, n);
            assert!(s > prev);
            prev = s;
        }
    }

    #[test]
    fn correlation_matrix_examples() {
        let id = params(1, 0.0, 1.0, 3).correlation_matrix(3);
        assert_eq!(id.as_matrix(), &DMatrix::<f64>::identity(3, 3));

        let e2 = params(1, 0.5, 1.0, 2).correlation_matrix(2);
        assert_relative_eq!(e2.get(0, 1), 0.125, max_relative = 1e-15);
        assert_relative_eq!(e2.get(1, 0), 0.125, max_relative = 1e-15);
        assert_eq!(e2.get(0, 0), 1.0);

        let e3 = params(1, 0.5, 1.0, 3).correlation_matrix(3);
        assert_relative_eq!(e3.get(0, 1), 0.125, max_relative = 1e-15);
        assert_relative_eq!(e3.get(0, 2), 0.0625, max_relative = 1e-15);
        assert_relative_eq!(e3.get(1, 2), 0.03125, max_relative = 1e-15);
    }

    #[test]
    fn correlation_matrix_positive_definite() {
        for l in 1..=8 {
            for i in 0..=19 {
                let rho = 0.05 * i as f64;
                let e = params(1, rho, 1.0, l).correlation_matrix(l);
                e.check_positive_definite().unwrap();
                assert_eq!(e.as_matrix(), &e.as_matrix().transpose());
            }
        }
    }

    #[test]
    fn sampler_is_deterministic_per_seed() {
        let p = params(2, 0.6, 1.0, 3);
        let s = ChannelSampler::new(&p, 3).unwrap();
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..100).flat_map(|_| s.sample_amplitudes(&mut rng)).collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));
    }

    #[test]
    fn sampler_rejects_too_many_rounds() {
        let p = params(2, 0.6, 1.0, 2);
        assert!(ChannelSampler::new(&p, 3).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_amplitudes(0, &p, &mut rng).is_err());
    }

    #[test]
    fn sampler_marginal_mean() {
        let p = params(2, 0.0, 1.0, 1);
        let s = ChannelSampler::new(&p, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut g = [0.0];
        let n = 1_000_000;
        let mut sum = 0.0;
        for _ in 0..n {
            s.sample_gains(&mut rng, &mut g);
            sum += g[0];
        }
        assert!((sum / n as f64 - 1.0).abs() < 0.005);
    }

    #[test]
    fn sampler_correlation_matches_matrix() {
        // E holds the correlation of the complex gains; the squared gains of
        // the mixture have cov = Ω² c_1 c_2 / m and var = Ω² / m, so their
        // Pearson correlation is c_1 c_2 = E_12².
        let p = params(1, 0.5, 1.0, 2);
        let s = ChannelSampler::new(&p, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000usize;
        let mut xs = Vec::with_capacity(n);
        let mut g = [0.0; 2];
        for _ in 0..n {
            s.sample_gains(&mut rng, &mut g);
            xs.push(g);
        }
        let nf = n as f64;
        let mx = xs.iter().map(|g| g[0]).sum::<f64>() / nf;
        let my = xs.iter().map(|g| g[1]).sum::<f64>() / nf;
        let cov = xs.iter().map(|g| (g[0] - mx) * (g[1] - my)).sum::<f64>() / nf;
        let vx = xs.iter().map(|g| (g[0] - mx).powi(2)).sum::<f64>() / nf;
        let vy = xs.iter().map(|g| (g[1] - my).powi(2)).sum::<f64>() / nf;
        let r = cov / (vx * vy).sqrt();
        let target = p.correlation_matrix(2).get(0, 1).powi(2);
        // Standard error of a sample correlation ≈ (1 − r²)/√n.
        let se = (1.0 - target * target) / nf.sqrt();
        assert!(
            (r - target).abs() < 3.0 * se,
            "empirical {r}, expected {target}, se {se}"
        );
    }

    #[test]
    fn sampler_marginal_cdf_ks() {
        let n = 1_000_000usize;
        for &(m, rho) in &[(1u32, 0.8), (2, 0.5), (3, 0.3)] {
            let p = ChannelParams::new(m, vec![1.0, 2.5, 0.7], rho, 1.0).unwrap();
            let s = ChannelSampler::new(&p, 3).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(1234 + m as u64);
            let mut cols: Vec<Vec<f64>> = (0..3).map(|_| Vec::with_capacity(n)).collect();
            let mut g = [0.0; 3];
            for _ in 0..n {
                s.sample_gains(&mut rng, &mut g);
                for i in 0..3 {
                    cols[i].push(g[i]);
                }
            }
            for (i, col) in cols.iter_mut().enumerate() {
                col.sort_by(f64::total_cmp);
                let omega = p.omega(i + 1);
                let mut d: f64 = 0.0;
                for (k, &x) in col.iter().enumerate() {
                    let f = gamma_p_int(m as u64, m as f64 * x / omega);
                    d = d.max((f - k as f64 / n as f64).abs());
                    d = d.max(((k + 1) as f64 / n as f64 - f).abs());
                }
                // Kolmogorov critical value at 0.1% per column, about 1% over
                // the nine columns.
                let crit = 1.95 / (n as f64).sqrt();
                assert!(d < crit, "m={m} rho={rho} round={}: KS {d} ≥ {crit}", i + 1);
            }
        }
    }

    proptest! {
        #[test]
        fn single_round_factor_is_one(rho in 0.0f64..0.99, delta in 0.1f64..3.0, m in 1u32..6) {
            let p = params(m, rho, delta, 1);
            prop_assert!((p.correlation_factor(1) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn weights_decrease_with_round(rho in 0.01f64..0.99, delta in 0.1f64..3.0) {
            let p = params(1, rho, delta, 6);
            for i in 1..6 {
                prop_assert!(p.correlation_weight(i + 1) < p.correlation_weight(i));
            }
        }
    }
}
