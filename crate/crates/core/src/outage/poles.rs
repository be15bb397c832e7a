//! CDF of the combined SNR `Y_l = Σ P_ι |h_ι|²` by MGF partial fractions.
//!
//! The MGF is `M(s) = det(I − s A)^{−m}` with `A = F^{1/2} E F^{1/2}` and
//! `F = diag(Ω_ι P_ι / m)`. Its poles are the reciprocals `λ` of the
//! eigenvalues of `A`; repeated eigenvalues give poles of order `m q`.
//! Inverting `M(−s)/s` by residues gives
//!
//! ```text
//! F_Y(y) = 1 + K Σ_κ Σ_{ς=1}^{m q_κ} Φ_κς(−λ_κ) / ((m q_κ − ς)! (ς − 1)!) · y^{m q_κ − ς} e^{−λ_κ y}
//! ```
//!
//! with `K = m^{ml} ℓ(l, ρ) / Π Ω_ι^m P_ι^m` and `Φ_κς` the `(ς−1)`-th
//! derivative of `s^{−1} Π_{τ≠κ} (s + λ_τ)^{−m q_τ}`.
//!
//! For small `y` the residue sum cancels against the leading 1. Once it
//! loses more than three digits the CDF is also evaluated from its Maclaurin
//! series at the origin, which starts at `K y^{ml} / (ml)!`, and the better
//! conditioned of the two is returned. If both lose more than six digits the
//! evaluation fails.

use log::warn;
use nalgebra::{DMatrix, SymmetricEigen};

use crate::channel::ChannelParams;
use crate::error::{invalid, HarqError, Result};
use crate::special::{ln_binomial, ln_factorial, LogScalar};

use super::check_powers;

/// Relative gap below which two eigenvalues are merged into one pole.
pub const CLUSTER_TOLERANCE: f64 = 1e-8;

/// Largest tolerated ratio between the summed magnitudes and the result.
const CANCELLATION_LIMIT: f64 = 1e6;

/// Ratio above which the Maclaurin series is tried as well.
const PREFERRED_LIMIT: f64 = 1e3;

const MACLAURIN_MAX_TERMS: usize = 20_000;

/// Distinct poles of the MGF of `Y_l` with their partial-fraction data.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleDecomposition {
    m: u32,
    poles: Vec<f64>,
    multiplicities: Vec<usize>,
    /// `coefficients[κ][n] = Φ_{κ,n+1}(−λ_κ) / n!`, the Taylor coefficients of
    /// `s^{−1} Π_{τ≠κ}(s + λ_τ)^{−m q_τ}` around `−λ_κ`.
    coefficients: Vec<Vec<LogScalar>>,
    ln_prefactor: f64,
    conditioning_warning: bool,
}

impl PoleDecomposition {
    /// Distinct poles `λ_κ`, ascending.
    pub fn poles(&self) -> &[f64] {
        &self.poles
    }

    /// Eigenvalue multiplicities `q_κ`; they sum to the number of rounds.
    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn fading_order(&self) -> u32 {
        self.m
    }

    pub fn rounds(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// `ln K`, with `K = m^{ml} ℓ(l, ρ) / Π Ω^m P^m`.
    pub fn ln_prefactor(&self) -> f64 {
        self.ln_prefactor
    }

    pub fn prefactor(&self) -> f64 {
        self.ln_prefactor.exp()
    }

    /// `Φ_κς(−λ_κ)` for 1-based `kappa` and `varsigma ∈ 1..=m q_κ`.
    pub fn phi(&self, kappa: usize, varsigma: usize) -> f64 {
        let c = self.coefficients[kappa - 1][varsigma - 1];
        c.scale_ln(ln_factorial(varsigma as u64 - 1)).to_f64()
    }

    /// Set when eigenvalues that are analytically distinct were merged.
    pub fn conditioning_warning(&self) -> bool {
        self.conditioning_warning
    }

    /// `M(s)` evaluated from the poles: `K Π (λ_κ − s)^{−m q_κ}`, for `s < min λ`.
    pub fn mgf(&self, s: f64) -> f64 {
        let m = self.m as f64;
        let ln: f64 = self
            .poles
            .iter()
            .zip(&self.multiplicities)
            .map(|(&lam, &q)| -m * q as f64 * (lam - s).ln())
            .sum();
        (self.ln_prefactor + ln).exp()
    }
}

/// `M(s) = E[e^{s Y_l}]` from the closed product form of the channel model,
/// without any matrix algebra. Valid for `s` below the smallest pole.
pub fn mgf(s: f64, powers: &[f64], params: &ChannelParams) -> Result<f64> {
    check_powers(powers)?;
    params.check_rounds(powers.len())?;
    let m = params.m() as f64;
    let mut prod = 1.0;
    let mut sum = 1.0;
    for (i, &p) in powers.iter().enumerate() {
        let iota = i + 1;
        let c = params.correlation_power(iota);
        let g = s * p * params.omega(iota) / m;
        prod *= 1.0 - g * (1.0 - c);
        sum += g * c / (g * (1.0 - c) - 1.0);
    }
    Ok((prod * sum).powf(-m))
}

/// Number of distinct eigenvalues of `A = D + w wᵀ` implied by exact
/// coincidences among the diagonal entries.
fn expected_distinct(diagonal: &[f64], rank_one: bool) -> usize {
    let mut d = diagonal.to_vec();
    d.sort_by(f64::total_cmp);
    let mut groups = 0;
    let mut repeated = 0;
    let mut i = 0;
    while i < d.len() {
        let mut j = i + 1;
        while j < d.len() && d[j] == d[i] {
            j += 1;
        }
        groups += 1;
        if j - i > 1 {
            repeated += 1;
        }
        i = j;
    }
    if rank_one {
        // Each distinct diagonal value yields one secular root; a value of
        // multiplicity k ≥ 2 also survives as an eigenvalue of multiplicity k − 1.
        groups + repeated
    } else {
        groups
    }
}

/// Eigen-decomposes `F^{1/2} E F^{1/2}` and builds the pole decomposition of
/// the MGF of `Y_l`, `l = powers.len()`.
pub fn mgf_poles(powers: &[f64], params: &ChannelParams) -> Result<PoleDecomposition> {
    let l = powers.len();
    if l == 0 {
        return Err(invalid("at least one round is required"));
    }
    check_powers(powers)?;
    params.check_rounds(l)?;
    let m = params.m();
    let mf = m as f64;

    let scales: Vec<f64> = (1..=l).map(|i| params.omega(i) * powers[i - 1] / mf).collect();
    let e = params.correlation_matrix(l);
    let sqrt_f: Vec<f64> = scales.iter().map(|f| f.sqrt()).collect();
    let a = DMatrix::from_fn(l, l, |i, k| sqrt_f[i] * e.get(i, k) * sqrt_f[k]);
    let eigen = SymmetricEigen::new(a);
    let mut lambdas = Vec::with_capacity(l);
    for &mu in eigen.eigenvalues.iter() {
        if !(mu > 0.0) {
            return Err(HarqError::NotPositiveDefinite);
        }
        lambdas.push(1.0 / mu);
    }
    lambdas.sort_by(f64::total_cmp);

    // Cluster nearly equal eigenvalues.
    let mut poles: Vec<f64> = Vec::new();
    let mut multiplicities: Vec<usize> = Vec::new();
    let mut members: Vec<f64> = Vec::new();
    for &lam in &lambdas {
        if let Some(&first) = members.first() {
            if (lam - first) / lam >= CLUSTER_TOLERANCE {
                poles.push(members.iter().sum::<f64>() / members.len() as f64);
                multiplicities.push(members.len());
                members.clear();
            }
        }
        members.push(lam);
    }
    poles.push(members.iter().sum::<f64>() / members.len() as f64);
    multiplicities.push(members.len());

    let diagonal: Vec<f64> = (1..=l)
        .map(|i| scales[i - 1] * (1.0 - params.correlation_power(i)))
        .collect();
    let expected = expected_distinct(&diagonal, params.rho() > 0.0);
    let conditioning_warning = poles.len() < expected;
    if conditioning_warning {
        warn!(
            "MGF poles collapsed: {} distinct after clustering, {} expected analytically",
            poles.len(),
            expected
        );
    }

    let ln_prefactor = l as f64 * mf * mf.ln() + params.ln_correlation_factor(l)
        - mf * scales
            .iter()
            .map(|f| (f * mf).ln())
            .sum::<f64>();

    let coefficients = phi_coefficients(&poles, &multiplicities, m)?;
    Ok(PoleDecomposition {
        m,
        poles,
        multiplicities,
        coefficients,
        ln_prefactor,
        conditioning_warning,
    })
}

/// Taylor coefficients of `g_κ(s) = s^{−1} Π_{τ≠κ}(s + λ_τ)^{−m q_τ}` around
/// `s = −λ_κ`, for orders `0..m q_κ`. Entry `[κ][n]` is `Φ_{κ,n+1}(−λ_κ)/n!`.
///
/// The log-derivative `h = g'/g = −1/s − Σ m q_τ/(s + λ_τ)` has explicit
/// Taylor coefficients, and `g' = g h` gives the recurrence
/// `(n+1) a_{n+1} = Σ_k a_{n−k} b_k`. Coefficients are rescaled by the
/// distance to the nearest other singularity so the recurrence stays in
/// range; results are returned in log-magnitude form.
pub fn phi_coefficients(
    poles: &[f64],
    multiplicities: &[usize],
    m: u32,
) -> Result<Vec<Vec<LogScalar>>> {
    if poles.len() != multiplicities.len() || poles.is_empty() {
        return Err(invalid("poles and multiplicities must be non-empty and aligned"));
    }
    if let Some(p) = poles.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
        return Err(invalid(format!("poles must be positive, got {p}")));
    }
    let mf = m as f64;
    let mut out = Vec::with_capacity(poles.len());
    for (kappa, &lam) in poles.iter().enumerate() {
        let order = m as usize * multiplicities[kappa];
        let s0 = -lam;

        // g(s0)
        let mut ln_a0 = -lam.ln();
        let mut sign_a0 = -1.0;
        let mut sigma = lam;
        for (tau, &other) in poles.iter().enumerate() {
            if tau == kappa {
                continue;
            }
            let gap = other - lam;
            if gap == 0.0 {
                return Err(invalid("poles must be pairwise distinct"));
            }
            let power = mf * multiplicities[tau] as f64;
            ln_a0 -= power * gap.abs().ln();
            if gap < 0.0 && (m as usize * multiplicities[tau]) % 2 == 1 {
                sign_a0 = -sign_a0;
            }
            sigma = sigma.min(gap.abs());
        }

        // Scaled log-derivative coefficients b_k σ^{k+1}.
        let scaled_b: Vec<f64> = (0..order)
            .map(|k| {
                let e = (k + 1) as i32;
                let mut v = (sigma / s0).powi(e);
                for (tau, &other) in poles.iter().enumerate() {
                    if tau != kappa {
                        v += mf * multiplicities[tau] as f64 * (sigma / (s0 + other)).powi(e);
                    }
                }
                if k % 2 == 0 {
                    -v
                } else {
                    v
                }
            })
            .collect();

        let mut scaled_a = vec![0.0; order];
        scaled_a[0] = 1.0;
        for n in 0..order.saturating_sub(1) {
            let s: f64 = (0..=n).map(|k| scaled_a[n - k] * scaled_b[k]).sum();
            scaled_a[n + 1] = s / (n + 1) as f64;
        }

        let ln_sigma = sigma.ln();
        let coeffs = scaled_a
            .iter()
            .enumerate()
            .map(|(n, &a)| {
                if a == 0.0 {
                    LogScalar::ZERO
                } else {
                    LogScalar {
                        ln_abs: ln_a0 + a.abs().ln() - n as f64 * ln_sigma,
                        sign: sign_a0 * a.signum(),
                    }
                }
            })
            .collect();
        out.push(coeffs);
    }
    Ok(out)
}

/// CDF of `Y_l` at `y`.
///
/// Evaluates the partial-fraction form, switching to the Maclaurin series
/// when that is better conditioned.
pub fn cdf_y(y: f64, decomposition: &PoleDecomposition) -> Result<f64> {
    if y.is_nan() || y < 0.0 {
        return Err(invalid(format!("CDF argument must be non-negative, got {y}")));
    }
    if y == 0.0 {
        return Ok(0.0);
    }
    if y.is_infinite() {
        return Ok(1.0);
    }
    let (value, magnitude) = residue_sum(y, decomposition);
    let residue_loss = if value > 0.0 && magnitude.is_finite() {
        magnitude / value
    } else {
        f64::INFINITY
    };
    if residue_loss <= PREFERRED_LIMIT {
        return Ok(value.min(1.0));
    }
    match maclaurin(y, decomposition) {
        Ok((series, loss)) if loss <= residue_loss && loss <= CANCELLATION_LIMIT => Ok(series),
        _ if residue_loss <= CANCELLATION_LIMIT => Ok(value.min(1.0)),
        Ok((_, loss)) => Err(HarqError::Cancellation {
            y,
            detail: format!(
                "partial fractions lose a factor {residue_loss:e} and the Maclaurin series {loss:e}"
            ),
        }),
        Err(e) => Err(e),
    }
}

/// `(1 + Σ residues, Σ |residues|)`.
fn residue_sum(y: f64, d: &PoleDecomposition) -> (f64, f64) {
    let ln_y = y.ln();
    let mut sum = 0.0;
    let mut magnitude = 0.0;
    for ((&lam, &q), coeffs) in d.poles.iter().zip(&d.multiplicities).zip(&d.coefficients) {
        let order = d.m as usize * q;
        for (n, c) in coeffs.iter().enumerate() {
            if c.sign == 0.0 {
                continue;
            }
            let power = (order - 1 - n) as u64;
            let ln_term = d.ln_prefactor + c.ln_abs + power as f64 * ln_y
                - ln_factorial(power)
                - lam * y;
            let term = ln_term.exp();
            sum += c.sign * term;
            magnitude += term;
        }
    }
    (1.0 + sum, magnitude)
}

/// `F_Y(y) = K Σ_{k≥0} e_k y^{ml+k} / (ml+k)!`, where `Σ e_k u^k` expands
/// `Π_κ (1 + λ_κ u)^{−m q_κ}`. Summed until a majorant bound on the
/// remainder falls below double precision. Returns the value and the ratio
/// of summed term magnitudes to the series.
fn maclaurin(y: f64, d: &PoleDecomposition) -> Result<(f64, f64)> {
    let mf = d.m as f64;
    let total_order = (d.m as usize * d.rounds()) as u64;
    let lam_max = d.poles.iter().cloned().fold(0.0, f64::max);
    let z = lam_max * y;
    let weights: Vec<f64> = d.multiplicities.iter().map(|&q| mf * q as f64).collect();
    let ratios: Vec<f64> = d.poles.iter().map(|&l| l / lam_max).collect();

    // Log-derivative coefficients of Π(1 + r_κ v)^{−w_κ}, v = Λ u.
    let mut ratio_powers = ratios.clone();
    let mut c: Vec<f64> = Vec::new();
    let mut e: Vec<f64> = vec![1.0];

    let mut series = 1.0;
    let mut magnitude = 1.0;
    // w_k = z^k (ml)! / (ml + k)!, bound_k = C(ml + k − 1, k) w_k.
    let mut w = 1.0;
    let mut converged = false;
    for k in 0..MACLAURIN_MAX_TERMS {
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        let cj: f64 = weights
            .iter()
            .zip(&ratio_powers)
            .map(|(&wt, &rp)| wt * rp)
            .sum::<f64>()
            * sign;
        c.push(cj);
        for (rp, &r) in ratio_powers.iter_mut().zip(&ratios) {
            *rp *= r;
        }
        let next: f64 = (0..=k).map(|j| e[k - j] * c[j]).sum::<f64>() / (k + 1) as f64;
        e.push(next);

        let kk = (k + 1) as u64;
        w *= z / (total_order + kk) as f64;
        let term = next * w;
        series += term;
        magnitude += term.abs();

        let ln_bound = if total_order > 0 {
            ln_binomial(total_order + kk - 1, kk)
        } else {
            0.0
        } + w.ln();
        let q = z / (kk + 2) as f64;
        if q < 1.0 {
            let remainder = ln_bound.exp() * z / (kk + 1) as f64 / (1.0 - q);
            if remainder <= 1e-17 * series.abs() || w == 0.0 {
                converged = true;
                break;
            }
        }
    }
    if !converged {
        return Err(HarqError::Cancellation {
            y,
            detail: "Maclaurin series did not converge".into(),
        });
    }
    if !(series > 0.0) {
        return Ok((0.0, f64::INFINITY));
    }
    let ln_lead =
        d.ln_prefactor + total_order as f64 * y.ln() - ln_factorial(total_order);
    Ok(((ln_lead + series.ln()).exp().clamp(0.0, 1.0), magnitude / series))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma_p_int;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn params(m: u32, rho: f64, l: usize) -> ChannelParams {
        ChannelParams::uniform(m, 1.0, l, rho, 1.0).unwrap()
    }

    #[test]
    fn equal_independent_rounds_give_single_pole() {
        let d = mgf_poles(&[10.0, 10.0], &params(2, 0.0, 2)).unwrap();
        assert_eq!(d.poles().len(), 1);
        assert_relative_eq!(d.poles()[0], 0.2, max_relative = 1e-14);
        assert_eq!(d.multiplicities(), &[2]);
        assert!(!d.conditioning_warning());
    }

    #[test]
    fn unequal_independent_rounds() {
        let d = mgf_poles(&[10.0, 20.0], &params(1, 0.0, 2)).unwrap();
        assert_eq!(d.multiplicities(), &[1, 1]);
        assert_relative_eq!(d.poles()[0], 0.05, max_relative = 1e-14);
        assert_relative_eq!(d.poles()[1], 0.1, max_relative = 1e-14);
    }

    #[test]
    fn correlated_poles_satisfy_mgf_identity() {
        let p = params(1, 0.5, 2);
        let powers = [10.0, 20.0];
        let d = mgf_poles(&powers, &p).unwrap();
        assert_eq!(d.multiplicities(), &[1, 1]);
        // Eigenvalues of [[10, 0.125√200], [0.125√200, 20]].
        let off = 0.125 * 200f64.sqrt();
        let mean = 15.0;
        let half = (25.0 + off * off).sqrt();
        assert_relative_eq!(d.poles()[0], 1.0 / (mean + half), max_relative = 1e-13);
        assert_relative_eq!(d.poles()[1], 1.0 / (mean - half), max_relative = 1e-13);
        for &s in &[-0.01, -0.1, -1.0] {
            let direct = mgf(s, &powers, &p).unwrap();
            assert_relative_eq!(d.mgf(s), direct, max_relative = 1e-12);
        }
    }

    #[test]
    fn prefactor_is_product_of_pole_powers() {
        let p = ChannelParams::new(3, vec![1.0, 0.5, 2.0], 0.7, 1.0).unwrap();
        let d = mgf_poles(&[4.0, 9.0, 2.0], &p).unwrap();
        let from_poles: f64 = d
            .poles()
            .iter()
            .zip(d.multiplicities())
            .map(|(&l, &q)| 3.0 * q as f64 * l.ln())
            .sum();
        assert_relative_eq!(d.ln_prefactor(), from_poles, max_relative = 1e-12);
    }

    #[test]
    fn phi_coefficient_examples() {
        let lam = 0.37;
        let single = phi_coefficients(&[lam], &[1], 1).unwrap();
        assert_relative_eq!(single[0][0].to_f64(), -1.0 / lam, max_relative = 1e-15);

        let double = phi_coefficients(&[lam], &[1], 2).unwrap();
        assert_relative_eq!(double[0][1].to_f64(), -1.0 / (lam * lam), max_relative = 1e-14);

        let two = phi_coefficients(&[0.1, 0.05], &[1, 1], 1).unwrap();
        assert_relative_eq!(two[0][0].to_f64(), 200.0, max_relative = 1e-13);
    }

    /// Derivatives of g by repeated central differences on a polynomial-free
    /// closed form are too noisy; instead compare against the Leibniz expansion
    /// of s^{-1} (s+a)^{-p}, whose derivatives are known in closed form.
    #[test]
    fn phi_coefficients_match_leibniz_expansion() {
        let (lam, other, m, q_other) = (0.3f64, 0.8f64, 2u32, 2usize);
        let p = (m as usize * q_other) as i32;
        let coeffs = phi_coefficients(&[lam, other], &[2, q_other], m).unwrap();
        let s0 = -lam;
        for n in 0..4usize {
            // d^n/ds^n [s^{-1}(s+a)^{-p}] / n! = Σ_j [(-1)^j s^{-1-j}] [C(-p, n-j) (s+a)^{-p-(n-j)}]
            let mut v = 0.0;
            for j in 0..=n {
                let k = n - j;
                let t1 = (-1f64).powi(j as i32) * s0.powi(-1 - j as i32);
                let mut binom = 1.0;
                for i in 0..k {
                    binom *= (-p - i as i32) as f64 / (i + 1) as f64;
                }
                let t2 = binom * (s0 + other).powi(-p - k as i32);
                v += t1 * t2;
            }
            assert_relative_eq!(coeffs[0][n].to_f64(), v, max_relative = 1e-12);
        }
    }

    #[test]
    fn cdf_examples() {
        let d = mgf_poles(&[10.0, 20.0], &params(1, 0.0, 2)).unwrap();
        assert_eq!(cdf_y(0.0, &d).unwrap(), 0.0);
        let (l1, l2) = (0.1f64, 0.05f64);
        let y = 1.0;
        let hypo = 1.0 - (l2 * (-l1 * y).exp() - l1 * (-l2 * y).exp()) / (l2 - l1);
        assert_relative_eq!(cdf_y(y, &d).unwrap(), hypo, max_relative = 1e-9);
        assert_relative_eq!(cdf_y(y, &d).unwrap(), 0.002_378_569_034_531_375, max_relative = 1e-9);

        let d = mgf_poles(&[10.0, 10.0], &params(2, 0.0, 2)).unwrap();
        assert_relative_eq!(cdf_y(2.0, &d).unwrap(), gamma_p_int(4, 0.4), max_relative = 1e-10);
        assert!(cdf_y(-1.0, &d).is_err());
        assert_eq!(cdf_y(f64::INFINITY, &d).unwrap(), 1.0);
    }

    #[test]
    fn deep_tail_switches_to_maclaurin() {
        // Gamma(4, scale 5e4): the residue form would cancel completely.
        let d = mgf_poles(&[1e5, 1e5], &params(2, 0.0, 2)).unwrap();
        let y = 3.0;
        let (value, magnitude) = residue_sum(y, &d);
        assert!(magnitude > CANCELLATION_LIMIT * value.abs());
        assert_relative_eq!(cdf_y(y, &d).unwrap(), gamma_p_int(4, y * 2e-5), max_relative = 1e-12);
    }

    #[test]
    fn maclaurin_agrees_with_partial_fractions_in_overlap() {
        let p = params(2, 0.6, 3);
        let d = mgf_poles(&[8.0, 15.0, 30.0], &p).unwrap();
        for &y in &[5.0, 10.0, 20.0] {
            let (value, _) = residue_sum(y, &d);
            let (series, _) = maclaurin(y, &d).unwrap();
            assert_relative_eq!(value, series, max_relative = 1e-9);
        }
    }

    #[test]
    fn nearly_equal_poles_are_clustered_with_warning() {
        // Analytically distinct powers whose eigenvalues differ by < 1e-8.
        let p = params(1, 0.0, 2);
        let d = mgf_poles(&[10.0, 10.0 * (1.0 + 1e-12)], &p).unwrap();
        assert_eq!(d.multiplicities(), &[2]);
        assert!(d.conditioning_warning());
        let y = 3.0;
        assert_relative_eq!(cdf_y(y, &d).unwrap(), gamma_p_int(2, 0.3), max_relative = 1e-9);
    }

    #[test]
    fn expected_distinct_counts() {
        assert_eq!(expected_distinct(&[1.0, 2.0, 3.0], false), 3);
        assert_eq!(expected_distinct(&[1.0, 1.0, 3.0], false), 2);
        assert_eq!(expected_distinct(&[1.0, 1.0, 3.0], true), 3);
        assert_eq!(expected_distinct(&[2.0, 2.0, 2.0], true), 2);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn mgf_forms_agree(
            m in 1u32..4,
            rho in 0.0f64..0.95,
            p1 in 0.5f64..50.0,
            p2 in 0.5f64..50.0,
            p3 in 0.5f64..50.0,
            s in -5.0f64..-1e-3,
        ) {
            let params = ChannelParams::uniform(m, 1.0, 3, rho, 1.0).unwrap();
            let powers = [p1, p2, p3];
            let d = mgf_poles(&powers, &params).unwrap();
            let direct = mgf(s, &powers, &params).unwrap();
            let via_poles = d.mgf(s);
            prop_assert!((via_poles - direct).abs() <= 1e-10 * direct.abs());
        }

        #[test]
        fn cdf_is_monotone(
            m in 1u32..4,
            rho in 0.0f64..0.9,
            p1 in 1.0f64..100.0,
            p2 in 1.0f64..100.0,
        ) {
            let params = ChannelParams::uniform(m, 1.0, 2, rho, 1.0).unwrap();
            let d = mgf_poles(&[p1, p2], &params).unwrap();
            let top = 20.0 * (p1 + p2);
            let mut prev = 0.0;
            for i in 0..=1000 {
                let y = top * i as f64 / 1000.0;
                let f = cdf_y(y, &d).unwrap();
                prop_assert!((0.0..=1.0).contains(&f));
                prop_assert!(f >= prev - 1e-12, "F({y}) = {f} < {prev}");
                prev = f;
            }
        }
    }
}
