//! Integer-argument special functions.
//!
//! Every shape parameter that shows up in this crate is a positive integer
//! (fading order plus a mixture index, or a multiple of the fading order), so
//! the gamma function reduces to factorials and the incomplete gamma function
//! to finite Poisson sums.

use std::sync::OnceLock;

const TABLE_LEN: usize = 2048;

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(TABLE_LEN);
        let mut acc = 0.0_f64;
        t.push(0.0);
        for k in 1..TABLE_LEN {
            acc += (k as f64).ln();
            t.push(acc);
        }
        t
    })
}

/// `ln(n!)`.
pub fn ln_factorial(n: u64) -> f64 {
    let table = ln_factorial_table();
    if (n as usize) < TABLE_LEN {
        return table[n as usize];
    }
    let mut acc = table[TABLE_LEN - 1];
    for k in TABLE_LEN as u64..=n {
        acc += (k as f64).ln();
    }
    acc
}

/// `ln Γ(a)` for a positive integer `a`.
pub fn ln_gamma_int(a: u64) -> f64 {
    assert!(a >= 1, "gamma function argument must be positive");
    ln_factorial(a - 1)
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `2^x − 1` without cancellation for small `x`.
pub fn exp2_m1(x: f64) -> f64 {
    (x * std::f64::consts::LN_2).exp_m1()
}

/// Regularized lower incomplete gamma function `P(a, x) = γ(a, x)/Γ(a)` for
/// integer shape `a ≥ 1`.
///
/// Below `x < a + 1` the positive series `e^{-x} Σ_{k≥a} x^k/k!` is summed
/// directly, which keeps full relative precision for tiny probabilities.
/// Above it, the finite complement `1 − e^{-x} Σ_{k<a} x^k/k!` is used.
pub fn gamma_p_int(a: u64, x: f64) -> f64 {
    assert!(a >= 1, "shape must be a positive integer");
    if x <= 0.0 {
        return 0.0;
    }
    if x.is_infinite() {
        return 1.0;
    }
    let af = a as f64;
    if x < af + 1.0 {
        let ln_lead = -x + af * x.ln() - ln_factorial(a);
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            term *= x / (af + k);
            sum += term;
            if term < sum * 1e-17 {
                break;
            }
            k += 1.0;
        }
        (ln_lead + sum.ln()).exp().min(1.0)
    } else {
        (1.0 - gamma_q_int(a, x)).max(0.0)
    }
}

/// Regularized upper incomplete gamma function `Q(a, x) = 1 − P(a, x)` for
/// integer shape, as the finite Poisson sum `e^{-x} Σ_{k<a} x^k/k!`.
pub fn gamma_q_int(a: u64, x: f64) -> f64 {
    assert!(a >= 1, "shape must be a positive integer");
    if x <= 0.0 {
        return 1.0;
    }
    if x < a as f64 + 1.0 {
        return 1.0 - gamma_p_int(a, x);
    }
    // Sum from the largest term down, in log space relative to the last term.
    let ln_x = x.ln();
    let top = a - 1;
    let ln_top = top as f64 * ln_x - ln_factorial(top) - x;
    let mut sum = 1.0;
    let mut ratio = 1.0;
    for k in (1..=top).rev() {
        ratio *= k as f64 / x;
        sum += ratio;
        if ratio < 1e-18 * sum {
            break;
        }
    }
    (ln_top + sum.ln()).exp().min(1.0)
}

/// A real number held as `sign · exp(ln_abs)`, for quantities whose magnitude
/// may leave the `f64` range before being combined with small factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogScalar {
    pub ln_abs: f64,
    pub sign: f64,
}

impl LogScalar {
    pub const ZERO: LogScalar = LogScalar {
        ln_abs: f64::NEG_INFINITY,
        sign: 0.0,
    };

    pub fn from_f64(v: f64) -> Self {
        if v == 0.0 {
            Self::ZERO
        } else {
            LogScalar {
                ln_abs: v.abs().ln(),
                sign: v.signum(),
            }
        }
    }

    pub fn to_f64(self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }

    /// Multiplies by `exp(ln_factor)`.
    pub fn scale_ln(self, ln_factor: f64) -> Self {
        LogScalar {
            ln_abs: self.ln_abs + ln_factor,
            sign: self.sign,
        }
    }
}
