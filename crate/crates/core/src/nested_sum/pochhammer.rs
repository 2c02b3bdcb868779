//! Stable evaluation of Pochhammer symbols and of the ratio sequences
//! `(a)_m / m!` that appear as series prefactors.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::EvalError;

/// Below this many factors `log (a)_m` is summed directly.
const DIRECT_CROSSOVER: usize = 64;
/// Minimum real part at which the Stirling series is used for `ln Γ`.
const STIRLING_MIN_RE: f64 = 20.0;
/// The ratio recurrence is re-anchored to its asymptotic expansion every this
/// many steps once `m` is at least this large.
const ANCHOR_STRIDE: usize = 4096;

/// `B_0 .. B_12`.
const BERNOULLI: [f64; 13] = [
    1.0,
    -0.5,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    5.0 / 66.0,
    0.0,
    -691.0 / 2730.0,
];

fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// Stirling series for `ln Γ(z)`, valid for `Re z >= STIRLING_MIN_RE`.
fn ln_gamma_stirling(z: Complex64) -> Complex64 {
    let half_ln_2pi = 0.5 * (2.0 * PI).ln();
    let mut acc = (z - 0.5) * z.ln() - z + half_ln_2pi;
    let inv = z.inv();
    let inv2 = inv * inv;
    let mut pow = inv;
    for n in 1..=6usize {
        let b = BERNOULLI[2 * n];
        acc += pow * (b / ((2 * n) as f64 * (2 * n - 1) as f64));
        pow *= inv2;
    }
    acc
}

/// The log-gamma function (the analytic branch satisfying
/// `ln Γ(z+1) = ln Γ(z) + ln z`) for `Re z > 0`.
pub fn ln_gamma(z: Complex64) -> Complex64 {
    debug_assert!(z.re > 0.0, "ln_gamma requires Re z > 0");
    let mut shifted = z;
    let mut correction = Complex64::new(0.0, 0.0);
    while shifted.re < STIRLING_MIN_RE {
        correction += shifted.ln();
        shifted += 1.0;
    }
    ln_gamma_stirling(shifted) - correction
}

/// `log((a)_m)`, where `(a)_m = a (a+1) ... (a+m-1)`.
///
/// The result is a logarithm of the Pochhammer symbol (its exponential equals
/// `(a)_m`); for real positive `a` it is the real logarithm.
pub fn pochhammer_log(a: Complex64, m: u64) -> Result<Complex64, EvalError> {
    if is_nonpositive_integer(a) {
        return Err(EvalError::InvalidParams(format!(
            "Pochhammer base {a} is a non-positive integer"
        )));
    }
    let m = m as usize;
    // Shift far enough that the remaining factors all have large positive
    // real part, where the Stirling difference is accurate.
    let shift = DIRECT_CROSSOVER.max((STIRLING_MIN_RE - a.re).ceil().max(0.0) as usize);
    if m <= shift {
        return Ok((0..m).map(|j| (a + j as f64).ln()).sum());
    }
    let head: Complex64 = (0..shift).map(|j| (a + j as f64).ln()).sum();
    let lo = a + shift as f64;
    let hi = a + m as f64;
    Ok(head + ln_gamma_stirling(hi) - ln_gamma_stirling(lo))
}

/// `B_n(x)` for `n <= 12`.
fn bernoulli_poly(n: usize, x: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut binom = 1.0;
    for k in 0..=n {
        acc += x.powi((n - k) as i32) * (binom * BERNOULLI[k]);
        binom = binom * (n - k) as f64 / (k + 1) as f64;
    }
    acc
}

/// Asymptotic expansion of `ln Γ(m+a) - ln Γ(m+b)` for large `m`. Avoids the
/// cancellation between two `O(m ln m)` quantities.
fn ln_gamma_ratio_asymptotic(m: f64, a: Complex64, b: Complex64) -> Complex64 {
    let mut acc = (a - b) * m.ln();
    let mut inv_pow = 1.0;
    for n in 1..=10usize {
        inv_pow /= m;
        let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
        let d = bernoulli_poly(n + 1, a) - bernoulli_poly(n + 1, b);
        acc += d * (sign * inv_pow / (n * (n + 1)) as f64);
    }
    acc
}

/// Streaming generator of `(a)_m / m!` for `m = 0, 1, 2, ...`.
///
/// Values come from the exact one-step recurrence
/// `ρ(m+1) = ρ(m) (a+m)/(m+1)`, periodically re-anchored to
/// `exp(ln Γ(m+a) - ln Γ(m+1) - ln Γ(a))` so rounding does not accumulate over
/// millions of steps.
#[derive(Debug, Clone)]
pub struct PochhammerRatio {
    base: Complex64,
    ln_gamma_base: Complex64,
    m: usize,
    value: Complex64,
}

impl PochhammerRatio {
    pub fn new(base: Complex64) -> Self {
        PochhammerRatio {
            base,
            ln_gamma_base: ln_gamma(base),
            m: 0,
            value: Complex64::new(1.0, 0.0),
        }
    }

    /// Current index `m`.
    pub fn index(&self) -> usize {
        self.m
    }

    /// `(a)_m / m!` at the current index.
    pub fn value(&self) -> Complex64 {
        self.value
    }

    pub fn advance(&mut self) {
        let m = self.m as f64;
        self.m += 1;
        if self.m >= ANCHOR_STRIDE && self.m.is_multiple_of(ANCHOR_STRIDE) {
            let one = Complex64::new(1.0, 0.0);
            let ln = ln_gamma_ratio_asymptotic(self.m as f64, self.base, one) - self.ln_gamma_base;
            self.value = ln.exp();
        } else {
            self.value *= (self.base + m) / (m + 1.0);
        }
    }
}
