//! Reference implementations that share no code with the library kernel:
//! brute-force enumeration of nested sums, direct Pochhammer products and
//! closed-form constants.

#![allow(dead_code)]

use std::f64::consts::PI;

use pmzv::{Complex64, IndexLink, IndexWeight, NestedSumSpec, Prefactor};

pub const ZETA2: f64 = 1.6449340668482264;
pub const ZETA3: f64 = 1.2020569031595943;
pub const ZETA4: f64 = 1.0823232337111382;
pub const HALF_PI_SQ: f64 = 4.934802200544679;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `(a)_m / m!` by direct product.
fn rising_over_factorial(a: Complex64, m: usize) -> Complex64 {
    (0..m).fold(c(1.0), |acc, j| acc * (a + j as f64) / (j as f64 + 1.0))
}

/// The full weight of one index at `m`, computed term by term.
pub fn naive_weight(w: &IndexWeight, m: usize, alpha: Complex64, beta: Complex64) -> Complex64 {
    let mf = m as f64;
    let mut v = (alpha + mf).powi(-w.a) * (beta + mf).powi(-w.b);
    for p in &w.prefactors {
        v *= match p {
            Prefactor::PochFirst => rising_over_factorial(alpha, m),
            Prefactor::PochLast => 1.0 / (rising_over_factorial(alpha, m) * (alpha + mf)),
            Prefactor::PochFirstZstar => rising_over_factorial(beta, m),
            Prefactor::PochLastZstar => (alpha + mf) / (rising_over_factorial(beta, m) * (beta + mf)),
            Prefactor::PochLastHstar => (mf + 1.0) / (rising_over_factorial(alpha, m) * (alpha + mf)),
        };
    }
    v
}

/// `Σ` over all index tuples below `n` by explicit recursion over the chain.
pub fn naive_partial_sum(spec: &NestedSumSpec, n: usize) -> Complex64 {
    let table: Vec<Vec<Complex64>> = spec
        .indices
        .iter()
        .map(|w| (0..n).map(|m| naive_weight(w, m, spec.alpha, spec.beta)).collect())
        .collect();
    let first = match spec.start {
        IndexLink::Weak => 0,
        IndexLink::Strict => 1,
    };
    fn rec(table: &[Vec<Complex64>], links: &[IndexLink], level: usize, lo: usize, n: usize) -> Complex64 {
        let mut acc = c(0.0);
        for m in lo..n {
            let term = table[level][m];
            if level + 1 == table.len() {
                acc += term;
            } else {
                let next = match links[level] {
                    IndexLink::Strict => m + 1,
                    IndexLink::Weak => m,
                };
                acc += term * rec(table, links, level + 1, next, n);
            }
        }
        acc
    }
    rec(&table, &spec.links, 0, first, n)
}

/// `Σ_{k ≥ n} (k + a)^{-2}` by Euler–Maclaurin, accurate to `O(n^{-7})`.
pub fn inverse_square_tail(n: f64, a: f64) -> f64 {
    let x = n + a;
    1.0 / x + 0.5 / (x * x) + 1.0 / (6.0 * x.powi(3)) - 1.0 / (30.0 * x.powi(5))
}

/// `ζ(3)` from the rapidly convergent central-binomial series
/// `ζ(3) = 5/2 Σ (-1)^{k+1} / (k^3 C(2k,k))`.
pub fn zeta3_closed_form() -> f64 {
    let mut sum = 0.0;
    let mut central = 1.0; // C(2k, k)
    for k in 1..=30u32 {
        let kf = k as f64;
        central *= (2.0 * kf - 1.0) * (2.0 * kf) / (kf * kf);
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        sum += sign / (kf.powi(3) * central);
    }
    2.5 * sum
}

pub fn zeta2_closed_form() -> f64 {
    PI * PI / 6.0
}

pub fn zeta4_closed_form() -> f64 {
    PI.powi(4) / 90.0
}

/// `|a - b|` measured relative to `max(|b|, 1)`.
pub fn dev(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// Weights cycled through the levels of the brute-force comparison: every
/// prefactor kind, negative and zero exponents.
pub fn weight_menu() -> Vec<IndexWeight> {
    vec![
        IndexWeight::new(1, 0),
        IndexWeight::new(0, 1).with(Prefactor::PochFirst),
        IndexWeight::new(1, 1).with(Prefactor::PochLast),
        IndexWeight::new(0, 2).with(Prefactor::PochFirstZstar),
        IndexWeight::new(1, 0).with(Prefactor::PochLastZstar),
        IndexWeight::new(0, 1).with(Prefactor::PochLastHstar),
        IndexWeight::new(-1, 2),
        IndexWeight::new(0, 0).with(Prefactor::PochFirst).with(Prefactor::PochLast),
    ]
}

/// Every start/link pattern of depth 1..=3, each with several weight
/// assignments and both a real and a complex parameter pair.
pub fn kernel_patterns() -> Vec<NestedSumSpec> {
    let menu = weight_menu();
    let params = [(c(0.6), c(1.5)), (Complex64::new(0.7, 0.4), Complex64::new(1.3, -0.2))];
    let links = [IndexLink::Strict, IndexLink::Weak];
    let mut out = Vec::new();
    for depth in 1..=3usize {
        for pattern in 0..(1usize << depth) {
            let start = links[pattern & 1];
            let chain: Vec<IndexLink> = (1..depth).map(|i| links[(pattern >> i) & 1]).collect();
            for rot in 0..menu.len() {
                let indices: Vec<IndexWeight> = (0..depth).map(|i| menu[(rot + 3 * i) % menu.len()].clone()).collect();
                for &(alpha, beta) in &params {
                    out.push(NestedSumSpec {
                        indices: indices.clone(),
                        links: chain.clone(),
                        start,
                        alpha,
                        beta,
                    });
                }
            }
        }
    }
    out
}

/// Truncation points of the brute-force comparison.
pub const KERNEL_TRUNCATIONS: [usize; 7] = [0, 1, 2, 9, 64, 65, 200];

/// Kahan–Babuška summation.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
