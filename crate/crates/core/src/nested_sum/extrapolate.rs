//! Asymptotic tail models and least-squares extrapolation of truncated sums.
//!
//! A truncated nested sum behaves like
//! `S(N) = S∞ + Σ_f Σ_j Σ_{i<=L_f} c N^{-(e_f + j)} ln^i N`
//! where each family `f` has a (possibly complex) leading exponent `e_f` and a
//! maximal log power `L_f`. The families follow mechanically from the index
//! weights, so the fit basis is derived from the spec rather than guessed.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

const FAMILY_TOL: f64 = 1e-9;

/// One family of asymptotic terms `N^{-(e+j)} ln^i N`, `j >= 0`, `i <= logs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub exponent: Complex64,
    pub logs: u32,
}

/// Set of asymptotic families with pairwise non-integer exponent differences.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Shape {
    pub families: Vec<Family>,
}

fn is_integer(z: Complex64) -> bool {
    z.im.abs() < FAMILY_TOL && (z.re - z.re.round()).abs() < FAMILY_TOL
}

impl Shape {
    /// A single family `m^{-e}` with no logarithms.
    pub fn power(exponent: Complex64) -> Self {
        Shape {
            families: vec![Family { exponent, logs: 0 }],
        }
    }

    fn insert(&mut self, fam: Family) {
        for f in &mut self.families {
            if is_integer(f.exponent - fam.exponent) {
                if fam.exponent.re < f.exponent.re {
                    f.exponent = fam.exponent;
                }
                f.logs = f.logs.max(fam.logs);
                return;
            }
        }
        self.families.push(fam);
    }

    /// Shape of `m^{-w} · f(m)` given the shape of `f`.
    pub fn times_power(&self, w: Complex64) -> Shape {
        let mut out = Shape::default();
        for f in &self.families {
            out.insert(Family {
                exponent: f.exponent + w,
                logs: f.logs,
            });
        }
        out
    }

    /// Shape of `Σ_{n<=m} f(n)` given the shape of the summand `f`.
    ///
    /// Each family drops one unit of decay; a family containing the exponent
    /// 1 produces an extra logarithm; a constant (the convergent part) is
    /// always present.
    pub fn partial_sum(&self) -> Shape {
        let mut out = Shape::power(Complex64::new(0.0, 0.0));
        for f in &self.families {
            let resonant = is_integer(f.exponent) && f.exponent.re <= 1.0 + FAMILY_TOL;
            out.insert(Family {
                exponent: f.exponent - 1.0,
                logs: f.logs + u32::from(resonant),
            });
        }
        out
    }

    /// Shape of the tail `Σ_{n>=N} f(n)` of a convergent summand.
    pub fn tail(&self) -> Shape {
        Shape {
            families: self
                .families
                .iter()
                .map(|f| Family {
                    exponent: f.exponent - 1.0,
                    logs: f.logs,
                })
                .collect(),
        }
    }

    /// Smallest real part among the leading exponents.
    pub fn leading_re(&self) -> f64 {
        self.families
            .iter()
            .map(|f| f.exponent.re)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_logs(&self) -> u32 {
        self.families.iter().map(|f| f.logs).max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub value: Complex64,
    /// Number of basis functions besides the constant.
    pub columns: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegenerateFit;

/// Least-squares solve of `A x = b`, returning the constant coefficient.
/// Columns are normalized before an SVD with a relative singular-value cutoff.
fn solve_constant(columns: &[Vec<Complex64>], rhs: &[Complex64]) -> Result<Complex64, DegenerateFit> {
    let rows = rhs.len();
    let cols = columns.len();
    if cols == 0 || rows < cols {
        return Err(DegenerateFit);
    }
    let mut scales = Vec::with_capacity(cols);
    let mut a = DMatrix::<Complex64>::zeros(rows, cols);
    for (j, col) in columns.iter().enumerate() {
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(DegenerateFit);
        }
        scales.push(norm);
        for (i, z) in col.iter().enumerate() {
            a[(i, j)] = z / norm;
        }
    }
    let b = DVector::from_column_slice(rhs);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * f64::EPSILON * rows.max(cols) as f64;
    let x = svd.solve(&b, eps).map_err(|_| DegenerateFit)?;
    let v = x[0] / scales[0];
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(DegenerateFit)
    }
}

/// Fit `S(N) = S∞ + tail(N)` where `tail` has the given shape, keeping every
/// family term whose real exponent is within `span` of the leading one.
///
/// `samples` are `(N, S(N))` pairs; logarithms are taken relative to the
/// largest `N` for conditioning. When the basis would outnumber the samples
/// the span is reduced.
pub fn fit_shape(samples: &[(usize, Complex64)], tail: &Shape, span: f64) -> Result<FitResult, DegenerateFit> {
    if samples.len() < 2 {
        return Err(DegenerateFit);
    }
    let n_max = samples.iter().map(|&(n, _)| n).max().unwrap() as f64;
    let ln_x: Vec<f64> = samples.iter().map(|&(n, _)| (n as f64 / n_max).ln()).collect();
    let rhs: Vec<Complex64> = samples.iter().map(|&(_, v)| v).collect();
    let lead = tail.leading_re();
    let mut span = span;
    loop {
        let mut columns = vec![vec![Complex64::new(1.0, 0.0); samples.len()]];
        for f in &tail.families {
            let count = (lead + span - f.exponent.re + 0.5).floor();
            if count < 0.0 {
                continue;
            }
            for j in 0..=count as u32 {
                let e = f.exponent + j as f64;
                for i in 0..=f.logs {
                    columns.push(
                        ln_x.iter()
                            .map(|&l| (-e * l).exp() * l.powi(i as i32))
                            .collect(),
                    );
                }
            }
        }
        if columns.len() + 2 <= samples.len() || span < 0.0 {
            if columns.len() > samples.len() {
                return Err(DegenerateFit);
            }
            let value = solve_constant(&columns, &rhs)?;
            return Ok(FitResult {
                value,
                columns: columns.len() - 1,
            });
        }
        span -= 1.0;
    }
}

/// Result of [`tail_extrapolate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extrapolation {
    pub value: Complex64,
    pub err_estimate: f64,
    /// True when the fit was impossible and the last partial value was used.
    pub degenerate: bool,
}

/// Richardson-style extrapolation of partial sums whose summand decays like
/// `m^{-s}`, so that the tail behaves as `C N^{1-s} + O(N^{-s})`.
///
/// Up to three correction terms `N^{-(s-1+j)}` are removed, limited by the
/// number of levels. The error estimate is the change caused by dropping the
/// highest correction term. Levels that are too close (ratio below 1.01) are
/// degenerate; the last value is returned with a widened error estimate.
pub fn tail_extrapolate(partial: &[(usize, Complex64)], decay_exponent: f64) -> Extrapolation {
    let mut levels: Vec<(usize, Complex64)> = partial.to_vec();
    levels.sort_by_key(|&(n, _)| n);
    levels.dedup_by_key(|&mut (n, _)| n);
    let last = levels.last().map(|&(_, v)| v).unwrap_or_default();
    let fallback = |levels: &[(usize, Complex64)]| {
        let spread = levels
            .iter()
            .map(|&(_, v)| (v - last).norm())
            .fold(0.0, f64::max);
        Extrapolation {
            value: last,
            err_estimate: (10.0 * spread).max(last.norm() * 1e-8),
            degenerate: true,
        }
    };
    let too_close = levels.windows(2).any(|w| (w[1].0 as f64) < 1.01 * w[0].0 as f64);
    if levels.len() < 2 || too_close || decay_exponent <= 1.0 {
        return fallback(&levels);
    }
    let terms = (levels.len() - 1).min(3);
    let fit = |terms: usize| {
        let n_max = levels.last().unwrap().0 as f64;
        let mut columns = vec![vec![Complex64::new(1.0, 0.0); levels.len()]];
        for j in 0..terms {
            let e = decay_exponent - 1.0 + j as f64;
            columns.push(
                levels
                    .iter()
                    .map(|&(n, _)| Complex64::new((n as f64 / n_max).powf(-e), 0.0))
                    .collect(),
            );
        }
        let rhs: Vec<Complex64> = levels.iter().map(|&(_, v)| v).collect();
        solve_constant(&columns, &rhs)
    };
    match fit(terms) {
        Ok(value) => {
            let err = if terms >= 2 {
                fit(terms - 1).map(|v| (v - value).norm()).unwrap_or(f64::INFINITY)
            } else {
                (value - last).norm()
            };
            Extrapolation {
                value,
                err_estimate: err.max(value.norm() * f64::EPSILON),
                degenerate: false,
            }
        }
        Err(DegenerateFit) => fallback(&levels),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn partial_sums(f: impl Fn(f64) -> f64, ns: &[usize]) -> Vec<(usize, Complex64)> {
        let mut out = Vec::new();
        let mut acc = 0.0;
        let mut m = 0usize;
        for &n in ns {
            while m < n {
                acc += f(m as f64);
                m += 1;
            }
            out.push((n, Complex64::new(acc, 0.0)));
        }
        out
    }

    const ZETA2: f64 = 1.644_934_066_848_226_4;
    const ZETA3: f64 = 1.202_056_903_159_594_3;

    #[test]
    fn zeta2_two_levels() {
        let p = partial_sums(|m| (m + 1.0).powi(-2), &[1000, 4000]);
        let e = tail_extrapolate(&p, 2.0);
        assert!((e.value.re - ZETA2).abs() < 1e-6);
        assert!(!e.degenerate);
    }

    #[test]
    fn zeta3_two_levels() {
        let p = partial_sums(|m| (m + 1.0).powi(-3), &[100, 400]);
        let e = tail_extrapolate(&p, 3.0);
        assert!((e.value.re - ZETA3).abs() < 1e-6);
    }

    #[test]
    fn constant_sequence() {
        let v = Complex64::new(2.5, -1.0);
        let e = tail_extrapolate(&[(10, v), (40, v), (160, v)], 2.0);
        assert!((e.value - v).norm() < 1e-14);
    }

    #[test]
    fn degenerate_levels_fall_back() {
        let e = tail_extrapolate(&[(100, Complex64::new(1.0, 0.0)), (100, Complex64::new(1.1, 0.0))], 2.0);
        assert!(e.degenerate);
        assert_eq!(e.value, Complex64::new(1.0, 0.0));
        let e = tail_extrapolate(&[(1000, Complex64::new(1.0, 0.0)), (1001, Complex64::new(1.1, 0.0))], 2.0);
        assert!(e.degenerate);
        assert!(e.err_estimate >= 0.1);
    }

    #[test]
    fn shape_rules() {
        let c = |re: f64| Complex64::new(re, 0.0);
        // Σ 1/m is log-divergent: constant family with one log.
        let s = Shape::power(c(1.0)).partial_sum();
        assert_eq!(s.families.len(), 1);
        assert_eq!(s.families[0].logs, 1);
        assert!(s.families[0].exponent.re <= 0.0);
        // A non-integer family stays separate from the constant.
        let s = Shape::power(c(1.4)).partial_sum();
        assert_eq!(s.families.len(), 2);
        // Families an integer apart merge, keeping the smaller exponent.
        let s = Shape::power(c(2.3)).times_power(c(0.0));
        let mut merged = s.clone();
        merged.insert(Family { exponent: c(1.3), logs: 2 });
        assert_eq!(merged.families.len(), 1);
        assert!((merged.families[0].exponent.re - 1.3).abs() < 1e-12);
        assert_eq!(merged.families[0].logs, 2);
    }

    #[test]
    fn fit_recovers_log_tail() {
        // S(N) = 3 + ln(N)/N + 2/N^2: family exponent 1 with one log.
        let samples: Vec<(usize, Complex64)> = (0..40)
            .map(|j| {
                let n = (1000.0 * 2f64.powf(j as f64 / 8.0)).round() as usize;
                let x = n as f64;
                (n, Complex64::new(3.0 + x.ln() / x + 2.0 / (x * x), 0.0))
            })
            .collect();
        let tail = Shape {
            families: vec![Family { exponent: Complex64::new(1.0, 0.0), logs: 1 }],
        };
        let fit = fit_shape(&samples, &tail, 2.0).unwrap();
        assert!((fit.value.re - 3.0).abs() < 1e-12);
    }
}
