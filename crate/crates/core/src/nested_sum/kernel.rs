//! Streaming prefix-sum dynamic program over a chain of nested indices.
//!
//! For each `m = 0, 1, 2, ...` the kernel computes every level's term
//! `T_i(m) = w_i(m) · P_{i-1}(m or m-1)` from the running prefix sums
//! `P_{i-1}` of the previous level, so a truncation at `N` costs
//! `O(N × depth)`. The outermost prefix sum is recorded on a fixed geometric
//! grid of truncation points for later extrapolation.

use num_complex::Complex64;

use super::pochhammer::PochhammerRatio;
use super::{IndexLink, NestedSumSpec, Prefactor};

/// Grid points per doubling of `N`.
pub const GRID_PER_OCTAVE: u32 = 8;
/// Smallest recorded truncation point.
pub const GRID_MIN: usize = 8;

/// Neumaier-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    sum: Complex64,
    comp: Complex64,
}

#[inline]
fn two_sum(s: f64, x: f64, comp: &mut f64) -> f64 {
    let t = s + x;
    if s.abs() >= x.abs() {
        *comp += (s - t) + x;
    } else {
        *comp += (x - t) + s;
    }
    t
}

impl Accumulator {
    #[inline]
    fn add(&mut self, x: Complex64) {
        self.sum.re = two_sum(self.sum.re, x.re, &mut self.comp.re);
        self.sum.im = two_sum(self.sum.im, x.im, &mut self.comp.im);
    }

    #[inline]
    fn value(&self) -> Complex64 {
        self.sum + self.comp
    }
}

/// The geometric grid `round(2^(j/8))`, deduplicated, from `GRID_MIN` up to
/// and including the first point `>= limit`.
pub fn geometric_grid(limit: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let mut j = 0u32;
    loop {
        let n = 2f64.powf(j as f64 / GRID_PER_OCTAVE as f64).round() as usize;
        j += 1;
        if n < GRID_MIN || out.last() == Some(&n) {
            continue;
        }
        out.push(n);
        if n >= limit {
            return out;
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct IndexPlan {
    a: i32,
    b: i32,
    prefactors: u8,
}

const PF_FIRST: u8 = 1;
const PF_LAST: u8 = 2;
const PF_FIRST_ZSTAR: u8 = 4;
const PF_LAST_ZSTAR: u8 = 8;
const PF_LAST_HSTAR: u8 = 16;

fn prefactor_bit(p: Prefactor) -> u8 {
    match p {
        Prefactor::PochFirst => PF_FIRST,
        Prefactor::PochLast => PF_LAST,
        Prefactor::PochFirstZstar => PF_FIRST_ZSTAR,
        Prefactor::PochLastZstar => PF_LAST_ZSTAR,
        Prefactor::PochLastHstar => PF_LAST_HSTAR,
    }
}

/// Integer powers `x^k` for `k` in `[lo, hi]`.
struct PowerTable {
    lo: i32,
    values: Vec<Complex64>,
}

impl PowerTable {
    fn new(lo: i32, hi: i32) -> Self {
        PowerTable {
            lo,
            values: vec![Complex64::new(1.0, 0.0); (hi - lo + 1) as usize],
        }
    }

    #[inline]
    fn fill(&mut self, x: Complex64) {
        let zero = (-self.lo) as usize;
        self.values[zero] = Complex64::new(1.0, 0.0);
        let inv = x.inv();
        for k in (0..zero).rev() {
            self.values[k] = self.values[k + 1] * x;
        }
        for k in zero + 1..self.values.len() {
            self.values[k] = self.values[k - 1] * inv;
        }
    }

    /// `x^{-e}`.
    #[inline]
    fn neg_pow(&self, e: i32) -> Complex64 {
        self.values[(e - self.lo) as usize]
    }
}

/// Resumable DP state for one spec.
pub struct Kernel {
    alpha: Complex64,
    beta: Complex64,
    plans: Vec<IndexPlan>,
    links: Vec<IndexLink>,
    start_strict: bool,
    pow_a: PowerTable,
    pow_b: PowerTable,
    ratio_alpha: Option<PochhammerRatio>,
    ratio_beta: Option<PochhammerRatio>,
    acc: Vec<Accumulator>,
    m: usize,
    grid: Vec<usize>,
    next_grid: usize,
    records: Vec<(usize, Complex64)>,
}

impl Kernel {
    /// `spec` must already be validated.
    pub fn new(spec: &NestedSumSpec, limit: usize) -> Self {
        let plans: Vec<IndexPlan> = spec
            .indices
            .iter()
            .map(|w| IndexPlan {
                a: w.a,
                b: w.b,
                prefactors: w.prefactors.iter().fold(0, |acc, &p| acc | prefactor_bit(p)),
            })
            .collect();
        let range = |f: fn(&IndexPlan) -> i32| {
            let lo = plans.iter().map(f).min().unwrap_or(0).min(0);
            let hi = plans.iter().map(f).max().unwrap_or(0).max(0);
            // Stored as x^{-e}: exponent -e ranges over [-hi, -lo].
            (lo, hi)
        };
        let (a_lo, a_hi) = range(|p| p.a);
        let (b_lo, b_hi) = range(|p| p.b);
        let all = plans.iter().fold(0u8, |acc, p| acc | p.prefactors);
        let needs_alpha = all & (PF_FIRST | PF_LAST | PF_LAST_HSTAR) != 0;
        let needs_beta = all & (PF_FIRST_ZSTAR | PF_LAST_ZSTAR) != 0;
        Kernel {
            alpha: spec.alpha,
            beta: spec.beta,
            links: spec.links.clone(),
            start_strict: spec.start == IndexLink::Strict,
            pow_a: PowerTable::new(a_lo, a_hi),
            pow_b: PowerTable::new(b_lo, b_hi),
            ratio_alpha: needs_alpha.then(|| PochhammerRatio::new(spec.alpha)),
            ratio_beta: needs_beta.then(|| PochhammerRatio::new(spec.beta)),
            acc: vec![Accumulator::default(); plans.len()],
            plans,
            m: 0,
            grid: geometric_grid(limit),
            next_grid: 0,
            records: Vec::new(),
        }
    }

    /// Number of outer terms processed so far.
    pub fn n(&self) -> usize {
        self.m
    }

    /// Partial sum over all indices `< n()`.
    pub fn partial(&self) -> Complex64 {
        self.acc.last().map(Accumulator::value).unwrap_or_default()
    }

    /// Recorded `(N, S(N))` pairs on the geometric grid.
    pub fn records(&self) -> &[(usize, Complex64)] {
        &self.records
    }

    /// Process indices until `n()` reaches `n`.
    pub fn advance_to(&mut self, n: usize) {
        let one = Complex64::new(1.0, 0.0);
        while self.m < n {
            let m = self.m;
            let mf = m as f64;
            let xa = self.alpha + mf;
            let xb = self.beta + mf;
            self.pow_a.fill(xa);
            self.pow_b.fill(xb);
            let ra = self.ratio_alpha.as_ref().map(PochhammerRatio::value).unwrap_or(one);
            let rb = self.ratio_beta.as_ref().map(PochhammerRatio::value).unwrap_or(one);

            let mut old_prev = Complex64::default();
            let mut new_prev = Complex64::default();
            for (i, plan) in self.plans.iter().enumerate() {
                let inner = if i == 0 {
                    if self.start_strict && m == 0 {
                        Complex64::default()
                    } else {
                        one
                    }
                } else {
                    match self.links[i - 1] {
                        IndexLink::Weak => new_prev,
                        IndexLink::Strict => old_prev,
                    }
                };
                let mut w = self.pow_a.neg_pow(plan.a) * self.pow_b.neg_pow(plan.b);
                if plan.prefactors != 0 {
                    let pf = plan.prefactors;
                    if pf & PF_FIRST != 0 {
                        w *= ra;
                    }
                    if pf & PF_LAST != 0 {
                        w /= ra * xa;
                    }
                    if pf & PF_FIRST_ZSTAR != 0 {
                        w *= rb;
                    }
                    if pf & PF_LAST_ZSTAR != 0 {
                        w *= xa / (rb * xb);
                    }
                    if pf & PF_LAST_HSTAR != 0 {
                        w *= (mf + 1.0) / (ra * xa);
                    }
                }
                let acc = &mut self.acc[i];
                old_prev = acc.value();
                acc.add(w * inner);
                new_prev = acc.value();
            }

            if let Some(r) = self.ratio_alpha.as_mut() {
                r.advance();
            }
            if let Some(r) = self.ratio_beta.as_mut() {
                r.advance();
            }
            self.m += 1;
            while self.next_grid < self.grid.len() && self.grid[self.next_grid] <= self.m {
                if self.grid[self.next_grid] == self.m {
                    self.records.push((self.m, new_prev));
                }
                self.next_grid += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_is_geometric_and_contains_powers_of_two() {
        let g = geometric_grid(1 << 20);
        assert_eq!(g[0], 8);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        for k in 3..=20 {
            assert!(g.contains(&(1usize << k)));
        }
        assert_eq!(*g.last().unwrap(), 1 << 20);
    }

    #[test]
    fn compensated_sum_is_accurate() {
        let mut acc = Accumulator::default();
        acc.add(Complex64::new(1.0, 0.0));
        for _ in 0..1000 {
            acc.add(Complex64::new(1e-17, 0.0));
        }
        assert!((acc.value().re - (1.0 + 1e-14)).abs() < 1e-16);
    }
}
