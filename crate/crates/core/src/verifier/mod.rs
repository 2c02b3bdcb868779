//! Numerical certification of the duality formulas and derivative identities.
//!
//! Each identity is compiled into an [`IdentityPlan`]: two sides, each a
//! rational combination of canonical nested-sum specs. Plans are evaluated
//! through an [`Evaluator`], which caches spec values so that series shared by
//! many identities are summed once.

mod quadrature;
mod suite;

use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::evaluators::{
    coeff_to_f64, depth_one_spec, family_spec, first_cut_epsilon, format_complex, hstar_spec, hurwitz_spec,
    z_spec, zstar_spec, Family, Params,
};
use crate::nested_sum::{evaluate, evaluate_truncated, EvalConfig, Evaluation, NestedSumSpec};
use crate::words::{compositions, dual, sigma_b1, sigma_b2, sigma_eps, v_prime_monomials, v_y_monomials, LinComb, RVector, Word};

pub use quadrature::{iterated_integral, IntegralFamily};
pub use suite::{
    default_grid, derivative_tol, grid_from_values, run_suite, suite_eval_config, Suite, SuiteConfig, VerificationReport,
    INTEGRAL_TOL,
};

/// Lower clamp of the truncation-aware tolerance.
pub const TOL_FLOOR: f64 = 1e-9;

/// Outcome of one identity comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub lhs_err: f64,
    pub rhs_err: f64,
    pub abs_dev: f64,
    pub rel_dev: f64,
    pub tol: f64,
    pub n_used: usize,
    /// Both sides met the evaluation tolerance.
    pub converged: bool,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl IdentityCheck {
    /// Compare with the truncation-aware tolerance
    /// `clamp(10 (err_L + err_R) / scale, TOL_FLOOR, tol_cap)`.
    ///
    /// The deviation is relative when `|rhs| >= 1` and absolute otherwise;
    /// `scale` is `|rhs|` or 1 accordingly.
    pub fn compare(name: String, lhs: &Evaluation, rhs: &Evaluation, tol_cap: f64) -> Self {
        let scale = rhs.value.norm().max(1.0);
        let tol = (10.0 * (lhs.err_estimate + rhs.err_estimate) / scale)
            .max(TOL_FLOOR)
            .min(tol_cap);
        Self::compare_fixed(name, lhs, rhs, tol)
    }

    /// Compare against a fixed tolerance.
    pub fn compare_fixed(name: String, lhs: &Evaluation, rhs: &Evaluation, tol: f64) -> Self {
        let abs_dev = (lhs.value - rhs.value).norm();
        let rhs_norm = rhs.value.norm();
        let rel_dev = if rhs_norm > 0.0 { abs_dev / rhs_norm } else { abs_dev };
        let measured = if rhs_norm < 1.0 { abs_dev } else { rel_dev };
        IdentityCheck {
            name,
            lhs: lhs.value,
            rhs: rhs.value,
            lhs_err: lhs.err_estimate,
            rhs_err: rhs.err_estimate,
            abs_dev,
            rel_dev,
            tol,
            n_used: lhs.n_used.max(rhs.n_used),
            converged: lhs.converged && rhs.converged,
            passed: measured <= tol,
            note: None,
        }
    }

    /// A check that could not be evaluated.
    pub fn failed(name: String, err: &EvalError) -> Self {
        IdentityCheck {
            name,
            lhs: Complex64::new(f64::NAN, 0.0),
            rhs: Complex64::new(f64::NAN, 0.0),
            lhs_err: f64::INFINITY,
            rhs_err: f64::INFINITY,
            abs_dev: f64::INFINITY,
            rel_dev: f64::INFINITY,
            tol: 0.0,
            n_used: 0,
            converged: false,
            passed: false,
            note: Some(err.to_string()),
        }
    }
}

/// One side of an identity: `constant + Σ coeff · spec`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Side {
    constant: BigRational,
    terms: BTreeMap<String, (BigRational, NestedSumSpec)>,
}

impl Side {
    pub fn new() -> Self {
        Side::default()
    }

    /// Add `coeff · spec`; `None` stands for the constant series `1`.
    pub fn add(&mut self, coeff: BigRational, spec: Option<NestedSumSpec>) {
        let Some(spec) = spec else {
            self.constant += coeff;
            return;
        };
        let canonical = spec.canonical();
        let key = canonical.cache_key();
        let entry = self
            .terms
            .entry(key)
            .or_insert_with(|| (BigRational::zero(), canonical));
        entry.0 += coeff;
    }

    pub fn add_lincomb(&mut self, l: &LinComb, family: Family, p: &Params) {
        for (w, c) in l.iter() {
            self.add(c.clone(), family_spec(w, family, p));
        }
    }

    /// Canonical description: constant and `(spec key, coefficient)` pairs
    /// with zero coefficients dropped.
    pub fn signature(&self) -> (BigRational, Vec<(String, BigRational)>) {
        (
            self.constant.clone(),
            self.terms
                .iter()
                .filter(|(_, (c, _))| !c.is_zero())
                .map(|(k, (c, _))| (k.clone(), c.clone()))
                .collect(),
        )
    }

    pub fn specs(&self) -> impl Iterator<Item = &NestedSumSpec> {
        self.terms.values().filter(|(c, _)| !c.is_zero()).map(|(_, s)| s)
    }

    pub fn len(&self) -> usize {
        self.specs().count() + usize::from(!self.constant.is_zero())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// An identity `lhs = rhs` ready for numerical evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityPlan {
    pub name: String,
    pub lhs: Side,
    pub rhs: Side,
}

impl IdentityPlan {
    pub fn specs(&self) -> impl Iterator<Item = &NestedSumSpec> {
        self.lhs.specs().chain(self.rhs.specs())
    }
}

/// Caching, thread-safe spec evaluator.
pub struct Evaluator {
    cfg: EvalConfig,
    cache: Mutex<HashMap<String, Result<Evaluation, EvalError>>>,
}

impl Evaluator {
    pub fn new(cfg: EvalConfig) -> Self {
        Evaluator {
            cfg,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn config(&self) -> &EvalConfig {
        &self.cfg
    }

    /// Evaluate one spec. A missed tolerance is not an error here: the best
    /// value is returned with `converged = false`.
    pub fn eval_spec(&self, spec: &NestedSumSpec) -> Result<Evaluation, EvalError> {
        let key = spec.cache_key();
        if let Some(hit) = self.cache.lock().expect("cache lock").get(&key) {
            return hit.clone();
        }
        let result = match evaluate(spec, &self.cfg) {
            Err(EvalError::ToleranceNotReached { best }) => Ok(best),
            other => other,
        };
        self.cache.lock().expect("cache lock").insert(key, result.clone());
        result
    }

    /// Evaluate all distinct uncached specs in parallel.
    pub fn prefetch<'a>(&self, specs: impl IntoIterator<Item = &'a NestedSumSpec>) {
        let mut pending: BTreeMap<String, &NestedSumSpec> = BTreeMap::new();
        {
            let cache = self.cache.lock().expect("cache lock");
            for s in specs {
                let key = s.cache_key();
                if !cache.contains_key(&key) {
                    pending.insert(key, s);
                }
            }
        }
        pending.into_par_iter().for_each(|(_, s)| {
            let _ = self.eval_spec(s);
        });
    }

    pub fn eval_side(&self, side: &Side) -> Result<Evaluation, EvalError> {
        let mut total = Evaluation::exact(Complex64::new(coeff_to_f64(&side.constant), 0.0));
        for (c, spec) in side.terms.values() {
            if c.is_zero() {
                continue;
            }
            let e = self.eval_spec(spec)?;
            let c = coeff_to_f64(c);
            total.value += e.value * c;
            total.err_estimate += e.err_estimate * c.abs();
            total.n_used = total.n_used.max(e.n_used);
            total.converged &= e.converged;
        }
        Ok(total)
    }

    /// Evaluate both sides and compare with the truncation-aware tolerance
    /// capped at `tol`.
    pub fn check(&self, plan: &IdentityPlan, tol: f64) -> IdentityCheck {
        match (self.eval_side(&plan.lhs), self.eval_side(&plan.rhs)) {
            (Ok(l), Ok(r)) => IdentityCheck::compare(plan.name.clone(), &l, &r, tol),
            (Err(e), _) | (_, Err(e)) => IdentityCheck::failed(plan.name.clone(), &e),
        }
    }
}

fn one() -> BigRational {
    BigRational::one()
}

fn fmt_alpha(a: Complex64) -> String {
    format!("alpha={}", format_complex(a))
}

/// `Z(v; (α, β)) = Z(τ(v); (β, α))`.
pub fn plan_duality(w: &Word, p: &Params) -> IdentityPlan {
    let mut lhs = Side::new();
    lhs.add(one(), z_spec(w, p));
    let mut rhs = Side::new();
    rhs.add(one(), z_spec(&dual(w), &p.swapped()));
    IdentityPlan {
        name: format!("duality [{w}] {p}"),
        lhs,
        rhs,
    }
}

/// The index set of the right-hand side of [`plan_thm11_i`]: r-vectors
/// `(ε(c'_1) r_1, r_2, ..., r_q)` summing to `r`. When `ε(c'_1) = 0` only the
/// representative `r_1 = 0` is produced.
pub fn thm11_i_rvectors(dual_word: &Word, r: u32) -> Vec<RVector> {
    let q = dual_word.depth();
    if q == 0 {
        return if r == 0 { vec![RVector::default()] } else { Vec::new() };
    }
    if first_cut_epsilon(dual_word) == 1 {
        compositions(r, q).into_iter().map(RVector).collect()
    } else {
        compositions(r, q - 1)
            .into_iter()
            .map(|tail| {
                let mut v = vec![0];
                v.extend(tail);
                RVector(v)
            })
            .collect()
    }
}

/// `Z(σ^{b,1}_r(v); (α, β)) = Σ Z*_{(ε(c'_1) r_1, r_2, ...)}(τ(v); (β, α))`.
pub fn plan_thm11_i(w: &Word, r: u32, p: &Params) -> IdentityPlan {
    let mut lhs = Side::new();
    lhs.add_lincomb(&sigma_b1(w, r), Family::Z, p);
    let mut rhs = Side::new();
    let d = dual(w);
    let q = p.swapped();
    for rv in thm11_i_rvectors(&d, r) {
        rhs.add(one(), zstar_spec(&d, &rv, &q).expect("r-vector length matches"));
    }
    IdentityPlan {
        name: format!("thm11i [{w}] r={r} {p}"),
        lhs,
        rhs,
    }
}

/// `Z(σ^ε_r(v); α) = Z(σ^ε_r(τ(v)); α)`.
pub fn plan_thm11_ii(w: &Word, r: u32, alpha: Complex64) -> IdentityPlan {
    let p = Params::diagonal(alpha);
    let mut lhs = Side::new();
    lhs.add_lincomb(&sigma_eps(w, r), Family::Z, &p);
    let mut rhs = Side::new();
    rhs.add_lincomb(&sigma_eps(&dual(w), r), Family::Z, &p);
    IdentityPlan {
        name: format!("thm11ii [{w}] r={r} {}", fmt_alpha(alpha)),
        lhs,
        rhs,
    }
}

/// Both sides of the `y`-slot refinement of [`plan_thm11_ii`] as word
/// combinations:
/// `Σ_l Σ_y σ^ε_{r-l}(v_y)` and `Σ_l Σ_{(l_i)} σ^ε_{r-l}(v'_{(l_i)})`.
pub fn prop24_lincombs(w: &Word, r: u32) -> (LinComb, LinComb) {
    let mut lhs = LinComb::new();
    let mut rhs = LinComb::new();
    for l in 0..=r {
        lhs.add_assign(&v_y_monomials(w, l).map_linear(|m| sigma_eps(m, r - l)));
        rhs.add_assign(&v_prime_monomials(w, l).map_linear(|m| sigma_eps(m, r - l)));
    }
    (lhs, rhs)
}

pub fn plan_prop24(w: &Word, r: u32, alpha: Complex64) -> IdentityPlan {
    let p = Params::diagonal(alpha);
    let (l, rr) = prop24_lincombs(w, r);
    let mut lhs = Side::new();
    lhs.add_lincomb(&l, Family::Z, &p);
    let mut rhs = Side::new();
    rhs.add_lincomb(&rr, Family::Z, &p);
    IdentityPlan {
        name: format!("prop24 [{w}] r={r} {}", fmt_alpha(alpha)),
        lhs,
        rhs,
    }
}

/// `ζ(σ^{b,2}_r(v); α) = Σ_{r_1+...+r_q=r} H*_{(r_i)}(τ(v); α)`.
pub fn plan_thm31(w: &Word, r: u32, alpha: Complex64) -> IdentityPlan {
    let p = Params::diagonal(alpha);
    let mut lhs = Side::new();
    lhs.add_lincomb(&sigma_b2(w, r), Family::Zeta, &p);
    let mut rhs = Side::new();
    let d = dual(w);
    for rv in compositions(r, d.depth()) {
        rhs.add(one(), hstar_spec(&d, &RVector(rv), alpha).expect("r-vector length matches"));
    }
    IdentityPlan {
        name: format!("thm31 [{w}] r={r} {}", fmt_alpha(alpha)),
        lhs,
        rhs,
    }
}

/// The depth-one specialization: for `k_1 >= 2`,
/// `Σ_{r_1+...+r_q=r} Z(Π_{i<q} z_1(1+r_i) · z_1(2+r_q); (α, β))
///   = Σ_m (m+β)^{-r-1} (m+α)^{-k_1+1}` with `q = k_1 - 1`.
///
/// The right-hand side is built directly as a depth-one series, independent of
/// the `Z*` spec builder.
pub fn plan_sum_formula(k1: u32, r: u32, p: &Params) -> IdentityPlan {
    assert!(k1 >= 2, "sum formula needs k1 >= 2");
    let q = (k1 - 1) as usize;
    let mut lhs = Side::new();
    for rv in compositions(r, q) {
        let pairs = rv
            .iter()
            .enumerate()
            .map(|(i, &ri)| (crate::words::Cut::One, if i + 1 == q { 2 + ri } else { 1 + ri }))
            .collect();
        let word = Word::new(pairs).expect("sum-formula word is admissible");
        lhs.add(one(), z_spec(&word, p));
    }
    let mut rhs = Side::new();
    rhs.add(one(), Some(depth_one_spec(k1 as i32 - 1, r as i32 + 1, p)));
    IdentityPlan {
        name: format!("sum-formula k1={k1} r={r} {p}"),
        lhs,
        rhs,
    }
}

/// Series–series duality for multiple Hurwitz zeta values:
/// `ζ(v; α) = H*_{(0)}(τ(v); α)` (the `r = 0` case of [`plan_thm31`]).
pub fn plan_hurwitz_duality(w: &Word, alpha: Complex64) -> IdentityPlan {
    let mut lhs = Side::new();
    lhs.add(one(), hurwitz_spec(w, alpha));
    let d = dual(w);
    let mut rhs = Side::new();
    rhs.add(one(), hstar_spec(&d, &RVector::zeros(d.depth()), alpha).expect("length matches"));
    IdentityPlan {
        name: format!("hurwitz-duality [{w}] {}", fmt_alpha(alpha)),
        lhs,
        rhs,
    }
}

pub fn check_duality(ev: &Evaluator, w: &Word, p: &Params, tol: f64) -> IdentityCheck {
    ev.check(&plan_duality(w, p), tol)
}

pub fn check_thm11_i(ev: &Evaluator, w: &Word, r: u32, p: &Params, tol: f64) -> IdentityCheck {
    ev.check(&plan_thm11_i(w, r, p), tol)
}

pub fn check_thm11_ii(ev: &Evaluator, w: &Word, r: u32, alpha: Complex64, tol: f64) -> IdentityCheck {
    ev.check(&plan_thm11_ii(w, r, alpha), tol)
}

pub fn check_prop24(ev: &Evaluator, w: &Word, r: u32, alpha: Complex64, tol: f64) -> IdentityCheck {
    ev.check(&plan_prop24(w, r, alpha), tol)
}

pub fn check_thm31(ev: &Evaluator, w: &Word, r: u32, alpha: Complex64, tol: f64) -> IdentityCheck {
    ev.check(&plan_thm31(w, r, alpha), tol)
}

pub fn check_sum_formula(ev: &Evaluator, k1: u32, r: u32, p: &Params, tol: f64) -> IdentityCheck {
    ev.check(&plan_sum_formula(k1, r, p), tol)
}

/// Compare the series value of `w` with the simplex iterated integral
/// (tanh-sinh tensor quadrature in nested-product coordinates). Intended for
/// weight ≤ 4 and real `α, β ∈ [1, 2]`; the quadrature error estimate is the
/// change between step sizes 1/4 and 1/8.
pub fn check_integral_repr(ev: &Evaluator, w: &Word, p: &Params, family: Family, tol: f64) -> IdentityCheck {
    let (label, spec, ifam) = match family {
        Family::Z => ("integral-Z", z_spec(w, p), IntegralFamily::Z { alpha: p.alpha.re, beta: p.beta.re }),
        Family::Zeta => ("integral-zeta", hurwitz_spec(w, p.alpha), IntegralFamily::Zeta { alpha: p.alpha.re }),
    };
    let name = match family {
        Family::Z => format!("{label} [{w}] {p}"),
        Family::Zeta => format!("{label} [{w}] {}", fmt_alpha(p.alpha)),
    };
    if p.alpha.im != 0.0 || p.beta.im != 0.0 {
        return IdentityCheck::failed(name, &EvalError::InvalidParams("quadrature needs real parameters".into()));
    }
    let series = match spec {
        None => Evaluation::exact(Complex64::new(1.0, 0.0)),
        Some(s) => match ev.eval_spec(&s) {
            Ok(e) => e,
            Err(e) => return IdentityCheck::failed(name, &e),
        },
    };
    let letters = w.letters();
    let coarse = iterated_integral(&letters, ifam, 0.25);
    let fine = iterated_integral(&letters, ifam, 0.125);
    let quad = Evaluation {
        value: Complex64::new(fine, 0.0),
        err_estimate: (fine - coarse).abs(),
        n_used: 0,
        converged: true,
    };
    IdentityCheck::compare_fixed(name, &series, &quad, tol)
}

/// Truncation used by finite differences, identical at every stencil point so
/// that the differenced values are smooth in the parameter.
pub const FD_TRUNCATION: usize = 1 << 17;
/// Finite-difference step.
pub const FD_STEP: f64 = 1e-3;

/// Order-4 central difference of `β ↦ Z(τ(v); (β, α))`, scaled by
/// `(-1)^r / r!`, against the `Z*` side of [`plan_thm11_i`].
pub fn check_derivative_crosslink(ev: &Evaluator, w: &Word, r: u32, p: &Params, tol: f64) -> IdentityCheck {
    let name = format!("derivative [{w}] r={r} {p}");
    if !(r == 1 || r == 2) || p.beta.im != 0.0 || p.alpha.im != 0.0 {
        return IdentityCheck::failed(name, &EvalError::InvalidParams("needs r in {1,2} and real parameters".into()));
    }
    let d = dual(w);
    let h = FD_STEP;
    let mut f = [0.0; 5];
    let mut err = 0.0f64;
    for (slot, k) in (-2i32..=2).enumerate() {
        if r == 1 && k == 0 {
            continue;
        }
        let q = Params::new(p.beta + k as f64 * h, p.alpha);
        let spec = z_spec(&d, &q).expect("dual is non-empty");
        match evaluate_truncated(&spec, FD_TRUNCATION, ev.config()) {
            Ok(e) => {
                f[slot] = e.value.re;
                err = err.max(e.err_estimate);
            }
            Err(e) => return IdentityCheck::failed(name, &e),
        }
    }
    let (deriv, amp) = if r == 1 {
        ((-f[4] + 8.0 * f[3] - 8.0 * f[1] + f[0]) / (12.0 * h), 18.0 / (12.0 * h))
    } else {
        ((-f[4] + 16.0 * f[3] - 30.0 * f[2] + 16.0 * f[1] - f[0]) / (12.0 * h * h), 64.0 / (12.0 * h * h))
    };
    let scale = if r == 1 { -1.0 } else { 0.5 };
    let fd = Evaluation {
        value: Complex64::new(scale * deriv, 0.0),
        err_estimate: scale.abs() * amp * err,
        n_used: FD_TRUNCATION,
        converged: true,
    };
    let rhs_plan = plan_thm11_i(w, r, p);
    match ev.eval_side(&rhs_plan.rhs) {
        Ok(rhs) => IdentityCheck::compare_fixed(name, &fd, &rhs, tol),
        Err(e) => IdentityCheck::failed(name, &e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::parse_word;

    fn w(s: &str) -> Word {
        parse_word(s).unwrap()
    }

    #[test]
    fn compare_modes() {
        let e = |v: f64, err: f64| Evaluation {
            value: Complex64::new(v, 0.0),
            err_estimate: err,
            n_used: 10,
            converged: true,
        };
        // Relative mode for |rhs| >= 1.
        let c = IdentityCheck::compare("x".into(), &e(2.0 + 1e-9, 0.0), &e(2.0, 0.0), 1e-7);
        assert!(c.passed);
        assert_eq!(c.tol, TOL_FLOOR);
        assert!((c.rel_dev - 5e-10).abs() < 1e-15);
        // Absolute mode for |rhs| < 1.
        let c = IdentityCheck::compare_fixed("x".into(), &e(0.5 + 2e-9, 0.0), &e(0.5, 0.0), 3e-9);
        assert!(c.passed);
        // The cap limits large error estimates.
        let c = IdentityCheck::compare("x".into(), &e(2.0 + 1e-6, 1.0), &e(2.0, 1.0), 1e-7);
        assert!(!c.passed);
        assert_eq!(c.tol, 1e-7);
    }

    #[test]
    fn thm11_i_index_set() {
        // τ(z1(3)) = z1(1) z1(2): ε(c'_1) = 1, all compositions of 1 into 2.
        let d = dual(&w("1:3"));
        assert_eq!(thm11_i_rvectors(&d, 1), vec![RVector(vec![0, 1]), RVector(vec![1, 0])]);
        // z1(1) z_{1/2}(2) is self-dual with ε(c'_1) = 0: r_1 forced to 0.
        let d = dual(&w("1:1,1/2:2"));
        assert_eq!(thm11_i_rvectors(&d, 2), vec![RVector(vec![0, 2])]);
        // q = 1: c'_1 = c_q = 1.
        assert_eq!(thm11_i_rvectors(&w("1:2"), 2), vec![RVector(vec![2])]);
    }

    #[test]
    fn r_zero_plans_reduce_to_duality() {
        let p = Params::real(0.8, 1.3);
        let a = Complex64::new(0.75, 0.0);
        for word in crate::words::word_universe(5, 5) {
            let dual_plan = plan_duality(&word, &p);
            let i = plan_thm11_i(&word, 0, &p);
            assert_eq!(i.lhs.signature(), dual_plan.lhs.signature(), "{word}");
            assert_eq!(i.rhs.signature(), dual_plan.rhs.signature(), "{word}");
            let diag = plan_duality(&word, &Params::diagonal(a));
            for plan in [plan_thm11_ii(&word, 0, a), plan_prop24(&word, 0, a)] {
                assert_eq!(plan.lhs.signature(), diag.lhs.signature(), "{word}");
                assert_eq!(plan.rhs.signature(), diag.rhs.signature(), "{word}");
            }
            let t = plan_thm31(&word, 0, a);
            let hd = plan_hurwitz_duality(&word, a);
            assert_eq!(t.lhs.signature(), hd.lhs.signature());
            assert_eq!(t.rhs.signature(), hd.rhs.signature());
        }
    }

    #[test]
    fn self_dual_thm11_ii_is_structurally_trivial() {
        let word = w("1:1,1/2:2");
        for r in 0..4 {
            let plan = plan_thm11_ii(&word, r, Complex64::new(1.2, 0.0));
            assert_eq!(plan.lhs.signature(), plan.rhs.signature());
        }
    }
}
