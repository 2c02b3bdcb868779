//! Enumeration of identity families over word universes and parameter grids.

use std::fmt;
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    check_derivative_crosslink, check_integral_repr, plan_duality, plan_sum_formula, plan_thm11_i, plan_thm11_ii,
    plan_prop24, plan_thm31, Evaluator, IdentityCheck, IdentityPlan,
};
use crate::evaluators::{format_complex, Family, Params};
use crate::nested_sum::EvalConfig;
use crate::words::word_universe;

/// Identity family run by [`run_suite`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    /// `Z(v; (α, β)) = Z(τ(v); (β, α))` over the full grid.
    Duality,
    /// `Z(σ^{b,1}_r(v)) = Σ Z*(τ(v))` over the full grid.
    Thm11i,
    /// `Z(σ^ε_r(v)) = Z(σ^ε_r(τ(v)))` at the distinct `α` of the grid.
    Thm11ii,
    /// The `v_y` / `v'` identity at the distinct `α` of the grid.
    Prop24,
    /// `ζ(σ^{b,2}_r(v)) = Σ H*(τ(v))` (Hurwitz duality at `r = 0`).
    Thm31,
    /// Depth-one sum formula, `k_1 = 2 ..= weight_max`.
    SumFormula,
    /// Series against simplex quadrature (`Z` and `ζ`), weight ≤ 4, grid
    /// points with `α, β ∈ [1, 2]`.
    Integral,
    /// Finite-difference `β`-derivatives against the `Z*` expansion.
    Derivative,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Duality,
        Suite::Thm11i,
        Suite::Thm11ii,
        Suite::Prop24,
        Suite::Thm31,
        Suite::SumFormula,
        Suite::Integral,
        Suite::Derivative,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Duality => "duality",
            Suite::Thm11i => "thm11i",
            Suite::Thm11ii => "thm11ii",
            Suite::Prop24 => "prop24",
            Suite::Thm31 => "thm31",
            Suite::SumFormula => "sum-formula",
            Suite::Integral => "integral",
            Suite::Derivative => "derivative",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
                format!("unknown suite `{s}` (expected one of: {})", names.join(", "))
            })
    }
}

/// Parameters of a verification run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub weight_max: u32,
    pub depth_max: usize,
    pub r_max: u32,
    pub params_grid: Vec<Params>,
    /// Upper bound on the per-check tolerance.
    pub tol: f64,
    /// Restrict to even `r`.
    pub even_r_only: bool,
    /// Seed for subsampling when `max_items` is set.
    pub rng_seed: u64,
    /// Run at most this many checks, chosen pseudo-randomly from `rng_seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_items: Option<usize>,
    pub eval: EvalConfig,
}

/// `{0.6, 1.0, 1.5}²`.
pub fn default_grid() -> Vec<Params> {
    grid_from_values(&[0.6, 1.0, 1.5])
}

/// All pairs `(α, β)` from a list of real values.
pub fn grid_from_values(values: &[f64]) -> Vec<Params> {
    values
        .iter()
        .flat_map(|&a| values.iter().map(move |&b| Params::real(a, b)))
        .collect()
}

/// Evaluation policy used by the suites: escalation to `2^18` terms.
pub fn suite_eval_config() -> EvalConfig {
    EvalConfig {
        n_initial: 4096,
        growth: 4,
        rel_tol: 1e-10,
        max_n: 1 << 18,
        extrapolation_terms: 3,
    }
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            weight_max: 4,
            depth_max: 16,
            r_max: 2,
            params_grid: default_grid(),
            tol: 1e-7,
            even_r_only: false,
            rng_seed: 0,
            max_items: None,
            eval: suite_eval_config(),
        }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.weight_max < 2 {
            return Err("weight_max must be >= 2".into());
        }
        if !(self.tol > 0.0) {
            return Err("tol must be > 0".into());
        }
        if self.params_grid.is_empty() {
            return Err("parameter grid is empty".into());
        }
        for p in &self.params_grid {
            p.validate().map_err(|e| e.to_string())?;
        }
        self.eval.validate().map_err(|e| e.to_string())
    }

    /// `r = 0 ..= r_max`, even only if requested.
    pub fn r_values(&self) -> Vec<u32> {
        (0..=self.r_max).filter(|r| !self.even_r_only || r % 2 == 0).collect()
    }

    /// Distinct `α` values of the grid, in grid order.
    pub fn alphas(&self) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = Vec::new();
        for p in &self.params_grid {
            if !out.contains(&p.alpha) {
                out.push(p.alpha);
            }
        }
        out
    }
}

/// Aggregated result of a suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub suite: Suite,
    pub config: SuiteConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub checks: Vec<IdentityCheck>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn stamp(&mut self) {
        self.timestamp_unix = SystemTime::now().duration_since(UNIX_EPOCH).ok().map(|d| d.as_secs());
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable fixed-width table.
    pub fn to_table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(4);
        let mut out = format!(
            "{:<width$}  {:>24}  {:>24}  {:>9}  {:>9}  {}\n",
            "name", "lhs", "rhs", "rel_dev", "tol", "ok"
        );
        for c in &self.checks {
            out += &format!(
                "{:<width$}  {:>24}  {:>24}  {:>9.2e}  {:>9.2e}  {}\n",
                c.name,
                format_complex_short(c.lhs),
                format_complex_short(c.rhs),
                c.rel_dev,
                c.tol,
                if c.passed { "PASS" } else { "FAIL" }
            );
        }
        out += &format!("{} checks: {} passed, {} failed\n", self.total, self.passed, self.failed);
        out
    }
}

fn format_complex_short(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{:.16}", z.re)
    } else {
        format_complex(Complex64::new(
            (z.re * 1e12).round() / 1e12,
            (z.im * 1e12).round() / 1e12,
        ))
    }
}

enum Item {
    Plan(IdentityPlan),
    Integral(crate::words::Word, Params, Family),
    Derivative(crate::words::Word, u32, Params),
}

fn build_items(suite: Suite, sc: &SuiteConfig) -> Vec<Item> {
    let words = word_universe(sc.weight_max, sc.depth_max);
    let rs = sc.r_values();
    let mut items = Vec::new();
    match suite {
        Suite::Duality => {
            for w in &words {
                for p in &sc.params_grid {
                    items.push(Item::Plan(plan_duality(w, p)));
                }
            }
        }
        Suite::Thm11i => {
            for w in &words {
                for &r in &rs {
                    for p in &sc.params_grid {
                        items.push(Item::Plan(plan_thm11_i(w, r, p)));
                    }
                }
            }
        }
        Suite::Thm11ii | Suite::Prop24 | Suite::Thm31 => {
            for w in &words {
                for &r in &rs {
                    for &a in &sc.alphas() {
                        items.push(Item::Plan(match suite {
                            Suite::Thm11ii => plan_thm11_ii(w, r, a),
                            Suite::Prop24 => plan_prop24(w, r, a),
                            _ => plan_thm31(w, r, a),
                        }));
                    }
                }
            }
        }
        Suite::SumFormula => {
            for k1 in 2..=sc.weight_max {
                for &r in &rs {
                    for p in &sc.params_grid {
                        items.push(Item::Plan(plan_sum_formula(k1, r, p)));
                    }
                }
            }
        }
        Suite::Integral => {
            let in_range = |z: Complex64| z.im == 0.0 && (1.0..=2.0).contains(&z.re);
            for w in words.iter().filter(|w| w.weight() <= 4) {
                for p in sc.params_grid.iter().filter(|p| in_range(p.alpha) && in_range(p.beta)) {
                    items.push(Item::Integral(w.clone(), *p, Family::Z));
                }
                for &a in sc.alphas().iter().filter(|&&a| in_range(a)) {
                    items.push(Item::Integral(w.clone(), Params::diagonal(a), Family::Zeta));
                }
            }
        }
        Suite::Derivative => {
            for w in &words {
                for &r in rs.iter().filter(|&&r| r == 1 || r == 2) {
                    for p in &sc.params_grid {
                        items.push(Item::Derivative(w.clone(), r, *p));
                    }
                }
            }
        }
    }
    items
}

/// Tolerance of the quadrature cross-check.
pub const INTEGRAL_TOL: f64 = 1e-3;

/// Finite-difference tolerance for derivative order `r`.
pub fn derivative_tol(r: u32) -> f64 {
    if r == 1 {
        1e-4
    } else {
        1e-3
    }
}

/// Run every check of `suite` under `sc`. Failures are recorded, never
/// raised; checks are sorted by name. No timestamp is set (see
/// [`VerificationReport::stamp`]).
pub fn run_suite(suite: Suite, sc: &SuiteConfig) -> VerificationReport {
    let mut items = build_items(suite, sc);
    if let Some(limit) = sc.max_items {
        if items.len() > limit {
            let mut rng = ChaCha8Rng::seed_from_u64(sc.rng_seed);
            let mut order: Vec<usize> = (0..items.len()).collect();
            order.shuffle(&mut rng);
            order.truncate(limit);
            order.sort_unstable();
            let mut keep = vec![false; items.len()];
            for i in order {
                keep[i] = true;
            }
            let mut k = keep.into_iter();
            items.retain(|_| k.next().unwrap());
        }
    }
    let ev = Evaluator::new(sc.eval);
    ev.prefetch(items.iter().flat_map(|item| match item {
        Item::Plan(plan) => plan.specs().collect::<Vec<_>>(),
        _ => Vec::new(),
    }));
    let mut checks: Vec<IdentityCheck> = items
        .par_iter()
        .map(|item| match item {
            Item::Plan(plan) => ev.check(plan, sc.tol),
            Item::Integral(w, p, fam) => check_integral_repr(&ev, w, p, *fam, INTEGRAL_TOL.max(sc.tol)),
            Item::Derivative(w, r, p) => check_derivative_crosslink(&ev, w, *r, p, derivative_tol(*r).max(sc.tol)),
        })
        .collect();
    checks.sort_by(|a, b| a.name.cmp(&b.name));
    let passed = checks.iter().filter(|c| c.passed).count();
    VerificationReport {
        schema: 1,
        suite,
        config: sc.clone(),
        timestamp_unix: None,
        total: checks.len(),
        passed,
        failed: checks.len() - passed,
        checks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn r_values_and_alphas() {
        let sc = SuiteConfig {
            r_max: 3,
            even_r_only: true,
            ..SuiteConfig::default()
        };
        assert_eq!(sc.r_values(), vec![0, 2]);
        assert_eq!(sc.alphas().len(), 3);
    }

    #[test]
    fn subsampling_is_deterministic() {
        let sc = SuiteConfig {
            weight_max: 4,
            max_items: Some(5),
            rng_seed: 7,
            params_grid: vec![Params::real(1.0, 1.0), Params::real(1.5, 0.6)],
            ..SuiteConfig::default()
        };
        let a = run_suite(Suite::Duality, &sc);
        let b = run_suite(Suite::Duality, &sc);
        assert_eq!(a.total, 5);
        assert_eq!(a, b);
        assert!(a.all_passed(), "{}", a.to_table());
    }
}
