//! Numerical kernel for nested series
//! `Σ_{start ≤ m_1 ≺ m_2 ≺ ... ≺ m_d} Π_i w_i(m_i)` with strict or weak links
//! and per-index weights `(m+α)^{-a} (m+β)^{-b}` times Pochhammer-ratio
//! prefactors.

pub mod extrapolate;
pub mod kernel;
pub mod pochhammer;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::words::Cut;
use extrapolate::{fit_shape, Shape};
use kernel::Kernel;

pub use extrapolate::{tail_extrapolate, Extrapolation};
pub use pochhammer::{ln_gamma, pochhammer_log, PochhammerRatio};

/// Truncation points used by one extrapolation span from the top level down
/// by this factor.
pub const FIT_WINDOW: usize = 1024;

/// Relation between consecutive indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum IndexLink {
    /// `m_{i-1} < m_i`.
    Strict,
    /// `m_{i-1} ≤ m_i`.
    Weak,
}

impl IndexLink {
    /// `<_c`: strict iff `c = 1`.
    pub fn from_cut(c: Cut) -> Self {
        match c {
            Cut::One => IndexLink::Strict,
            Cut::Half => IndexLink::Weak,
        }
    }

    /// `<*_c`: weak iff `c = 1`.
    pub fn star_from_cut(c: Cut) -> Self {
        match c {
            Cut::One => IndexLink::Weak,
            Cut::Half => IndexLink::Strict,
        }
    }
}

/// Pochhammer-ratio factor attached to an index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Prefactor {
    /// `(α)_m / m!`.
    PochFirst,
    /// `m! / (α)_{m+1}`.
    PochLast,
    /// `(β)_m / m!`.
    PochFirstZstar,
    /// `m! (m+α) / (β)_{m+1}`.
    PochLastZstar,
    /// `(m+1)! / (α)_{m+1}`.
    PochLastHstar,
}

impl Prefactor {
    /// Algebraic decay contributed by the factor: it behaves like
    /// `m^{-offset}` for large `m` (Stirling: `(a)_m/m! ~ m^{a-1}/Γ(a)`).
    pub fn decay_offset(self, alpha: Complex64, beta: Complex64) -> Complex64 {
        match self {
            Prefactor::PochFirst => 1.0 - alpha,
            Prefactor::PochLast => alpha,
            Prefactor::PochFirstZstar => 1.0 - beta,
            Prefactor::PochLastZstar => beta - 1.0,
            Prefactor::PochLastHstar => alpha - 1.0,
        }
    }
}

/// Weight `(m+α)^{-a} (m+β)^{-b} · Π prefactors` of one index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct IndexWeight {
    pub a: i32,
    pub b: i32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub prefactors: Vec<Prefactor>,
}

impl IndexWeight {
    pub fn new(a: i32, b: i32) -> Self {
        IndexWeight {
            a,
            b,
            prefactors: Vec::new(),
        }
    }

    pub fn with(mut self, p: Prefactor) -> Self {
        self.prefactors.push(p);
        self
    }

    /// Large-`m` decay exponent of the weight.
    pub fn decay(&self, alpha: Complex64, beta: Complex64) -> Complex64 {
        self.prefactors
            .iter()
            .fold(Complex64::new((self.a + self.b) as f64, 0.0), |acc, p| {
                acc + p.decay_offset(alpha, beta)
            })
    }
}

/// Declarative description of one nested series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedSumSpec {
    /// Innermost (smallest) index first.
    pub indices: Vec<IndexWeight>,
    /// `links[i]` relates `indices[i]` to `indices[i+1]`.
    pub links: Vec<IndexLink>,
    /// `WEAK`: the first index starts at 0; `STRICT`: it starts at 1.
    pub start: IndexLink,
    pub alpha: Complex64,
    pub beta: Complex64,
}

fn is_nonpositive_integer(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

impl NestedSumSpec {
    pub fn depth(&self) -> usize {
        self.indices.len()
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        if self.indices.is_empty() {
            return Err(EvalError::InvalidParams("spec has no indices".into()));
        }
        if self.links.len() + 1 != self.indices.len() {
            return Err(EvalError::InvalidParams(format!(
                "{} indices need {} links, found {}",
                self.indices.len(),
                self.indices.len() - 1,
                self.links.len()
            )));
        }
        for (name, z) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(z.re.is_finite() && z.im.is_finite()) || z.re <= 0.0 {
                return Err(EvalError::InvalidParams(format!("Re({name}) must be > 0, got {z}")));
            }
            if is_nonpositive_integer(z) {
                return Err(EvalError::InvalidParams(format!("{name} is a non-positive integer")));
            }
        }
        Ok(())
    }

    /// Asymptotic shape of the outermost summand.
    pub fn summand_shape(&self) -> Shape {
        let mut shape: Option<Shape> = None;
        for w in &self.indices {
            let decay = w.decay(self.alpha, self.beta);
            shape = Some(match shape {
                None => Shape::power(decay),
                Some(s) => s.partial_sum().times_power(decay),
            });
        }
        shape.unwrap_or_default()
    }

    /// Asymptotic shape of `S∞ - S(N)`.
    pub fn tail_shape(&self) -> Shape {
        self.summand_shape().tail()
    }

    /// Outermost algebraic decay `s`: the summand is `O(m^{-s} ln^k m)`.
    pub fn decay_exponent(&self) -> f64 {
        self.summand_shape().leading_re()
    }

    pub fn check_convergence(&self) -> Result<(), EvalError> {
        let s = self.decay_exponent();
        if s > 1.0 + 1e-9 {
            Ok(())
        } else {
            Err(EvalError::NonConvergent(format!(
                "outermost decay exponent {s:.6} does not exceed 1"
            )))
        }
    }

    /// An equivalent spec in normal form, used as the cache key and for
    /// structural comparisons:
    /// * a spec using only the Z*-type prefactors is rewritten with `α` and
    ///   `β` exchanged so that it uses the Z-type tags;
    /// * `(m+1)!/(α)_{m+1}` becomes `m!/(α)_{m+1} · (m+β)` when `β = 1`;
    /// * `(α)_m/m! · m!/(α)_{m+1}` on one index folds into `(m+α)^{-1}`;
    /// * when `α = β` all exponents are moved onto `(m+β)`.
    pub fn canonical(&self) -> NestedSumSpec {
        let mut spec = self.clone();
        let tags = || spec.indices.iter().flat_map(|w| w.prefactors.iter().copied());
        let uses_z = tags().any(|p| matches!(p, Prefactor::PochFirst | Prefactor::PochLast | Prefactor::PochLastHstar));
        let uses_zstar = tags().any(|p| matches!(p, Prefactor::PochFirstZstar | Prefactor::PochLastZstar));
        if uses_zstar && !uses_z {
            std::mem::swap(&mut spec.alpha, &mut spec.beta);
            for w in &mut spec.indices {
                std::mem::swap(&mut w.a, &mut w.b);
                for p in &mut w.prefactors {
                    match *p {
                        Prefactor::PochFirstZstar => *p = Prefactor::PochFirst,
                        Prefactor::PochLastZstar => {
                            *p = Prefactor::PochLast;
                            w.b -= 1;
                        }
                        _ => {}
                    }
                }
            }
        }
        let beta_is_one = spec.beta == Complex64::new(1.0, 0.0);
        for w in &mut spec.indices {
            if beta_is_one {
                for p in &mut w.prefactors {
                    if *p == Prefactor::PochLastHstar {
                        *p = Prefactor::PochLast;
                        w.b -= 1;
                    }
                }
            }
            loop {
                let first = w.prefactors.iter().position(|&p| p == Prefactor::PochFirst);
                let last = w.prefactors.iter().position(|&p| p == Prefactor::PochLast);
                match (first, last) {
                    (Some(i), Some(j)) => {
                        w.prefactors.remove(i.max(j));
                        w.prefactors.remove(i.min(j));
                        w.a += 1;
                    }
                    _ => break,
                }
            }
            w.prefactors.sort();
        }
        if spec.alpha == spec.beta {
            for w in &mut spec.indices {
                w.b += w.a;
                w.a = 0;
            }
        }
        spec
    }

    /// Stable textual key of the canonical form.
    pub fn cache_key(&self) -> String {
        serde_json::to_string(&self.canonical()).expect("spec serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("spec serializes")
    }
}

/// Truncation and precision policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    pub n_initial: usize,
    pub growth: usize,
    pub rel_tol: f64,
    pub max_n: usize,
    /// Width (in units of the exponent) of the asymptotic basis beyond the
    /// leading tail term.
    pub extrapolation_terms: u32,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            n_initial: 4096,
            growth: 4,
            rel_tol: 1e-10,
            max_n: 100_000_000,
            extrapolation_terms: 3,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        if self.n_initial < 2 {
            return Err(EvalError::InvalidConfig("n_initial must be >= 2".into()));
        }
        if self.growth < 2 {
            return Err(EvalError::InvalidConfig("growth must be >= 2".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(EvalError::InvalidConfig("rel_tol must lie in (0, 1)".into()));
        }
        if self.max_n < self.n_initial {
            return Err(EvalError::InvalidConfig("max_n must be >= n_initial".into()));
        }
        Ok(())
    }
}

/// A value with its heuristic error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: Complex64,
    /// Absolute error estimate: the change of the extrapolated value between
    /// the last two truncation levels (floored at a few ulps).
    pub err_estimate: f64,
    pub n_used: usize,
    pub converged: bool,
}

impl Evaluation {
    /// Exact value (e.g. the empty word's `1`).
    pub fn exact(value: Complex64) -> Self {
        Evaluation {
            value,
            err_estimate: 0.0,
            n_used: 0,
            converged: true,
        }
    }
}

/// Relative floor on error estimates, covering accumulated rounding.
const ERR_FLOOR: f64 = 1e-14;

fn extrapolated(kernel: &Kernel, tail: &Shape, span: f64) -> (Complex64, bool) {
    let n = kernel.n();
    let lo = (n / FIT_WINDOW).max(kernel::GRID_MIN);
    let samples: Vec<(usize, Complex64)> = kernel
        .records()
        .iter()
        .copied()
        .filter(|&(m, _)| m >= lo && m <= n)
        .collect();
    match fit_shape(&samples, tail, span) {
        Ok(fit) => (fit.value, true),
        Err(_) => (kernel.partial(), false),
    }
}

fn prepare(spec: &NestedSumSpec, cfg: &EvalConfig) -> Result<(NestedSumSpec, Shape), EvalError> {
    cfg.validate()?;
    spec.validate()?;
    let spec = spec.canonical();
    spec.check_convergence()?;
    let tail = spec.tail_shape();
    Ok((spec, tail))
}

/// Evaluate the infinite nested sum to the configured relative tolerance.
///
/// Runs one resumable DP pass, extrapolating at `N = n_initial · growth^k`;
/// stops when two consecutive extrapolations agree to `rel_tol`. If `max_n`
/// is reached first, the best value is returned inside
/// [`EvalError::ToleranceNotReached`].
pub fn evaluate(spec: &NestedSumSpec, cfg: &EvalConfig) -> Result<Evaluation, EvalError> {
    let (spec, tail) = prepare(spec, cfg)?;
    let span = cfg.extrapolation_terms as f64;
    let mut kernel = Kernel::new(&spec, cfg.max_n);
    let mut n = cfg.n_initial;
    let mut prev: Option<Complex64> = None;
    loop {
        kernel.advance_to(n);
        let (value, fitted) = extrapolated(&kernel, &tail, span);
        let floor = ERR_FLOOR * value.norm();
        if let Some(p) = prev {
            let err = (value - p).norm().max(floor);
            let best = Evaluation {
                value,
                err_estimate: if fitted { err } else { err.max(value.norm()) },
                n_used: n,
                converged: fitted && err <= cfg.rel_tol * value.norm(),
            };
            if best.converged {
                return Ok(best);
            }
            if n >= cfg.max_n {
                return Err(EvalError::ToleranceNotReached { best });
            }
        } else if n >= cfg.max_n {
            return Err(EvalError::ToleranceNotReached {
                best: Evaluation {
                    value,
                    err_estimate: value.norm(),
                    n_used: n,
                    converged: false,
                },
            });
        }
        prev = Some(value);
        n = n.saturating_mul(cfg.growth).min(cfg.max_n);
    }
}

/// Extrapolate from a fixed truncation `n` without early stopping. The error
/// estimate compares against the extrapolation at `n / growth`. Used where the
/// truncation must not depend on the parameters (finite differences).
pub fn evaluate_truncated(spec: &NestedSumSpec, n: usize, cfg: &EvalConfig) -> Result<Evaluation, EvalError> {
    let (spec, tail) = prepare(spec, cfg)?;
    let span = cfg.extrapolation_terms as f64;
    let mut kernel = Kernel::new(&spec, n);
    kernel.advance_to((n / cfg.growth).max(2));
    let (coarse, _) = extrapolated(&kernel, &tail, span);
    kernel.advance_to(n);
    let (value, fitted) = extrapolated(&kernel, &tail, span);
    let err = (value - coarse).norm().max(ERR_FLOOR * value.norm());
    Ok(Evaluation {
        value,
        err_estimate: err,
        n_used: n,
        converged: fitted && err <= cfg.rel_tol * value.norm(),
    })
}

/// The raw partial sum with every index `< n` (no extrapolation).
pub fn partial_sum(spec: &NestedSumSpec, n: usize) -> Result<Complex64, EvalError> {
    spec.validate()?;
    let mut kernel = Kernel::new(spec, n);
    kernel.advance_to(n);
    Ok(kernel.partial())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn depth1(a: i32, b: i32, alpha: f64, beta: f64) -> NestedSumSpec {
        NestedSumSpec {
            indices: vec![IndexWeight::new(a, b)],
            links: vec![],
            start: IndexLink::Weak,
            alpha: c(alpha),
            beta: c(beta),
        }
    }

    #[test]
    fn zeta2_and_shifted_zeta2() {
        let cfg = EvalConfig::default();
        let v = evaluate(&depth1(0, 2, 1.0, 1.0), &cfg).unwrap();
        assert!((v.value.re - 1.644_934_066_848_226_4).abs() < 1e-12, "{v:?}");
        let v = evaluate(&depth1(0, 2, 0.5, 0.5), &cfg).unwrap();
        assert!((v.value.re - 4.934_802_200_544_679).abs() < 1e-11, "{v:?}");
    }

    #[test]
    fn zeta_1_2_equals_zeta3() {
        let spec = NestedSumSpec {
            indices: vec![IndexWeight::new(0, 1), IndexWeight::new(0, 2)],
            links: vec![IndexLink::Strict],
            start: IndexLink::Weak,
            alpha: c(1.0),
            beta: c(1.0),
        };
        let cfg = EvalConfig { max_n: 1 << 20, ..EvalConfig::default() };
        let v = evaluate(&spec, &cfg).unwrap_or_else(|e| *e.best().unwrap());
        assert!((v.value.re - 1.202_056_903_159_594_3).abs() < 1e-10, "{v:?}");
    }

    #[test]
    fn invalid_and_divergent_specs() {
        let cfg = EvalConfig::default();
        assert!(matches!(evaluate(&depth1(0, 2, -0.5, 1.0), &cfg), Err(EvalError::InvalidParams(_))));
        assert!(matches!(evaluate(&depth1(0, 1, 1.0, 1.0), &cfg), Err(EvalError::NonConvergent(_))));
        let bad = EvalConfig { growth: 1, ..cfg };
        assert!(matches!(evaluate(&depth1(0, 2, 1.0, 1.0), &bad), Err(EvalError::InvalidConfig(_))));
    }

    #[test]
    fn tolerance_not_reached_returns_best() {
        let cfg = EvalConfig { n_initial: 16, max_n: 64, rel_tol: 1e-15, ..EvalConfig::default() };
        let spec = NestedSumSpec {
            indices: vec![IndexWeight::new(0, 1), IndexWeight::new(0, 1), IndexWeight::new(2, 0)],
            links: vec![IndexLink::Weak, IndexLink::Strict],
            start: IndexLink::Weak,
            alpha: c(0.6),
            beta: c(1.3),
        };
        match evaluate(&spec, &cfg) {
            Err(EvalError::ToleranceNotReached { best }) => {
                assert_eq!(best.n_used, 64);
                assert!(!best.converged);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn canonical_folds_zstar_into_z() {
        let zstar = NestedSumSpec {
            indices: vec![
                IndexWeight::new(1, 0).with(Prefactor::PochFirstZstar),
                IndexWeight::new(2, 0).with(Prefactor::PochLastZstar),
            ],
            links: vec![IndexLink::Strict],
            start: IndexLink::Weak,
            alpha: c(0.8),
            beta: c(1.3),
        };
        let z = NestedSumSpec {
            indices: vec![
                IndexWeight::new(0, 1).with(Prefactor::PochFirst),
                IndexWeight::new(0, 1).with(Prefactor::PochLast),
            ],
            links: vec![IndexLink::Strict],
            start: IndexLink::Weak,
            alpha: c(1.3),
            beta: c(0.8),
        };
        assert_eq!(zstar.canonical(), z.canonical());
        assert_eq!(zstar.cache_key(), z.cache_key());
    }

    #[test]
    fn json_shape() {
        let spec = depth1(0, 2, 1.0, 1.5).canonical();
        let json: serde_json::Value = serde_json::from_str(&spec.to_json()).unwrap();
        assert_eq!(json["links"], serde_json::json!([]));
        assert_eq!(json["start"], "WEAK");
        assert_eq!(json["alpha"], serde_json::json!([1.0, 0.0]));
        let back: NestedSumSpec = serde_json::from_value(json).unwrap();
        assert_eq!(back, spec);
    }
}
