//! Translation of words into nested-sum specs for the four series families,
//! and their evaluation.
//!
//! Parameter convention: every function takes its parameter pair literally,
//! in the order it is written after the word. For `Z(v; (α, β))` the first
//! slot is the Pochhammer base. `Z*_r(w; (β, α))` is written with the pair
//! reversed in the duality identities, and its first slot is again the
//! Pochhammer base: `eval_zstar(w, r, p)` computes `Z*_r(w; (p.alpha,
//! p.beta))`, so that an all-zero `r` gives `eval_z(w, p)`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::EvalError;
use crate::nested_sum::{evaluate, EvalConfig, Evaluation, IndexLink, IndexWeight, NestedSumSpec, Prefactor};
use crate::words::{Cut, LinComb, RVector, Word};

/// Series parameters `(α, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl Params {
    pub fn new(alpha: Complex64, beta: Complex64) -> Self {
        Params { alpha, beta }
    }

    pub fn real(alpha: f64, beta: f64) -> Self {
        Params::new(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))
    }

    /// `(α, α)`, the shorthand `Z(v; α)`.
    pub fn diagonal(alpha: Complex64) -> Self {
        Params::new(alpha, alpha)
    }

    pub fn swapped(self) -> Self {
        Params::new(self.beta, self.alpha)
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        for (name, z) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(z.re > 0.0) || !z.im.is_finite() {
                return Err(EvalError::InvalidParams(format!("Re({name}) must be > 0, got {z}")));
            }
        }
        Ok(())
    }
}

/// Formats a complex number as `a` or `a+bi` / `a-bi`.
pub fn format_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im > 0.0 {
        format!("{}+{}i", z.re, z.im)
    } else {
        format!("{}-{}i", z.re, -z.im)
    }
}

/// Parses `a`, `a+bi`, `a-bi`, `bi`.
pub fn parse_complex(text: &str) -> Result<Complex64, String> {
    let t = text.trim();
    let err = || format!("expected a complex number like `1.5` or `1.5+0.3i`, found `{text}`");
    if t.is_empty() {
        return Err(err());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| err());
    };
    // Split at the last sign that is not part of an exponent or leading sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (&body[..i], &body[i..]),
        None => ("0", body),
    };
    let im = match im {
        "+" | "" => "1",
        "-" => "-1",
        s => s,
    };
    let re: f64 = re.parse().map_err(|_| err())?;
    let im: f64 = im.trim_start_matches('+').parse().map_err(|_| err())?;
    Ok(Complex64::new(re, im))
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", format_complex(self.alpha), format_complex(self.beta))
    }
}

/// Word-evaluation family for linear combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `Z(w; (α, β))`.
    Z,
    /// The multiple Hurwitz zeta value `ζ(w; α)`.
    Zeta,
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "z" => Ok(Family::Z),
            "zeta" => Ok(Family::Zeta),
            other => Err(format!("unknown family `{other}` (expected Z or zeta)")),
        }
    }
}

fn links_from_cuts(w: &Word) -> Vec<IndexLink> {
    w.pairs()[1..].iter().map(|&(c, _)| IndexLink::from_cut(c)).collect()
}

/// Spec of `Z(w; (α, β))`; `None` for the empty word (value 1).
pub fn z_spec(w: &Word, p: &Params) -> Option<NestedSumSpec> {
    if w.is_empty() {
        return None;
    }
    let depth = w.depth();
    let mut indices: Vec<IndexWeight> = w
        .exponents()
        .enumerate()
        .map(|(i, k)| IndexWeight::new(0, if i + 1 == depth { k as i32 - 1 } else { k as i32 }))
        .collect();
    indices[0].prefactors.push(Prefactor::PochFirst);
    indices[depth - 1].prefactors.push(Prefactor::PochLast);
    Some(NestedSumSpec {
        indices,
        links: links_from_cuts(w),
        start: IndexLink::Weak,
        alpha: p.alpha,
        beta: p.beta,
    })
}

/// Spec of `ζ(w; α) = Σ Π (m_i+α)^{-k_i}`.
pub fn hurwitz_spec(w: &Word, alpha: Complex64) -> Option<NestedSumSpec> {
    if w.is_empty() {
        return None;
    }
    Some(NestedSumSpec {
        indices: w.exponents().map(|k| IndexWeight::new(0, k as i32)).collect(),
        links: links_from_cuts(w),
        start: IndexLink::Weak,
        alpha,
        beta: alpha,
    })
}

fn check_len(w: &Word, r: &RVector) -> Result<(), EvalError> {
    if r.len() != w.depth() {
        return Err(EvalError::LengthMismatch {
            expected: w.depth(),
            got: r.len(),
        });
    }
    Ok(())
}

/// Append the chain `m_{i-1} <_{c_{i-1}} M_1 ≤ ... ≤ M_{r_i} <*_{c_i} m_i`
/// (or the plain link `<_{c_{i-1}}` when `r_i = 0`) ending in `main`.
fn push_chain(
    indices: &mut Vec<IndexWeight>,
    links: &mut Vec<IndexLink>,
    entry: IndexLink,
    aux: IndexWeight,
    count: u32,
    exit: IndexLink,
    main: IndexWeight,
) {
    if count == 0 {
        links.push(entry);
    } else {
        links.push(entry);
        indices.push(aux.clone());
        for _ in 1..count {
            links.push(IndexLink::Weak);
            indices.push(aux.clone());
        }
        links.push(exit);
    }
    indices.push(main);
}

/// Spec of `Z*_r(w; (p.alpha, p.beta))`: `p.alpha` is the Pochhammer base
/// and the shift of the auxiliary indices, `p.beta` shifts the main indices.
pub fn zstar_spec(w: &Word, r: &RVector, p: &Params) -> Result<Option<NestedSumSpec>, EvalError> {
    // Internally the kernel tags are written in the (β, α) order of the
    // series definition: base β, main shift α.
    let p = p.swapped();
    if w.is_empty() {
        return if r.is_empty() {
            Ok(None)
        } else {
            Err(EvalError::LengthMismatch { expected: 0, got: r.len() })
        };
    }
    check_len(w, r)?;
    let q = w.depth();
    let pairs = w.pairs();
    let main = |i: usize| {
        let mut iw = IndexWeight::new(pairs[i].1 as i32, 0);
        if i == 0 {
            iw.b = r.0[0] as i32;
            iw.prefactors.push(Prefactor::PochFirstZstar);
        }
        if i + 1 == q {
            iw.prefactors.push(Prefactor::PochLastZstar);
        }
        iw
    };
    let mut indices = vec![main(0)];
    let mut links = Vec::new();
    for i in 1..q {
        push_chain(
            &mut indices,
            &mut links,
            IndexLink::from_cut(pairs[i].0),
            IndexWeight::new(0, 1),
            r.0[i],
            IndexLink::star_from_cut(w.cut_after(i + 1)),
            main(i),
        );
    }
    Ok(Some(NestedSumSpec {
        indices,
        links,
        start: IndexLink::Weak,
        alpha: p.alpha,
        beta: p.beta,
    }))
}

/// Spec of `H*_r(w; α)`. Every main index carries `(m+1)^{-k_i}`, every
/// auxiliary index `(M+α)^{-1}`; the first chain starts at `0 ≤ M_1`.
pub fn hstar_spec(w: &Word, r: &RVector, alpha: Complex64) -> Result<Option<NestedSumSpec>, EvalError> {
    if w.is_empty() {
        return if r.is_empty() {
            Ok(None)
        } else {
            Err(EvalError::LengthMismatch { expected: 0, got: r.len() })
        };
    }
    check_len(w, r)?;
    let q = w.depth();
    let pairs = w.pairs();
    let main = |i: usize| {
        let iw = IndexWeight::new(0, pairs[i].1 as i32);
        if i + 1 == q {
            iw.with(Prefactor::PochLastHstar)
        } else {
            iw
        }
    };
    let aux = IndexWeight::new(1, 0);
    let mut indices = Vec::new();
    let mut links = Vec::new();
    for _ in 0..r.0[0] {
        indices.push(aux.clone());
    }
    links.extend(std::iter::repeat_n(IndexLink::Weak, indices.len().saturating_sub(1)));
    if !indices.is_empty() {
        links.push(IndexLink::star_from_cut(w.cut_after(1)));
    }
    indices.push(main(0));
    for i in 1..q {
        push_chain(
            &mut indices,
            &mut links,
            IndexLink::from_cut(pairs[i].0),
            aux.clone(),
            r.0[i],
            IndexLink::star_from_cut(w.cut_after(i + 1)),
            main(i),
        );
    }
    Ok(Some(NestedSumSpec {
        indices,
        links,
        start: IndexLink::Weak,
        alpha,
        beta: Complex64::new(1.0, 0.0),
    }))
}

fn run(spec: Option<NestedSumSpec>, cfg: &EvalConfig) -> Result<Evaluation, EvalError> {
    match spec {
        None => Ok(Evaluation::exact(Complex64::new(1.0, 0.0))),
        Some(s) => evaluate(&s, cfg),
    }
}

/// `Z(w; (α, β))`.
pub fn eval_z(w: &Word, p: &Params, cfg: &EvalConfig) -> Result<Evaluation, EvalError> {
    p.validate()?;
    run(z_spec(w, p), cfg)
}

/// `Z*_r(w; (p.alpha, p.beta))`.
pub fn eval_zstar(w: &Word, r: &RVector, p: &Params, cfg: &EvalConfig) -> Result<Evaluation, EvalError> {
    p.validate()?;
    run(zstar_spec(w, r, p)?, cfg)
}

/// `ζ(w; α)`.
pub fn eval_hurwitz(w: &Word, alpha: Complex64, cfg: &EvalConfig) -> Result<Evaluation, EvalError> {
    Params::diagonal(alpha).validate()?;
    run(hurwitz_spec(w, alpha), cfg)
}

/// `H*_r(w; α)`.
pub fn eval_hstar(w: &Word, r: &RVector, alpha: Complex64, cfg: &EvalConfig) -> Result<Evaluation, EvalError> {
    Params::diagonal(alpha).validate()?;
    run(hstar_spec(w, r, alpha)?, cfg)
}

/// Spec of one word in the given family.
pub fn family_spec(w: &Word, family: Family, p: &Params) -> Option<NestedSumSpec> {
    match family {
        Family::Z => z_spec(w, p),
        Family::Zeta => hurwitz_spec(w, p.alpha),
    }
}

/// Convert an exact coefficient to floating point.
pub fn coeff_to_f64(c: &BigRational) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

/// `Σ coeff · eval(word)` over a linear combination; `Zeta` uses `p.alpha`.
///
/// Error estimates add up weighted by `|coeff|`. If any term misses the
/// tolerance the combined best value is returned in the error.
pub fn eval_lincomb(l: &LinComb, family: Family, p: &Params, cfg: &EvalConfig) -> Result<Evaluation, EvalError> {
    p.validate()?;
    let mut total = Evaluation::exact(Complex64::new(0.0, 0.0));
    for (w, c) in l.iter() {
        let e = match run(family_spec(w, family, p), cfg) {
            Ok(e) => e,
            Err(EvalError::ToleranceNotReached { best }) => best,
            Err(other) => return Err(other),
        };
        let c = coeff_to_f64(c);
        total.value += e.value * c;
        total.err_estimate += e.err_estimate * c.abs();
        total.n_used = total.n_used.max(e.n_used);
        total.converged &= e.converged;
    }
    if total.converged {
        Ok(total)
    } else {
        Err(EvalError::ToleranceNotReached { best: total })
    }
}

/// Depth-1 specs that the word families reduce to, used as oracles.
pub fn depth_one_spec(a: i32, b: i32, p: &Params) -> NestedSumSpec {
    NestedSumSpec {
        indices: vec![IndexWeight::new(a, b)],
        links: vec![],
        start: IndexLink::Weak,
        alpha: p.alpha,
        beta: p.beta,
    }
}

/// `ε(c'_1)` of a word: the cut after its first pair, with the convention
/// `c_q = 1` for depth one.
pub fn first_cut_epsilon(w: &Word) -> u32 {
    if w.depth() <= 1 {
        Cut::One.epsilon()
    } else {
        w.cut_after(1).epsilon()
    }
}
