//! Admissible words over the alphabet `{x0, x1/2, x1}` and the linear maps
//! acting on them.
//!
//! A word is stored in composition form: a sequence of `(cut, k)` pairs, the
//! pair `(c, k)` standing for `z_c(k) = x_c x0^(k-1)`. The empty word is the
//! unit `1`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::WordError;

/// Separator between adjacent indices: `ONE` is a strict inequality in the
/// series, `HALF` a weak one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Cut {
    One,
    Half,
}

impl Cut {
    /// `ε(c)`: 1 for `ONE`, 0 for `HALF`.
    pub fn epsilon(self) -> u32 {
        match self {
            Cut::One => 1,
            Cut::Half => 0,
        }
    }

    pub fn letter(self) -> Letter {
        match self {
            Cut::One => Letter::X1,
            Cut::Half => Letter::XHalf,
        }
    }

    fn text(self) -> &'static str {
        match self {
            Cut::One => "1",
            Cut::Half => "1/2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    X0,
    XHalf,
    X1,
}

impl Letter {
    /// The letter `x_(1-e)`.
    pub fn complement(self) -> Letter {
        match self {
            Letter::X0 => Letter::X1,
            Letter::XHalf => Letter::XHalf,
            Letter::X1 => Letter::X0,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::X0 => '0',
            Letter::XHalf => 'h',
            Letter::X1 => '1',
        }
    }
}

/// An element of the basis `B⁰`: either the empty word or
/// `z_1(k_1) z_(c_1)(k_2) ... z_(c_(p-1))(k_p)` with `k_p >= 2`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    pairs: Vec<(Cut, u32)>,
}

impl Word {
    /// The unit word `1`.
    pub fn empty() -> Self {
        Word { pairs: Vec::new() }
    }

    pub fn new(pairs: Vec<(Cut, u32)>) -> Result<Self, WordError> {
        if let Some(&(first, _)) = pairs.first() {
            if first != Cut::One {
                return Err(WordError::Admissibility {
                    pos: 0,
                    msg: "first cut must be 1".into(),
                });
            }
        }
        for (i, &(_, k)) in pairs.iter().enumerate() {
            if k == 0 {
                return Err(WordError::Admissibility {
                    pos: i,
                    msg: format!("exponent of pair {} must be at least 1", i + 1),
                });
            }
        }
        if let Some(&(_, k)) = pairs.last() {
            if k < 2 {
                return Err(WordError::Admissibility {
                    pos: pairs.len() - 1,
                    msg: "last exponent must be >= 2".into(),
                });
            }
        }
        Ok(Word { pairs })
    }

    /// `z_1(k)`.
    pub fn single(k: u32) -> Result<Self, WordError> {
        Word::new(vec![(Cut::One, k)])
    }

    /// Build from the letter form; it must start with `x1` and end with `x0`.
    pub fn from_letters(letters: &[Letter]) -> Result<Self, WordError> {
        if letters.is_empty() {
            return Ok(Word::empty());
        }
        if letters[0] != Letter::X1 {
            return Err(WordError::Admissibility {
                pos: 0,
                msg: "word must begin with x1".into(),
            });
        }
        if letters.len() < 2 || *letters.last().unwrap() != Letter::X0 {
            return Err(WordError::Admissibility {
                pos: letters.len() - 1,
                msg: "word must end with x0".into(),
            });
        }
        let mut pairs: Vec<(Cut, u32)> = Vec::new();
        for &l in letters {
            match l {
                Letter::X1 => pairs.push((Cut::One, 1)),
                Letter::XHalf => pairs.push((Cut::Half, 1)),
                Letter::X0 => pairs.last_mut().expect("leading x1 checked").1 += 1,
            }
        }
        Word::new(pairs)
    }

    pub fn pairs(&self) -> &[(Cut, u32)] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of pairs `p`.
    pub fn depth(&self) -> usize {
        self.pairs.len()
    }

    /// Total `Σ k_i`, equal to the number of letters.
    pub fn weight(&self) -> u32 {
        self.pairs.iter().map(|&(_, k)| k).sum()
    }

    pub fn exponents(&self) -> impl Iterator<Item = u32> + '_ {
        self.pairs.iter().map(|&(_, k)| k)
    }

    /// The cut `c_i` separating index `i` from index `i+1` (1-based). By
    /// convention `c_p = ONE`.
    pub fn cut_after(&self, i: usize) -> Cut {
        assert!(i >= 1 && i <= self.depth(), "cut index out of range");
        if i == self.depth() {
            Cut::One
        } else {
            self.pairs[i].0
        }
    }

    pub fn letters(&self) -> Vec<Letter> {
        let mut out = Vec::with_capacity(self.weight() as usize);
        for &(c, k) in &self.pairs {
            out.push(c.letter());
            out.extend(std::iter::repeat_n(Letter::X0, k as usize - 1));
        }
        out
    }

    pub fn letter_string(&self) -> String {
        self.letters().into_iter().map(Letter::as_char).collect()
    }

    /// The word with exponents replaced by `k_i + inc_i`.
    pub fn with_increments(&self, inc: &[u32]) -> Word {
        debug_assert_eq!(inc.len(), self.depth());
        Word {
            pairs: self
                .pairs
                .iter()
                .zip(inc)
                .map(|(&(c, k), &d)| (c, k + d))
                .collect(),
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pairs.is_empty() {
            return Ok(());
        }
        for (i, &(c, k)) in self.pairs.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}:{}", c.text(), k)?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_word(s)
    }
}

impl Serialize for Word {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Word {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_word(&text).map_err(serde::de::Error::custom)
    }
}

/// Parse either the composition syntax `1:1,1/2:2` or the letter syntax
/// `1h0`. The empty string is the unit word.
pub fn parse_word(text: &str) -> Result<Word, WordError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        return Ok(Word::empty());
    }
    if trimmed.contains(':') {
        parse_composition(text)
    } else {
        parse_letters(text)
    }
}

fn parse_composition(text: &str) -> Result<Word, WordError> {
    let mut pairs = Vec::new();
    let mut offset = 0;
    for part in text.split(',') {
        let at = offset + (part.len() - part.trim_start().len());
        offset += part.len() + 1;
        let part = part.trim();
        let (cut, k) = part.split_once(':').ok_or_else(|| WordError::Syntax {
            pos: at,
            msg: format!("expected `cut:int`, found `{part}`"),
        })?;
        let cut = match cut.trim() {
            "1" => Cut::One,
            "1/2" => Cut::Half,
            other => {
                return Err(WordError::Syntax {
                    pos: at,
                    msg: format!("cut must be `1` or `1/2`, found `{other}`"),
                })
            }
        };
        let k_pos = at + part.find(':').unwrap() + 1;
        let k: u32 = k.trim().parse().map_err(|_| WordError::Syntax {
            pos: k_pos,
            msg: format!("expected a positive integer, found `{}`", k.trim()),
        })?;
        pairs.push((cut, k));
    }
    Word::new(pairs).map_err(|e| match e {
        WordError::Admissibility { pos, msg } => WordError::Admissibility {
            pos: char_offset_of_pair(text, pos),
            msg,
        },
        other => other,
    })
}

fn char_offset_of_pair(text: &str, pair: usize) -> usize {
    text.split(',')
        .take(pair)
        .map(|p| p.len() + 1)
        .sum::<usize>()
}

fn parse_letters(text: &str) -> Result<Word, WordError> {
    let text = text.trim();
    let mut letters = Vec::with_capacity(text.len());
    for (pos, ch) in text.char_indices() {
        letters.push(match ch {
            '0' => Letter::X0,
            'h' => Letter::XHalf,
            '1' => Letter::X1,
            other => {
                return Err(WordError::Syntax {
                    pos,
                    msg: format!("unexpected letter `{other}` (expected 0, h or 1)"),
                })
            }
        });
    }
    Word::from_letters(&letters)
}

/// The dual map τ: keep the outer `x1 ... x0`, reverse the middle letters and
/// replace each `x_e` by `x_(1-e)`.
pub fn dual(w: &Word) -> Word {
    if w.is_empty() {
        return Word::empty();
    }
    let letters = w.letters();
    let n = letters.len();
    let mut out = Vec::with_capacity(n);
    out.push(Letter::X1);
    out.extend(letters[1..n - 1].iter().rev().map(|l| l.complement()));
    out.push(Letter::X0);
    Word::from_letters(&out).expect("dual of an admissible word is admissible")
}

/// Sequence of non-negative integers attached to the indices of a word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct RVector(pub Vec<u32>);

impl RVector {
    pub fn zeros(len: usize) -> Self {
        RVector(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl FromStr for RVector {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim().is_empty() {
            return Ok(RVector::default());
        }
        s.split(',')
            .map(|t| t.trim().parse())
            .collect::<Result<Vec<_>, _>>()
            .map(RVector)
    }
}

/// Finite ℚ-linear combination of words. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinComb {
    terms: BTreeMap<Word, BigRational>,
}

impl LinComb {
    pub fn new() -> Self {
        LinComb::default()
    }

    pub fn from_word(w: Word) -> Self {
        let mut out = LinComb::new();
        out.add_term(w, BigRational::one());
        out
    }

    pub fn add_term(&mut self, w: Word, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(w);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_int(&mut self, w: Word, coeff: impl Into<BigInt>) {
        self.add_term(w, BigRational::from_integer(coeff.into()));
    }

    pub fn add_assign(&mut self, other: &LinComb) {
        for (w, c) in &other.terms {
            self.add_term(w.clone(), c.clone());
        }
    }

    pub fn scaled(&self, s: &BigRational) -> LinComb {
        let mut out = LinComb::new();
        for (w, c) in &self.terms {
            out.add_term(w.clone(), c * s);
        }
        out
    }

    /// Apply a linear map given on basis words.
    pub fn map_linear(&self, f: impl Fn(&Word) -> LinComb) -> LinComb {
        let mut out = LinComb::new();
        for (w, c) in &self.terms {
            out.add_assign(&f(w).scaled(c));
        }
        out
    }

    pub fn dual(&self) -> LinComb {
        self.map_linear(|w| LinComb::from_word(dual(w)))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, w: &Word) -> BigRational {
        self.terms.get(w).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Terms in canonical (lexicographic composition) order.
    pub fn iter(&self) -> impl Iterator<Item = (&Word, &BigRational)> {
        self.terms.iter()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("LinComb serializes")
    }
}

impl fmt::Display for LinComb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (w, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            } else if c.is_negative() {
                f.write_str("-")?;
            }
            let w_text = if w.is_empty() { "1".to_string() } else { format!("[{w}]") };
            write!(f, "{}*{}", c.abs(), w_text)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct JsonTerm {
    coeff_num: serde_json::Value,
    coeff_den: serde_json::Value,
    word: Word,
}

fn bigint_to_json(n: &BigInt) -> serde_json::Value {
    match n.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(n.to_string()),
    }
}

fn bigint_from_json(v: &serde_json::Value) -> Result<BigInt, String> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .ok_or_else(|| format!("coefficient {n} is not an integer")),
        serde_json::Value::String(s) => s.parse().map_err(|_| format!("bad integer `{s}`")),
        other => Err(format!("expected integer, found {other}")),
    }
}

impl Serialize for LinComb {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for (w, c) in &self.terms {
            seq.serialize_element(&JsonTerm {
                coeff_num: bigint_to_json(c.numer()),
                coeff_den: bigint_to_json(c.denom()),
                word: w.clone(),
            })?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for LinComb {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<JsonTerm>::deserialize(d)?;
        let mut out = LinComb::new();
        for t in raw {
            let num = bigint_from_json(&t.coeff_num).map_err(serde::de::Error::custom)?;
            let den = bigint_from_json(&t.coeff_den).map_err(serde::de::Error::custom)?;
            if den.is_zero() {
                return Err(serde::de::Error::custom("zero denominator"));
            }
            out.add_term(t.word, BigRational::new(num, den));
        }
        Ok(out)
    }
}

/// All weak compositions of `total` into `parts` non-negative parts, in
/// lexicographic order.
pub fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if parts == 0 {
        if total == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    let mut cur = vec![0u32; parts];
    fill(total, 0, &mut cur, &mut out);
    out
}

fn fill(rest: u32, idx: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if idx + 1 == cur.len() {
        cur[idx] = rest;
        out.push(cur.clone());
        return;
    }
    for v in 0..=rest {
        cur[idx] = v;
        fill(rest - v, idx + 1, cur, out);
    }
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

fn unit_or_zero(r: u32) -> LinComb {
    if r == 0 {
        LinComb::from_word(Word::empty())
    } else {
        LinComb::new()
    }
}

fn sigma_binomial(w: &Word, r: u32, last_shift: u32) -> LinComb {
    if w.is_empty() {
        return unit_or_zero(r);
    }
    let p = w.depth();
    let mut out = LinComb::new();
    for inc in compositions(r, p) {
        let mut coeff = BigInt::one();
        for (i, (&(_, k), &ri)) in w.pairs().iter().zip(&inc).enumerate() {
            let top = if i + 1 == p { k + ri - last_shift } else { k + ri - 1 };
            coeff *= binomial(top, ri);
        }
        out.add_int(w.with_increments(&inc), coeff);
    }
    out
}

/// `σ_r^{b,1}`: binomial weights `C(k_i+r_i-1, r_i)` for `i < p` and
/// `C(k_p+r_p-2, r_p)` at the last position.
pub fn sigma_b1(w: &Word, r: u32) -> LinComb {
    sigma_binomial(w, r, 2)
}

/// `σ_r^{b,2}`: binomial weights `C(k_i+r_i-1, r_i)` at every position.
pub fn sigma_b2(w: &Word, r: u32) -> LinComb {
    sigma_binomial(w, r, 1)
}

/// `σ_r^ε`: unit-coefficient sum over increments placed on positions `i < p`
/// with `c_i = ONE` and on the last position. Positions followed by a `HALF`
/// cut never receive increments.
pub fn sigma_eps(w: &Word, r: u32) -> LinComb {
    if w.is_empty() {
        return unit_or_zero(r);
    }
    let p = w.depth();
    let effective: Vec<usize> = (0..p)
        .filter(|&i| i + 1 == p || w.cut_after(i + 1) == Cut::One)
        .collect();
    let mut out = LinComb::new();
    for part in compositions(r, effective.len()) {
        let mut inc = vec![0u32; p];
        for (&pos, &v) in effective.iter().zip(&part) {
            inc[pos] = v;
        }
        out.add_int(w.with_increments(&inc), 1);
    }
    out
}

/// Number of `y`-slots at each position of `w`: `k_i - ε(c_i)` for `i < p`
/// and `k_p - 2` at the last position.
pub fn y_slots(w: &Word) -> Vec<u32> {
    let p = w.depth();
    w.pairs()
        .iter()
        .enumerate()
        .map(|(i, &(_, k))| {
            if i + 1 == p {
                k - 2
            } else {
                k - w.cut_after(i + 1).epsilon()
            }
        })
        .collect()
}

/// Ways to write `total` as an ordered sum of `slots` non-negative integers.
fn slot_multiplicity(total: u32, slots: u32) -> BigInt {
    match slots {
        0 if total == 0 => BigInt::one(),
        0 => BigInt::zero(),
        s => binomial(total + s - 1, s - 1),
    }
}

/// The monomials `v_y` over all `y`-assignments of total `l`, each distinct
/// monomial carrying the number of assignments producing it.
pub fn v_y_monomials(w: &Word, l: u32) -> LinComb {
    if w.is_empty() {
        return unit_or_zero(l);
    }
    let slots = y_slots(w);
    let mut out = LinComb::new();
    for agg in compositions(l, w.depth()) {
        let mult: BigInt = agg
            .iter()
            .zip(&slots)
            .map(|(&y, &s)| slot_multiplicity(y, s))
            .product();
        if !mult.is_zero() {
            out.add_int(w.with_increments(&agg), mult);
        }
    }
    out
}

/// The monomial `x1 x0^(k'_1-1) Π_{i>=2} x_(c'_(i-1)) x1^(l_(i-1)) x0^(k'_i-1)`
/// built on the dual of `w`.
pub fn v_prime(w: &Word, ls: &[u32]) -> Word {
    let d = dual(w);
    debug_assert_eq!(ls.len() + 1, d.depth());
    let mut letters = Vec::new();
    for (i, &(c, k)) in d.pairs().iter().enumerate() {
        letters.push(c.letter());
        if i > 0 {
            letters.extend(std::iter::repeat_n(Letter::X1, ls[i - 1] as usize));
        }
        letters.extend(std::iter::repeat_n(Letter::X0, k as usize - 1));
    }
    Word::from_letters(&letters).expect("v' is admissible")
}

/// Sum of `v'_{(l_i)}` over `l_1 + ... + l_(q-1) = l`, with multiplicity.
pub fn v_prime_monomials(w: &Word, l: u32) -> LinComb {
    if w.is_empty() {
        return unit_or_zero(l);
    }
    let q = dual(w).depth();
    let mut out = LinComb::new();
    for ls in compositions(l, q - 1) {
        out.add_int(v_prime(w, &ls), 1);
    }
    out
}

/// Every admissible word of exactly the given weight, in lexicographic
/// letter order (`0 < h < 1`). Weight 0 yields the empty word.
pub fn words_of_weight(weight: u32) -> Vec<Word> {
    match weight {
        0 => return vec![Word::empty()],
        1 => return Vec::new(),
        _ => {}
    }
    let middle = (weight - 2) as usize;
    let alphabet = [Letter::X0, Letter::XHalf, Letter::X1];
    let total = 3usize.pow(middle as u32);
    let mut out = Vec::with_capacity(total);
    let mut letters = vec![Letter::X1; middle + 2];
    *letters.last_mut().unwrap() = Letter::X0;
    for mut code in 0..total {
        for slot in (1..=middle).rev() {
            letters[slot] = alphabet[code % 3];
            code /= 3;
        }
        out.push(Word::from_letters(&letters).expect("enumerated word is admissible"));
    }
    out
}

/// All admissible non-empty words with weight `<= weight_max` and depth
/// `<= depth_max`, ordered by weight then letter order.
pub fn word_universe(weight_max: u32, depth_max: usize) -> Vec<Word> {
    (2..=weight_max)
        .flat_map(words_of_weight)
        .filter(|w| w.depth() <= depth_max)
        .collect()
}
