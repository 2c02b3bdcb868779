//! Exhaustive and property-based checks of the word algebra: the dual map,
//! the σ-operators' weight and coefficient bookkeeping, the `y`-slot
//! monomials and the word universe.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use pmzv::words::{binomial, v_prime_monomials, v_y_monomials, word_universe, words_of_weight, Cut, Letter};
use pmzv::{dual, parse_word, sigma_b1, sigma_b2, sigma_eps, BigRational, LinComb, Word};
use proptest::prelude::*;

fn coefficient_total(l: &LinComb) -> BigRational {
    l.iter().fold(BigRational::zero(), |acc, (_, c)| acc + c)
}

fn int(n: BigInt) -> BigRational {
    BigRational::from_integer(n)
}

fn cuts(w: &Word) -> Vec<Cut> {
    w.pairs().iter().map(|&(c, _)| c).collect()
}

/// Admissible words of weight `total` counted through their z-notation:
/// compositions `(k_1, ..., k_p)` with `k_p ≥ 2`, and a free cut at every
/// position after the first.
fn count_recursive(total: u32) -> u64 {
    fn go(remaining: u32, first: bool) -> u64 {
        let cut_choices = if first { 1 } else { 2 };
        let mut n = 0;
        for k in 1..=remaining {
            if k == remaining {
                if k >= 2 {
                    n += cut_choices;
                }
            } else {
                n += cut_choices * go(remaining - k, false);
            }
        }
        n
    }
    if total < 2 {
        0
    } else {
        go(total, true)
    }
}

#[test]
fn dual_is_a_weight_preserving_involution_to_weight_10() {
    let mut count = 0usize;
    for weight in 2..=10 {
        for w in words_of_weight(weight) {
            let d = dual(&w);
            assert_eq!(d.weight(), weight, "{w}");
            assert_eq!(dual(&d), w);
            count += 1;
        }
    }
    assert_eq!(count, (0..=8).map(|e| 3usize.pow(e)).sum::<usize>());
}

#[test]
fn word_universe_counts() {
    for weight in 2..=8 {
        let n = words_of_weight(weight).len() as u64;
        assert_eq!(n, count_recursive(weight), "weight {weight}");
        assert_eq!(n, 3u64.pow(weight - 2));
    }
    assert_eq!(word_universe(2, 16).len(), 1);
    assert_eq!(word_universe(5, 16).len(), 1 + 3 + 9 + 27);
    assert!(word_universe(6, 2).iter().all(|w| w.depth() <= 2));
}

#[test]
fn sigma_bookkeeping_to_weight_8() {
    for weight in 2..=8 {
        for w in words_of_weight(weight) {
            let effective = (0..w.depth())
                .filter(|&i| i + 1 == w.depth() || w.cut_after(i + 1) == Cut::One)
                .count() as u32;
            for r in 0..=4 {
                for (l, label) in [(sigma_b1(&w, r), "b1"), (sigma_b2(&w, r), "b2"), (sigma_eps(&w, r), "eps")] {
                    for (term, c) in l.iter() {
                        assert_eq!(term.weight(), weight + r, "{label} {w} r={r}");
                        assert_eq!(cuts(term), cuts(&w), "{label} {w} r={r}");
                        assert!(c > &BigRational::zero());
                    }
                }
                // Generating functions: Π (1-x)^{-k_i} = (1-x)^{-W}, with
                // the last factor lowered by one for σ^{b,1}.
                assert_eq!(coefficient_total(&sigma_b2(&w, r)), int(binomial(weight + r - 1, r)), "{w} r={r}");
                assert_eq!(coefficient_total(&sigma_b1(&w, r)), int(binomial(weight + r - 2, r)), "{w} r={r}");
                assert_eq!(
                    coefficient_total(&sigma_eps(&w, r)),
                    int(binomial(r + effective - 1, effective - 1)),
                    "{w} r={r}"
                );
                assert!(sigma_eps(&w, r).iter().all(|(_, c)| c.is_one()));
            }
        }
    }
}

#[test]
fn dual_y_monomials_equal_primed_monomials() {
    for w in word_universe(6, 16) {
        for l in 0..=3 {
            assert_eq!(v_y_monomials(&w, l).dual(), v_prime_monomials(&w, l), "{w} l={l}");
        }
    }
}

#[test]
fn sigma_at_zero_is_identity() {
    for w in word_universe(6, 16) {
        let id = LinComb::from_word(w.clone());
        assert_eq!(sigma_b1(&w, 0), id);
        assert_eq!(sigma_b2(&w, 0), id);
        assert_eq!(sigma_eps(&w, 0), id);
        assert_eq!(v_y_monomials(&w, 0), id);
    }
}

#[test]
fn named_operator_values() {
    let w = |s: &str| parse_word(s).unwrap();
    assert_eq!(dual(&w("10")), w("10"));
    assert_eq!(dual(&w("100")), w("110"));
    assert_eq!(dual(&w("1h0")), w("1h0"));
    assert_eq!(sigma_b1(&w("1:2"), 1).to_string(), "1*[1:3]");
    assert_eq!(sigma_b1(&w("1:1,1:2"), 1).to_string(), "1*[1:1,1:3] + 1*[1:2,1:2]");
    assert_eq!(sigma_b2(&w("1:2"), 1).to_string(), "2*[1:3]");
    assert_eq!(sigma_b2(&w("1:1,1:2"), 1).to_string(), "2*[1:1,1:3] + 1*[1:2,1:2]");
    assert_eq!(sigma_eps(&w("1:3"), 1).to_string(), "1*[1:4]");
    assert_eq!(sigma_eps(&w("1:1,1/2:2"), 2).to_string(), "1*[1:1,1/2:4]");
    assert_eq!(v_y_monomials(&w("1:3"), 1).to_string(), "1*[1:4]");
    assert!(v_y_monomials(&w("1:2"), 1).is_empty());
}

fn arb_word() -> impl Strategy<Value = Word> {
    prop::collection::vec(prop_oneof![Just(Letter::X0), Just(Letter::XHalf), Just(Letter::X1)], 0..14).prop_map(
        |middle| {
            let mut letters = vec![Letter::X1];
            letters.extend(middle);
            letters.push(Letter::X0);
            Word::from_letters(&letters).unwrap()
        },
    )
}

proptest! {
    #[test]
    fn dual_involution(w in arb_word()) {
        let d = dual(&w);
        prop_assert_eq!(d.weight(), w.weight());
        prop_assert_eq!(dual(&d), w);
    }

    #[test]
    fn text_forms_round_trip(w in arb_word()) {
        prop_assert_eq!(parse_word(&w.to_string()).unwrap(), w.clone());
        prop_assert_eq!(parse_word(&w.letter_string()).unwrap(), w.clone());
        let json = serde_json::to_string(&w).unwrap();
        prop_assert_eq!(serde_json::from_str::<Word>(&json).unwrap(), w);
    }

    #[test]
    fn dual_commutes_with_linear_combination(a in arb_word(), b in arb_word(), r in 0u32..3) {
        let mut l = sigma_b1(&a, r);
        l.add_assign(&sigma_eps(&b, r));
        let mut expect = sigma_b1(&a, r).dual();
        expect.add_assign(&sigma_eps(&b, r).dual());
        prop_assert_eq!(l.dual(), expect);
        let json = serde_json::to_value(&l).unwrap();
        prop_assert_eq!(serde_json::from_value::<LinComb>(json).unwrap(), l);
    }

    #[test]
    fn sigma_weights(w in arb_word(), r in 0u32..5) {
        for l in [sigma_b1(&w, r), sigma_b2(&w, r), sigma_eps(&w, r)] {
            for (term, _) in l.iter() {
                prop_assert_eq!(term.weight(), w.weight() + r);
                prop_assert_eq!(term.depth(), w.depth());
            }
        }
    }
}
