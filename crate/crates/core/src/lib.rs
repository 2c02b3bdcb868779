//! Word algebra, parametrized multiple series and identity verification for
//! extended multiple zeta values and multiple Hurwitz zeta values.
//!
//! * [`words`]: admissible words, the dual map τ, the σ-operators and exact
//!   rational linear combinations.
//! * [`nested_sum`]: the numerical kernel for nested series with strict or
//!   weak index links, Pochhammer prefactors and tail extrapolation.
//! * [`evaluators`]: the series families `Z`, `Z*`, `ζ`, `H*`.
//! * [`verifier`]: numerical certification of the duality and derivative
//!   identities.

pub mod error;
pub mod evaluators;
pub mod nested_sum;
pub mod verifier;
pub mod words;

pub use error::{EvalError, WordError};
pub use evaluators::{
    eval_hstar, eval_hurwitz, eval_lincomb, eval_z, eval_zstar, format_complex, parse_complex, Family, Params,
};
pub use nested_sum::{
    evaluate, pochhammer_log, tail_extrapolate, EvalConfig, Evaluation, IndexLink, IndexWeight, NestedSumSpec,
    Prefactor,
};
pub use num_complex::Complex64;
pub use num_rational::BigRational;
pub use verifier::{IdentityCheck, Suite, SuiteConfig, VerificationReport};
pub use words::{dual, parse_word, sigma_b1, sigma_b2, sigma_eps, Cut, LinComb, RVector, Word};
