use thiserror::Error;

use crate::nested_sum::Evaluation;

/// Failure to build an admissible word from text or pairs.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("inadmissible word at position {pos}: {msg}")]
    Admissibility { pos: usize, msg: String },
}

/// Failure of a numerical evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("series does not converge: {0}")]
    NonConvergent(String),
    #[error("tolerance not reached at N = {}; best value {} (estimated error {:.3e})", best.n_used, best.value, best.err_estimate)]
    ToleranceNotReached { best: Evaluation },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("r-vector has length {got}, word has depth {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl EvalError {
    /// The best available estimate, when the error carries one.
    pub fn best(&self) -> Option<&Evaluation> {
        match self {
            EvalError::ToleranceNotReached { best } => Some(best),
            _ => None,
        }
    }
}
