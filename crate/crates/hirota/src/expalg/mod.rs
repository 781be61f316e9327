//! Exact algebra of exponential sums and Hirota bilinear operators.

mod expsum;
mod operator;
mod scalar;
mod series;

pub use expsum::{eval_at, partial, ExpSum, ExpTerm, LinForm, Point, Var};
pub use operator::{hirota_apply, HirotaMonomial, HirotaOperator, Shift};
pub use scalar::{Ctx, Quad, Scalar, DEFAULT_RADICAND};
pub use series::{ratio_jet, Orders, Series};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgError {
    #[error("scalar contexts differ: {0:?} vs {1:?}")]
    ContextMismatch(Ctx, Ctx),
    #[error("division by zero")]
    DivisionByZero,
    #[error("radicand {0} is not a squarefree integer other than 0 and 1")]
    BadRadicand(i64),
    #[error("lattice multiplier must be nonzero")]
    ZeroMultiplier,
    #[error("exact zero test requested on the float backend")]
    FloatBackend,
    #[error("floating overflow while evaluating at {0}")]
    Overflow(String),
    #[error("denominator vanishes at {0}")]
    Singular(String),
}
