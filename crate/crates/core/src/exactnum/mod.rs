//! Exact scalars: rationals, rational intervals, polynomials and real
//! algebraic numbers. Every comparison elsewhere in the crate is decided here.

mod algebraic;
mod interval;
mod poly;
mod rational;

pub use algebraic::{root_isolate, AlgebraicReal};
pub use interval::{default_denom_bound, ival, IntervalOp, RatInterval};
pub use poly::Poly;
pub use rational::{rat, Rational};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumError {
    #[error("division by zero")]
    DivByZero,
    #[error("division by an interval containing zero")]
    DivByZeroInterval,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("empty interval [{lo}, {hi}]")]
    EmptyInterval { lo: String, hi: String },
    #[error("cannot parse {0:?} as a rational")]
    Parse(String),
    #[error("malformed polynomial: {0}")]
    MalformedPolynomial(String),
    #[error("interval does not isolate a single root: {0}")]
    NotIsolating(String),
}
