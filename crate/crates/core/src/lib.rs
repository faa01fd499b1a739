//! Stochastic and batch ADMM for graph-guided regularized empirical risk
//! minimization:
//!
//! ```text
//! min_x  (1/n) Σᵢ fᵢ(x) + h(Ax)      written as   min f(x) + h(y)  s.t.  Ax − y = 0
//! ```
//!
//! The crate provides sparse linear algebra and spectral estimates
//! ([`linalg`]), the smooth losses ([`losses`]), the variance-reduced
//! gradient estimator ([`vr`]), the `y`-proximal step ([`prox`]), the
//! solvers and their parameter formulas ([`solvers`]), convergence metrics
//! ([`metrics`]), and, behind the default `harness` feature, data loading and
//! experiment orchestration ([`harness`]).

// Negated comparisons below are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod losses;
pub mod metrics;
pub mod prox;
pub mod solvers;
pub mod vr;

#[cfg(feature = "harness")]
pub mod harness;

pub use error::{Error, Result};
