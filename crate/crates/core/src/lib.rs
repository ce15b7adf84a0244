//! Learning linear-program objectives from observed optimal solutions.
//!
//! The library centers on a margin formulation of the LP optimality
//! condition: given training tuples `(x*, A, b, z)` where `x*` solves
//! `min cᵀx s.t. Ax = b, x ≥ 0` for an *unobserved* cost vector `c`,
//! fit a linear map `z ↦ Θz` whose predicted costs make each observed
//! optimal basis win by a margin in reduced-cost space. Because only
//! the optimal solutions enter the loss, the estimator is invariant to
//! positive rescaling of the underlying costs.
//!
//! Modules:
//! * [`lp`] – standard-form LPs, a revised simplex solver with explicit
//!   basis tracking, reduced costs, and a brute-force enumeration oracle.
//! * [`margin`] – training samples, the margin-violation loss, its
//!   subgradient, and the evaluation losses.
//! * [`mom`] – the offline max-optimality-margin estimator.
//! * [`online`] – online learners: projected subgradient, an
//!   optimality-driven perceptron, follow-the-regularized-leader, and a
//!   naive suboptimality-descent diagnostic.
//! * [`features`] – kernelized covariates.
//! * [`baselines`] – OLS / ridge / SPO+ comparison learners that consume
//!   observed cost vectors.
//! * [`datagen`] – shortest-path and fractional-knapsack benchmark
//!   generators with seeded, stream-split randomness.
//! * [`harness`] – experiment orchestration, tuning, and CSV/JSON-lines
//!   emission.
//! * [`selftest`] – the acceptance suite exposed to the CLI.

pub mod baselines;
pub mod datagen;
pub mod error;
pub mod features;
pub mod harness;
pub mod lp;
pub mod margin;
pub mod mom;
pub mod numdiff;
pub mod online;
pub mod selftest;

pub use error::{Error, Result};

/// Dense column-major matrix of `f64`, the working type throughout.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense vector of `f64`.
pub type Vector = nalgebra::DVector<f64>;
