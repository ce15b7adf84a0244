//! Crate-wide error type.

use std::fmt;

/// Errors surfaced by solvers, losses, generators and the harness.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// The constraint system has no nonnegative solution.
    Infeasible,
    /// The objective is unbounded below on the feasible region.
    Unbounded,
    /// A nondegeneracy requirement failed (rank-deficient rows, basis
    /// support smaller than `m`, singular basis submatrix, ...).
    Degenerate(String),
    /// Inconsistent dimensions between inputs.
    Dimension(String),
    /// An evaluation metric hit a zero denominator; the sample should be
    /// skipped and counted rather than treated as a number.
    DegenerateEvaluation(String),
    /// The pivot budget was exhausted before reaching optimality.
    PivotLimit(usize),
    /// Invalid configuration value.
    Config(String),
    /// File I/O failure, with path context.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Infeasible => write!(f, "problem is infeasible"),
            Error::Unbounded => write!(f, "problem is unbounded"),
            Error::Degenerate(detail) => write!(f, "degenerate problem: {detail}"),
            Error::Dimension(detail) => write!(f, "dimension mismatch: {detail}"),
            Error::DegenerateEvaluation(detail) => {
                write!(f, "degenerate evaluation sample: {detail}")
            }
            Error::PivotLimit(n) => write!(f, "pivot limit of {n} exhausted"),
            Error::Config(detail) => write!(f, "invalid configuration: {detail}"),
            Error::Io(detail) => write!(f, "io error: {detail}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
