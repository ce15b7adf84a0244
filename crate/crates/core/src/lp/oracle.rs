//! Brute-force basis enumeration, used as an independent reference for
//! the simplex solver in tests and the acceptance suite.

use super::{gather, gather_columns, Basis, LpSolution, StandardFormLp};
use crate::error::{Error, Result};
use crate::Vector;
use itertools::Itertools;

/// Hard cap on problem size: `C(n, m)` bases are enumerated.
const MAX_VARS: usize = 10;

/// A feasible basis together with its basic solution and objective.
#[derive(Debug, Clone)]
pub struct FeasibleBasis {
    pub basis: Basis,
    pub x: Vector,
    pub objective: f64,
}

/// Enumerates every feasible basis of the LP (requires `n ≤ 10`).
pub fn enumerate_feasible_bases(lp: &StandardFormLp, tol: f64) -> Result<Vec<FeasibleBasis>> {
    let (m, n) = lp.a().shape();
    if n > MAX_VARS {
        return Err(Error::Config(format!(
            "basis enumeration is limited to n ≤ {MAX_VARS}, got {n}"
        )));
    }
    let mut out = Vec::new();
    for combo in (0..n).combinations(m) {
        let a_b = gather_columns(lp.a(), &combo);
        let Some(x_b) = a_b.clone().lu().solve(lp.b()) else {
            continue;
        };
        // Reject near-singular submatrices that LU let through.
        if (&a_b * &x_b - lp.b()).amax() > 1e-8 * (1.0 + lp.b().amax()) {
            continue;
        }
        if x_b.iter().any(|&v| v < -tol) {
            continue;
        }
        let mut x = Vector::zeros(n);
        for (row, &i) in combo.iter().enumerate() {
            x[i] = x_b[row];
        }
        let objective = gather(lp.c(), &combo).dot(&x_b);
        out.push(FeasibleBasis {
            basis: Basis::new(combo, n)?,
            x,
            objective,
        });
    }
    Ok(out)
}

/// Returns the minimum-objective basic feasible solution by exhaustive
/// enumeration. Ties resolve to the lexicographically smallest basis,
/// making the result deterministic.
pub fn vertex_enumeration_oracle(lp: &StandardFormLp, tol: f64) -> Result<LpSolution> {
    let bases = enumerate_feasible_bases(lp, tol)?;
    let best = bases
        .into_iter()
        .min_by(|a, b| {
            a.objective
                .partial_cmp(&b.objective)
                .unwrap()
                .then_with(|| a.basis.indices().cmp(b.basis.indices()))
        })
        .ok_or(Error::Infeasible)?;
    LpSolution::from_basis(lp, best.basis)
}
