//! Two-phase revised simplex with Bland's anti-cycling rule.
//!
//! The basis inverse is refactorized densely at every pivot; at the
//! problem sizes this crate targets (m up to a few dozen) that is far
//! cheaper than maintaining product-form updates and it keeps the
//! numerics transparent.

use super::{gather_columns, Basis, LpSolution, Perturb, SolverOptions, StandardFormLp};
use crate::error::{Error, Result};
use crate::{Matrix, Vector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Solves the LP, returning an optimal solution with an explicit basis
/// certificate (reduced costs on the complement are `≥ −tol`).
///
/// Errors: `Infeasible` when the phase-1 optimum stays positive,
/// `Unbounded` when an entering column has no blocking row,
/// `Degenerate` when `A` is rank-deficient or (with perturbation off)
/// the optimal support has fewer than `m` positive components.
pub fn solve_lp(lp: &StandardFormLp, opts: &SolverOptions) -> Result<LpSolution> {
    let solution = solve_inner(lp, opts)?;
    let support = solution.x().iter().filter(|&&v| v > opts.tol).count();
    if support == lp.num_constraints() {
        return Ok(solution);
    }
    match opts.perturb {
        Perturb::Off => Err(Error::Degenerate(format!(
            "optimal support has {support} components, expected {}",
            lp.num_constraints()
        ))),
        Perturb::On { eps, seed } => {
            // Noise on b breaks primal ties; the basis chosen for the
            // perturbed problem stays optimal for the original one
            // because reduced costs do not involve b.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = Vector::from_fn(lp.num_constraints(), |i, _| {
                lp.b()[i] + rng.random_range(0.0..eps)
            });
            let perturbed = lp.with_rhs(b)?;
            let shifted = solve_inner(&perturbed, opts)?;
            let solution = LpSolution::from_basis(lp, shifted.basis().clone())?;
            let worst = solution.x().iter().cloned().fold(0.0_f64, f64::min);
            if worst < -1e3 * eps.max(opts.tol) {
                return Err(Error::Degenerate(format!(
                    "perturbed basis infeasible for original rhs (min component {worst})"
                )));
            }
            Ok(solution)
        }
    }
}

fn solve_inner(lp: &StandardFormLp, opts: &SolverOptions) -> Result<LpSolution> {
    let basis = two_phase_basis(lp, opts)?;
    LpSolution::from_basis(lp, basis)
}

fn two_phase_basis(lp: &StandardFormLp, opts: &SolverOptions) -> Result<Basis> {
    let m = lp.num_constraints();
    let n = lp.num_vars();
    let budget = opts.pivot_budget(m, n);

    // Phase 1: rows flipped so b ≥ 0, one artificial column per row.
    let mut a1 = Matrix::zeros(m, n + m);
    let mut b1 = Vector::zeros(m);
    for i in 0..m {
        let sign = if lp.b()[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            a1[(i, j)] = sign * lp.a()[(i, j)];
        }
        a1[(i, n + i)] = 1.0;
        b1[i] = sign * lp.b()[i];
    }
    let mut c1 = Vector::zeros(n + m);
    for i in 0..m {
        c1[n + i] = 1.0;
    }

    let mut basis: Vec<usize> = (n..n + m).collect();
    let outcome = pivot_until_optimal(&a1, &b1, &c1, &mut basis, opts.tol, budget)?;
    if let PhaseOutcome::Unbounded = outcome {
        return Err(Error::Degenerate(
            "auxiliary problem reported unbounded".into(),
        ));
    }
    let phase1_obj = phase_objective(&a1, &b1, &c1, &basis)?;
    if phase1_obj > opts.tol.max(1e-7) {
        return Err(Error::Infeasible);
    }
    drive_out_artificials(&a1, &mut basis, n, opts.tol)?;

    // Phase 2 runs on the original columns only.
    let mut real_basis = basis;
    debug_assert!(real_basis.iter().all(|&j| j < n));
    let outcome = pivot_until_optimal(lp.a(), lp.b(), lp.c(), &mut real_basis, opts.tol, budget)?;
    if let PhaseOutcome::Unbounded = outcome {
        return Err(Error::Unbounded);
    }
    Basis::new(real_basis, n)
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

fn phase_objective(a: &Matrix, b: &Vector, c: &Vector, basis: &[usize]) -> Result<f64> {
    let a_b = gather_columns(a, basis);
    let x_b = a_b
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Degenerate("singular basis submatrix".into()))?;
    Ok(basis.iter().enumerate().map(|(i, &j)| c[j] * x_b[i]).sum())
}

/// Bland's rule: enter the smallest-index column with negative reduced
/// cost; leave by the smallest basic variable index among the minimum
/// ratios. Terminates without cycling.
fn pivot_until_optimal(
    a: &Matrix,
    b: &Vector,
    c: &Vector,
    basis: &mut Vec<usize>,
    tol: f64,
    budget: usize,
) -> Result<PhaseOutcome> {
    let n = a.ncols();
    let mut in_basis = vec![false; n];
    for &j in basis.iter() {
        in_basis[j] = true;
    }

    for _pivot in 0..budget {
        let a_b = gather_columns(a, basis);
        let lu = a_b.clone().lu();
        let x_b = lu
            .solve(b)
            .ok_or_else(|| Error::Degenerate("singular basis submatrix".into()))?;
        let c_b = Vector::from_fn(basis.len(), |i, _| c[basis[i]]);
        let y = a_b
            .transpose()
            .lu()
            .solve(&c_b)
            .ok_or_else(|| Error::Degenerate("singular basis submatrix".into()))?;

        let mut entering = None;
        for j in 0..n {
            if in_basis[j] {
                continue;
            }
            let r_j = c[j] - y.dot(&a.column(j).into_owned());
            if r_j < -tol {
                entering = Some(j);
                break;
            }
        }
        let Some(entering) = entering else {
            return Ok(PhaseOutcome::Optimal);
        };

        let direction = lu
            .solve(&a.column(entering).into_owned())
            .ok_or_else(|| Error::Degenerate("singular basis submatrix".into()))?;
        let mut leaving: Option<(usize, f64)> = None;
        for i in 0..basis.len() {
            if direction[i] <= tol {
                continue;
            }
            let ratio = x_b[i].max(0.0) / direction[i];
            match leaving {
                None => leaving = Some((i, ratio)),
                Some((best_row, best)) => {
                    let tie = (ratio - best).abs() <= tol * (1.0 + best.abs());
                    if ratio < best - tol * (1.0 + best.abs())
                        || (tie && basis[i] < basis[best_row])
                    {
                        leaving = Some((i, ratio.min(best)));
                    }
                }
            }
        }
        let Some((row, _)) = leaving else {
            return Ok(PhaseOutcome::Unbounded);
        };
        in_basis[basis[row]] = false;
        in_basis[entering] = true;
        basis[row] = entering;
    }
    Err(Error::PivotLimit(budget))
}

/// Swaps any artificial columns still in the phase-1 basis for real
/// ones. A row with no eligible real column means `A` is rank-deficient,
/// which this solver rejects rather than repairs.
fn drive_out_artificials(a1: &Matrix, basis: &mut [usize], n: usize, tol: f64) -> Result<()> {
    loop {
        let Some(row) = (0..basis.len()).find(|&i| basis[i] >= n) else {
            return Ok(());
        };
        let a_b = gather_columns(a1, basis);
        let inv = a_b
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("singular basis submatrix".into()))?;
        let mut replaced = false;
        for j in 0..n {
            if basis.contains(&j) {
                continue;
            }
            let col = inv.row(row) * gather_columns(a1, &[j]);
            if col[(0, 0)].abs() > tol.max(1e-7) {
                basis[row] = j;
                replaced = true;
                break;
            }
        }
        if !replaced {
            return Err(Error::Degenerate(
                "constraint matrix is rank-deficient".into(),
            ));
        }
    }
}
