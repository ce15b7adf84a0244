//! Standard-form linear programs and their optimality machinery.
//!
//! An LP here is always `min cᵀx s.t. Ax = b, x ≥ 0` with `A` of full
//! row rank. Solutions carry an explicit basis `B` (m column indices),
//! its complement `N`, the basis inverse `A_B⁻¹` and the dual price
//! `(A_B⁻¹)ᵀ c_B`. A basis is optimal exactly when the reduced costs on
//! `N` are nonnegative, which is the hinge that the rest of the crate
//! builds on.

mod oracle;
mod simplex;

pub use oracle::{enumerate_feasible_bases, vertex_enumeration_oracle, FeasibleBasis};
pub use simplex::solve_lp;

use crate::error::{Error, Result};
use crate::{Matrix, Vector};
use serde::{Deserialize, Serialize};

/// Default zero tolerance for feasibility, positivity and optimality tests.
pub const DEFAULT_TOL: f64 = 1e-9;

/// `min cᵀx s.t. Ax = b, x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardFormLp {
    c: Vector,
    a: Matrix,
    b: Vector,
}

impl StandardFormLp {
    pub fn new(c: Vector, a: Matrix, b: Vector) -> Result<Self> {
        let (m, n) = a.shape();
        if m == 0 {
            return Err(Error::Dimension("constraint matrix has no rows".into()));
        }
        if n < m {
            return Err(Error::Dimension(format!(
                "need at least as many variables as constraints, got n={n} < m={m}"
            )));
        }
        if c.len() != n {
            return Err(Error::Dimension(format!(
                "objective has length {}, expected {n}",
                c.len()
            )));
        }
        if b.len() != m {
            return Err(Error::Dimension(format!(
                "right-hand side has length {}, expected {m}",
                b.len()
            )));
        }
        Ok(Self { c, a, b })
    }

    pub fn num_constraints(&self) -> usize {
        self.a.nrows()
    }

    pub fn num_vars(&self) -> usize {
        self.a.ncols()
    }

    pub fn c(&self) -> &Vector {
        &self.c
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn objective_of(&self, x: &Vector) -> f64 {
        self.c.dot(x)
    }

    /// Same constraints, different objective.
    pub fn with_objective(&self, c: Vector) -> Result<Self> {
        Self::new(c, self.a.clone(), self.b.clone())
    }

    /// Same problem with the right-hand side replaced.
    pub fn with_rhs(&self, b: Vector) -> Result<Self> {
        Self::new(self.c.clone(), self.a.clone(), b)
    }
}

/// An ordered basis: `m` distinct column indices plus their complement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Basis {
    indices: Vec<usize>,
    complement: Vec<usize>,
}

impl Basis {
    /// Builds a basis from `m` distinct indices into `[0, n)`.
    /// Indices are kept sorted; the complement is derived.
    pub fn new(mut indices: Vec<usize>, n: usize) -> Result<Self> {
        indices.sort_unstable();
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Dimension("basis indices must be distinct".into()));
        }
        if indices.last().is_some_and(|&i| i >= n) {
            return Err(Error::Dimension(format!(
                "basis index out of range for n={n}"
            )));
        }
        let mut in_basis = vec![false; n];
        for &i in &indices {
            in_basis[i] = true;
        }
        let complement = (0..n).filter(|&i| !in_basis[i]).collect();
        Ok(Self {
            indices,
            complement,
        })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn complement(&self) -> &[usize] {
        &self.complement
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn num_vars(&self) -> usize {
        self.indices.len() + self.complement.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }
}

/// Gathers the columns of `a` selected by `idx` into a dense matrix.
pub(crate) fn gather_columns(a: &Matrix, idx: &[usize]) -> Matrix {
    Matrix::from_fn(a.nrows(), idx.len(), |r, c| a[(r, idx[c])])
}

/// Gathers the entries of `v` selected by `idx`.
pub(crate) fn gather(v: &Vector, idx: &[usize]) -> Vector {
    Vector::from_fn(idx.len(), |i, _| v[idx[i]])
}

/// An optimal solution with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    x: Vector,
    basis: Basis,
    basis_inverse: Matrix,
    dual_price: Vector,
    objective: f64,
}

impl LpSolution {
    pub(crate) fn from_basis(lp: &StandardFormLp, basis: Basis) -> Result<Self> {
        let a_b = gather_columns(lp.a(), basis.indices());
        let basis_inverse = a_b
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("singular basis submatrix".into()))?;
        let x_b = &basis_inverse * lp.b();
        let mut x = Vector::zeros(lp.num_vars());
        for (row, &i) in basis.indices().iter().enumerate() {
            x[i] = x_b[row];
        }
        let c_b = gather(lp.c(), basis.indices());
        let dual_price = basis_inverse.transpose() * c_b;
        let objective = lp.objective_of(&x);
        Ok(Self {
            x,
            basis,
            basis_inverse,
            dual_price,
            objective,
        })
    }

    /// The primal solution; `x_N` is exactly zero by construction.
    pub fn x(&self) -> &Vector {
        &self.x
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    /// `A_B⁻¹` for the returned basis.
    pub fn basis_inverse(&self) -> &Matrix {
        &self.basis_inverse
    }

    /// `(A_B⁻¹)ᵀ c_B`, the optimal dual solution.
    pub fn dual_price(&self) -> &Vector {
        &self.dual_price
    }

    pub fn objective(&self) -> f64 {
        self.objective
    }
}

/// Right-hand-side perturbation policy for degenerate optima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Perturb {
    /// Report `Degenerate` when the optimal support is smaller than `m`.
    Off,
    /// Re-solve with `b + Unif[0, eps)` noise and keep the basis it picks.
    On { eps: f64, seed: u64 },
}

impl Perturb {
    pub fn on(eps: f64) -> Self {
        Perturb::On { eps, seed: 0 }
    }
}

/// Solver knobs. `max_pivots` defaults to `10·n·m` when `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub tol: f64,
    pub max_pivots: Option<usize>,
    pub perturb: Perturb,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_pivots: None,
            perturb: Perturb::Off,
        }
    }
}

impl SolverOptions {
    pub(crate) fn pivot_budget(&self, m: usize, n: usize) -> usize {
        self.max_pivots.unwrap_or(10 * n.max(1) * m.max(1))
    }
}

/// Reads the basis off a solution's support: `B = {i : x_i > tol}`.
///
/// Rejects with `Degenerate` when the support has any size other than
/// `m`. Entries merely close to `tol` from above still count as basic;
/// only the cardinality matters.
pub fn extract_basis(x: &Vector, m: usize, tol: f64) -> Result<Basis> {
    if let Some(i) = (0..x.len()).find(|&i| x[i] < -tol) {
        return Err(Error::Degenerate(format!(
            "component {i} is negative ({})",
            x[i]
        )));
    }
    let indices: Vec<usize> = (0..x.len()).filter(|&i| x[i] > tol).collect();
    if indices.len() != m {
        return Err(Error::Degenerate(format!(
            "support has {} components, expected {m}",
            indices.len()
        )));
    }
    Basis::new(indices, x.len())
}

/// Reduced costs `r = c − Aᵀ(A_B⁻¹)ᵀ c_B`, with `r_B` forced to exact zero.
pub fn reduced_costs(c: &Vector, a: &Matrix, basis: &Basis) -> Result<Vector> {
    let (m, n) = a.shape();
    if basis.len() != m || basis.num_vars() != n || c.len() != n {
        return Err(Error::Dimension(
            "basis/matrix/objective dimensions disagree".into(),
        ));
    }
    let a_b = gather_columns(a, basis.indices());
    let c_b = gather(c, basis.indices());
    // y solves A_Bᵀ y = c_B, so that r = c − Aᵀ y.
    let y = a_b
        .transpose()
        .lu()
        .solve(&c_b)
        .ok_or_else(|| Error::Degenerate("singular basis submatrix".into()))?;
    let scale = 1.0 + c_b.amax();
    if (a_b.transpose() * &y - &c_b).amax() > 1e-6 * scale {
        return Err(Error::Degenerate(
            "near-singular basis submatrix".into(),
        ));
    }
    let mut r = c - a.transpose() * y;
    for &i in basis.indices() {
        r[i] = 0.0;
    }
    Ok(r)
}

/// True when the reduced costs on the complement are all `≥ −tol`:
/// the basis is optimal if and only if this holds.
pub fn check_optimality(c: &Vector, a: &Matrix, basis: &Basis, tol: f64) -> Result<bool> {
    let r = reduced_costs(c, a, basis)?;
    Ok(basis.complement().iter().all(|&i| r[i] >= -tol))
}

/// Upper bound on the objective gap of the basic solution of `basis`
/// relative to the optimum `x_star`: `max_i x*_i · Σ_{i∈N} (−r_i)₊`.
pub fn suboptimality_bound(lp: &StandardFormLp, basis: &Basis, x_star: &Vector) -> Result<f64> {
    if x_star.len() != lp.num_vars() {
        return Err(Error::Dimension("x_star length mismatch".into()));
    }
    let r = reduced_costs(lp.c(), lp.a(), basis)?;
    let neg_part: f64 = basis.complement().iter().map(|&i| (-r[i]).max(0.0)).sum();
    let x_max = x_star.iter().cloned().fold(0.0_f64, f64::max);
    Ok(x_max * neg_part)
}
