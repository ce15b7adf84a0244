//! Training samples and the margin losses.
//!
//! The training loss for a sample with optimal basis `B` and complement
//! `N` is `Σ_{i∈N} (1 − r̂_i)₊` where `r̂` are the reduced costs of the
//! *predicted* objective `ĉ = Θz` under that basis. It is zero exactly
//! when every non-basic coordinate clears the optimality condition with
//! margin one, convex and piecewise linear in `Θ`, and never touches
//! the unobserved true costs.

use crate::error::{Error, Result};
use crate::lp::{extract_basis, gather, gather_columns, solve_lp, Basis, LpSolution, SolverOptions, StandardFormLp};
use crate::{Matrix, Vector};

/// One inverse-LP observation: `(x*, A, b, z)` plus the optimal basis
/// and cached factors of `A_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSample {
    x_star: Vector,
    a: Matrix,
    b: Vector,
    z: Vector,
    basis: Basis,
    basis_inverse: Matrix,
    /// `A_B⁻¹ A_N`, one column per complement index; shared by the loss
    /// and its subgradient so neither refactorizes per evaluation.
    tableau: Matrix,
}

impl TrainingSample {
    pub fn new(x_star: Vector, a: Matrix, b: Vector, z: Vector, basis: Basis) -> Result<Self> {
        let (m, n) = a.shape();
        if x_star.len() != n || b.len() != m || basis.len() != m || basis.num_vars() != n {
            return Err(Error::Dimension(
                "sample fields have inconsistent shapes".into(),
            ));
        }
        let recovered = extract_basis(&x_star, m, crate::lp::DEFAULT_TOL)?;
        if recovered != basis {
            return Err(Error::Degenerate(
                "basis disagrees with the support of x_star".into(),
            ));
        }
        let residual = (&a * &x_star - &b).amax();
        if residual > 1e-6 * (1.0 + b.amax()) {
            return Err(Error::Degenerate(format!(
                "x_star violates Ax=b by {residual}"
            )));
        }
        let basis_inverse = gather_columns(&a, basis.indices())
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Degenerate("singular basis submatrix".into()))?;
        let tableau = &basis_inverse * gather_columns(&a, basis.complement());
        Ok(Self {
            x_star,
            a,
            b,
            z,
            basis,
            basis_inverse,
            tableau,
        })
    }

    /// Builds the sample from a solved LP and its covariates.
    pub fn from_lp_solution(lp: &StandardFormLp, sol: &LpSolution, z: Vector) -> Result<Self> {
        Self::new(
            sol.x().clone(),
            lp.a().clone(),
            lp.b().clone(),
            z,
            sol.basis().clone(),
        )
    }

    /// Same LP observation with the covariates replaced (kernel lifts).
    pub fn with_covariates(&self, z: Vector) -> Self {
        Self { z, ..self.clone() }
    }

    pub fn x_star(&self) -> &Vector {
        &self.x_star
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn z(&self) -> &Vector {
        &self.z
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn basis_inverse(&self) -> &Matrix {
        &self.basis_inverse
    }

    pub fn num_vars(&self) -> usize {
        self.a.ncols()
    }

    pub fn num_constraints(&self) -> usize {
        self.a.nrows()
    }

    pub fn covariate_dim(&self) -> usize {
        self.z.len()
    }

    /// Largest singular value of `A_B⁻¹`, the stability constant of the
    /// sample.
    pub fn basis_inverse_spectral_norm(&self) -> f64 {
        self.basis_inverse
            .clone()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)
    }

    /// Reduced costs of an arbitrary objective `v` under the stored
    /// basis, in complement order.
    pub fn reduced_costs_of(&self, v: &Vector) -> Vector {
        let v_b = gather(v, self.basis.indices());
        Vector::from_fn(self.basis.complement().len(), |j, _| {
            v[self.basis.complement()[j]] - self.tableau.column(j).dot(&v_b)
        })
    }
}

/// The linear predictor `ĉ = Θz` together with its Frobenius-ball
/// domain; `radius == 0` means unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterMatrix {
    theta: Matrix,
    radius: f64,
}

impl ParameterMatrix {
    pub fn new(theta: Matrix, radius: f64) -> Result<Self> {
        if radius < 0.0 {
            return Err(Error::Config("radius must be nonnegative".into()));
        }
        if radius > 0.0 && theta.norm() > radius + 1e-9 {
            return Err(Error::Config(format!(
                "parameter norm {} exceeds radius {radius}",
                theta.norm()
            )));
        }
        Ok(Self { theta, radius })
    }

    pub fn unconstrained(theta: Matrix) -> Self {
        Self { theta, radius: 0.0 }
    }

    pub fn zeros(n: usize, d: usize, radius: f64) -> Self {
        Self {
            theta: Matrix::zeros(n, d),
            radius,
        }
    }

    pub fn theta(&self) -> &Matrix {
        &self.theta
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.theta.norm()
    }
}

/// Euclidean projection onto the Frobenius ball of the given radius;
/// a no-op when `radius == 0` (unconstrained) or the point is inside.
pub fn project_frobenius(theta: &mut Matrix, radius: f64) {
    if radius > 0.0 {
        let norm = theta.norm();
        if norm > radius {
            *theta *= radius / norm;
        }
    }
}

/// `ĉ = Θz`.
pub fn predict_objective(theta: &ParameterMatrix, z: &Vector) -> Result<Vector> {
    if theta.theta().ncols() != z.len() {
        return Err(Error::Dimension(format!(
            "parameter expects covariate dimension {}, got {}",
            theta.theta().ncols(),
            z.len()
        )));
    }
    Ok(theta.theta() * z)
}

/// Margin-violation loss `Σ_{i∈N} (1 − r̂_i)₊` of the predicted
/// objective under the sample's optimal basis.
pub fn margin_violation(sample: &TrainingSample, theta: &ParameterMatrix) -> Result<f64> {
    let c_hat = predict_objective(theta, sample.z())?;
    if c_hat.len() != sample.num_vars() {
        return Err(Error::Dimension(
            "predictor output length differs from variable count".into(),
        ));
    }
    let r = sample.reduced_costs_of(&c_hat);
    Ok(r.iter().map(|&ri| (1.0 - ri).max(0.0)).sum())
}

/// A subgradient of [`margin_violation`] at `theta`.
///
/// For each complement coordinate whose hinge is strictly active
/// (`1 − r̂_i > 0`), row `i` receives `−zᵀ` and the basis rows receive
/// `+(A_B⁻¹ A_i) zᵀ`; exactly at a kink the coordinate contributes
/// nothing, which is one valid choice from the subdifferential.
pub fn margin_subgradient(sample: &TrainingSample, theta: &ParameterMatrix) -> Result<Matrix> {
    let c_hat = predict_objective(theta, sample.z())?;
    let r = sample.reduced_costs_of(&c_hat);
    let mut pull = Vector::zeros(sample.num_vars());
    accumulate_active_pull(sample, &r, &mut pull);
    let mut grad = Matrix::zeros(sample.num_vars(), sample.covariate_dim());
    grad.ger(1.0, &pull, sample.z(), 0.0);
    Ok(grad)
}

/// Adds the active-coordinate direction of the sample into `pull`
/// (length n): `−1` on active complement coordinates, `+Σ A_B⁻¹A_i` on
/// basis coordinates. The caller owns the outer product with `z`.
pub(crate) fn accumulate_active_pull(sample: &TrainingSample, r: &Vector, pull: &mut Vector) {
    for (j, &i) in sample.basis.complement().iter().enumerate() {
        if 1.0 - r[j] > 0.0 {
            pull[i] -= 1.0;
            for (row, &bi) in sample.basis.indices().iter().enumerate() {
                pull[bi] += sample.tableau[(row, j)];
            }
        }
    }
}

/// Per-sample suboptimality `ĉᵀx* − ĉᵀx̂` where `x̂` solves the LP
/// under the predicted objective. Nonnegative up to solver tolerance.
pub fn suboptimality_loss(
    sample: &TrainingSample,
    theta: &ParameterMatrix,
    opts: &SolverOptions,
) -> Result<f64> {
    let c_hat = predict_objective(theta, sample.z())?;
    let lp = StandardFormLp::new(c_hat.clone(), sample.a().clone(), sample.b().clone())?;
    let sol = solve_lp(&lp, opts)?;
    Ok(c_hat.dot(sample.x_star()) - c_hat.dot(sol.x()))
}

/// Decision cost under the true objective: `cᵀ(x_pred − x*)`.
pub fn estimate_loss(c_true: &Vector, x_pred: &Vector, x_star: &Vector) -> f64 {
    c_true.dot(x_pred) - c_true.dot(x_star)
}

/// Estimate loss normalized by the optimal value; the shortest-path
/// figure of merit. Errors when `cᵀx*` vanishes.
pub fn relative_loss_sp(c_true: &Vector, x_pred: &Vector, x_star: &Vector) -> Result<f64> {
    let denom = c_true.dot(x_star);
    if denom.abs() < 1e-12 {
        return Err(Error::DegenerateEvaluation(
            "optimal value is zero; relative loss undefined".into(),
        ));
    }
    Ok(estimate_loss(c_true, x_pred, x_star) / denom)
}

/// `cᵀ(x* − x)/‖c‖₂`, the knapsack normalization. Pass the utility
/// vector (positive orientation) to obtain a nonnegative loss; with the
/// minimization objective itself the sign flips. Errors when `‖c‖ = 0`.
pub fn relative_loss_fk(c: &Vector, x_pred: &Vector, x_star: &Vector) -> Result<f64> {
    let norm = c.norm();
    if norm < 1e-12 {
        return Err(Error::DegenerateEvaluation(
            "zero objective vector; relative loss undefined".into(),
        ));
    }
    Ok((c.dot(x_star) - c.dot(x_pred)) / norm)
}

/// Plain squared error `‖a − b‖₂²`, the prediction-loss helper used by
/// the regression baselines.
pub fn squared_error(a: &Vector, b: &Vector) -> f64 {
    (a - b).norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// n=2, m=1, A=[[1,1]], b=(1), x*=(1,0), z=(1): the sample used all
    /// over the docs.
    pub(crate) fn unit_sample() -> TrainingSample {
        TrainingSample::new(
            Vector::from_row_slice(&[1.0, 0.0]),
            Matrix::from_row_slice(1, 2, &[1.0, 1.0]),
            Vector::from_row_slice(&[1.0]),
            Vector::from_row_slice(&[1.0]),
            Basis::new(vec![0], 2).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn predict_is_matrix_vector_product() {
        let theta = ParameterMatrix::unconstrained(Matrix::from_row_slice(
            2,
            3,
            &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
        ));
        let z = Vector::from_row_slice(&[1.0, 0.5, -1.0]);
        let c = predict_objective(&theta, &z).unwrap();
        // Naive triple-check.
        assert_abs_diff_eq!(c[0], 1.0 + 1.0 - 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c[1], 4.0 + 2.5 - 6.0, epsilon = 1e-15);
        assert!(predict_objective(&theta, &Vector::zeros(2)).is_err());
    }

    #[test]
    fn zero_parameter_loses_one_per_nonbasic_coordinate() {
        let sample = unit_sample();
        let theta = ParameterMatrix::zeros(2, 1, 0.0);
        assert_abs_diff_eq!(
            margin_violation(&sample, &theta).unwrap(),
            sample.basis().complement().len() as f64,
            epsilon = 1e-15
        );
    }

    #[test]
    fn satisfied_margin_gives_zero_loss() {
        let sample = unit_sample();
        let theta =
            ParameterMatrix::unconstrained(Matrix::from_row_slice(2, 1, &[0.0, 2.0]));
        // ĉ = (0, 2), reduced cost of coordinate 2 is 2 ≥ 1.
        assert_abs_diff_eq!(margin_violation(&sample, &theta).unwrap(), 0.0, epsilon = 1e-15);
        let grad = margin_subgradient(&sample, &theta).unwrap();
        assert_eq!(grad, Matrix::zeros(2, 1));
    }

    #[test]
    fn hinge_sums_partial_violations() {
        // Reduced costs (0.3, 1.5) should lose (1-0.3) + 0 = 0.7. Build
        // a 3-var sample with one basic coordinate and direct control of
        // the two non-basic reduced costs through the objective.
        let a = Matrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let sample = TrainingSample::new(
            Vector::from_row_slice(&[1.0, 0.0, 0.0]),
            a,
            Vector::from_row_slice(&[1.0]),
            Vector::from_row_slice(&[1.0]),
            Basis::new(vec![0], 3).unwrap(),
        )
        .unwrap();
        // ĉ = (0, 0.3, 1.5) gives r̂ = (0.3, 1.5) on the complement.
        let theta = ParameterMatrix::unconstrained(Matrix::from_row_slice(
            3,
            1,
            &[0.0, 0.3, 1.5],
        ));
        assert_abs_diff_eq!(margin_violation(&sample, &theta).unwrap(), 0.7, epsilon = 1e-12);
    }

    #[test]
    fn subgradient_at_zero_matches_hand_computation() {
        let sample = unit_sample();
        let theta = ParameterMatrix::zeros(2, 1, 0.0);
        let grad = margin_subgradient(&sample, &theta).unwrap();
        // Row 1 (basis) climbs by A_B⁻¹A₂·z = 1, row 2 falls by z = 1.
        assert_abs_diff_eq!(grad[(0, 0)], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(grad[(1, 0)], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn suboptimality_loss_examples() {
        let sample = unit_sample();
        let opts = SolverOptions::default();
        // Exact prediction: loss 0.
        let theta =
            ParameterMatrix::unconstrained(Matrix::from_row_slice(2, 1, &[1.0, 2.0]));
        assert_abs_diff_eq!(
            suboptimality_loss(&sample, &theta, &opts).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        // ĉ = (2, 1): x̂ = (0, 1), loss = ĉᵀx* − ĉᵀx̂ = 2 − 1 = 1.
        let theta =
            ParameterMatrix::unconstrained(Matrix::from_row_slice(2, 1, &[2.0, 1.0]));
        assert_abs_diff_eq!(
            suboptimality_loss(&sample, &theta, &opts).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn estimate_and_relative_losses() {
        let c = Vector::from_row_slice(&[1.0, 2.0]);
        let x_star = Vector::from_row_slice(&[1.0, 0.0]);
        let x_pred = Vector::from_row_slice(&[0.0, 1.0]);
        assert_abs_diff_eq!(estimate_loss(&c, &x_pred, &x_star), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(estimate_loss(&c, &x_star, &x_star), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            relative_loss_sp(&c, &x_pred, &x_star).unwrap(),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            relative_loss_fk(&c, &x_star, &x_star).unwrap(),
            0.0,
            epsilon = 1e-15
        );
        // Verbatim formula on the docs' knapsack triple: the value is
        // negative when called with the minimization objective...
        let c = Vector::from_row_slice(&[-2.0, -1.0]);
        let x_star = Vector::from_row_slice(&[1.0, 0.5]);
        let x = Vector::from_row_slice(&[0.5, 1.0]);
        let v = relative_loss_fk(&c, &x, &x_star).unwrap();
        assert_abs_diff_eq!(v, -0.5 / 5.0_f64.sqrt(), epsilon = 1e-12);
        // ...and nonnegative with the utility orientation.
        let u = -c;
        assert_abs_diff_eq!(
            relative_loss_fk(&u, &x, &x_star).unwrap(),
            0.5 / 5.0_f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_denominators_are_degenerate_evaluations() {
        let zero = Vector::zeros(2);
        let x = Vector::from_row_slice(&[1.0, 0.0]);
        assert!(matches!(
            relative_loss_sp(&zero, &x, &zero).unwrap_err(),
            Error::DegenerateEvaluation(_)
        ));
        assert!(matches!(
            relative_loss_fk(&zero, &x, &x).unwrap_err(),
            Error::DegenerateEvaluation(_)
        ));
    }

    #[test]
    fn sample_constructor_rejects_inconsistent_basis() {
        let err = TrainingSample::new(
            Vector::from_row_slice(&[1.0, 0.0]),
            Matrix::from_row_slice(1, 2, &[1.0, 1.0]),
            Vector::from_row_slice(&[1.0]),
            Vector::from_row_slice(&[1.0]),
            Basis::new(vec![1], 2).unwrap(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Degenerate(_)));
    }
}
