//! Central finite differences over parameter matrices, the reference
//! against which analytic subgradients are validated.

use crate::Matrix;

/// Entry-wise central differences of `f` at `theta` with the given step.
/// Only meaningful away from kinks of piecewise-linear objectives.
pub fn central_difference<F>(f: F, theta: &Matrix, step: f64) -> Matrix
where
    F: Fn(&Matrix) -> f64,
{
    let mut grad = Matrix::zeros(theta.nrows(), theta.ncols());
    let mut probe = theta.clone();
    for r in 0..theta.nrows() {
        for c in 0..theta.ncols() {
            let orig = probe[(r, c)];
            probe[(r, c)] = orig + step;
            let up = f(&probe);
            probe[(r, c)] = orig - step;
            let down = f(&probe);
            probe[(r, c)] = orig;
            grad[(r, c)] = (up - down) / (2.0 * step);
        }
    }
    grad
}

/// Relative Frobenius discrepancy between an analytic gradient and its
/// finite-difference estimate.
pub fn relative_error(analytic: &Matrix, numeric: &Matrix) -> f64 {
    (analytic - numeric).norm() / numeric.norm().max(1.0)
}
