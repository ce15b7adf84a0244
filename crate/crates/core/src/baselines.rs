//! Comparison learners that consume observed cost vectors: ordinary
//! least squares, ridge regression, and SPO+ via mini-batch stochastic
//! subgradient descent. Unlike the margin estimators these all read
//! `c_t`, which is what makes them sensitive to cost-scale noise.

use crate::error::{Error, Result};
use crate::lp::{solve_lp, SolverOptions, StandardFormLp};
use crate::margin::{project_frobenius, predict_objective, ParameterMatrix, TrainingSample};
use crate::{Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// A training sample with its observed minimization objective.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedSample {
    pub sample: TrainingSample,
    pub c: Vector,
    pub meta: crate::datagen::SampleMeta,
}

impl SupervisedSample {
    pub fn new(sample: TrainingSample, c: Vector) -> Result<Self> {
        if c.len() != sample.num_vars() {
            return Err(Error::Dimension(
                "objective length differs from variable count".into(),
            ));
        }
        Ok(Self {
            sample,
            c,
            meta: Default::default(),
        })
    }
}

fn moment_matrices(data: &[SupervisedSample]) -> Result<(Matrix, Matrix)> {
    let first = data
        .first()
        .ok_or_else(|| Error::Config("empty dataset".into()))?;
    let n = first.sample.num_vars();
    let d = first.sample.covariate_dim();
    let mut gram = Matrix::zeros(d, d);
    let mut cross = Matrix::zeros(n, d);
    for s in data {
        if s.sample.covariate_dim() != d || s.c.len() != n {
            return Err(Error::Dimension("mixed dimensions in dataset".into()));
        }
        gram.ger(1.0, s.sample.z(), s.sample.z(), 1.0);
        cross.ger(1.0, &s.c, s.sample.z(), 1.0);
    }
    Ok((gram, cross))
}

/// Least-squares fit with a pseudo-inverse fallback.
#[derive(Debug, Clone)]
pub struct OlsReport {
    pub theta: ParameterMatrix,
    /// True when the covariate Gram matrix was singular and the
    /// minimum-norm solution was taken instead.
    pub pseudo_inverse: bool,
}

/// Normal-equation minimizer `Θ̂ = (Σ c zᵀ)(Σ z zᵀ)⁻¹`.
pub fn ols_fit(data: &[SupervisedSample]) -> Result<OlsReport> {
    let (gram, cross) = moment_matrices(data)?;
    // Solve Θ gram = cross by transposing: gramᵀ Θᵀ = crossᵀ.
    let lu = gram.clone().lu();
    if let Some(solved) = lu.solve(&cross.transpose()) {
        let residual = (&gram * &solved - cross.transpose()).amax();
        if residual <= 1e-6 * (1.0 + cross.amax()) {
            return Ok(OlsReport {
                theta: ParameterMatrix::unconstrained(solved.transpose()),
                pseudo_inverse: false,
            });
        }
    }
    let pinv = gram
        .pseudo_inverse(1e-10)
        .map_err(|e| Error::Degenerate(format!("gram pseudo-inverse failed: {e}")))?;
    Ok(OlsReport {
        theta: ParameterMatrix::unconstrained(cross * pinv),
        pseudo_inverse: true,
    })
}

/// Ridge minimizer `Θ̂ = (Σ c zᵀ)(Σ z zᵀ + T·λ·I)⁻¹`. The per-sample
/// loss convention is `½‖Θz − c‖² + (λ/2)‖Θ‖_F²` averaged over the
/// dataset, hence the `T`-scaled identity.
pub fn ridge_fit(data: &[SupervisedSample], lambda: f64) -> Result<ParameterMatrix> {
    if lambda < 0.0 {
        return Err(Error::Config("lambda must be nonnegative".into()));
    }
    let (mut gram, cross) = moment_matrices(data)?;
    let t = data.len() as f64;
    for i in 0..gram.nrows() {
        gram[(i, i)] += t * lambda;
    }
    let solved = gram
        .lu()
        .solve(&cross.transpose())
        .ok_or_else(|| Error::Degenerate("regularized gram matrix singular".into()))?;
    Ok(ParameterMatrix::unconstrained(solved.transpose()))
}

/// The SPO+ surrogate at one sample:
/// `(2Θz − c)ᵀ x*(c) − min_x (2Θz − c)ᵀ x`; always nonnegative.
pub fn spo_plus_loss(
    s: &SupervisedSample,
    theta: &ParameterMatrix,
    opts: &SolverOptions,
) -> Result<f64> {
    let shifted = 2.0 * predict_objective(theta, s.sample.z())? - &s.c;
    let lp = StandardFormLp::new(shifted.clone(), s.sample.a().clone(), s.sample.b().clone())?;
    let inner = solve_lp(&lp, opts)?;
    Ok(shifted.dot(s.sample.x_star()) - inner.objective())
}

/// Subgradient of [`spo_plus_loss`]: `2(x*(c) − x̃)zᵀ` with `x̃` the
/// inner minimizer.
pub fn spo_plus_subgradient(
    s: &SupervisedSample,
    theta: &ParameterMatrix,
    opts: &SolverOptions,
) -> Result<Matrix> {
    let shifted = 2.0 * predict_objective(theta, s.sample.z())? - &s.c;
    let lp = StandardFormLp::new(shifted, s.sample.a().clone(), s.sample.b().clone())?;
    let inner = solve_lp(&lp, opts)?;
    let diff = s.sample.x_star() - inner.x();
    let mut grad = Matrix::zeros(s.sample.num_vars(), s.sample.covariate_dim());
    grad.ger(2.0, &diff, s.sample.z(), 0.0);
    Ok(grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpoPlusConfig {
    pub batch_size: usize,
    pub steps: usize,
    pub step_size: f64,
    /// Frobenius regularization weight.
    pub lambda: f64,
    pub radius: f64,
    pub seed: u64,
    pub solver: SolverOptions,
}

impl Default for SpoPlusConfig {
    fn default() -> Self {
        Self {
            batch_size: 5,
            steps: 2000,
            step_size: 0.1,
            lambda: 1e-4,
            radius: 0.0,
            seed: 0,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpoPlusReport {
    pub theta: ParameterMatrix,
    /// Batch elements whose inner LP failed; those contribute nothing
    /// to the step.
    pub skipped_solves: usize,
}

/// Mini-batch stochastic subgradient descent on the SPO+ surrogate with
/// Frobenius regularization and uniform iterate averaging.
pub fn spo_plus_fit(data: &[SupervisedSample], cfg: &SpoPlusConfig) -> Result<SpoPlusReport> {
    let first = data
        .first()
        .ok_or_else(|| Error::Config("empty dataset".into()))?;
    if cfg.batch_size == 0 || cfg.steps == 0 || cfg.step_size <= 0.0 {
        return Err(Error::Config("batch size, steps and step size must be positive".into()));
    }
    let n = first.sample.num_vars();
    let d = first.sample.covariate_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut theta = Matrix::zeros(n, d);
    let mut average = Matrix::zeros(n, d);
    let mut skipped = 0;
    for step in 1..=cfg.steps {
        let mut grad = Matrix::zeros(n, d);
        let mut used = 0;
        for _ in 0..cfg.batch_size {
            let idx = rng.random_range(0..data.len());
            let s = &data[idx];
            let shifted =
                2.0 * (&theta * s.sample.z()) - &s.c;
            let lp = StandardFormLp::new(shifted, s.sample.a().clone(), s.sample.b().clone())?;
            match solve_lp(&lp, &cfg.solver) {
                Ok(inner) => {
                    let diff = s.sample.x_star() - inner.x();
                    grad.ger(2.0, &diff, s.sample.z(), 1.0);
                    used += 1;
                }
                Err(Error::Unbounded) | Err(Error::Degenerate(_)) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
        if used > 0 {
            grad /= used as f64;
        }
        grad += cfg.lambda * &theta;
        let eta = cfg.step_size / (step as f64).sqrt();
        theta -= eta * grad;
        project_frobenius(&mut theta, cfg.radius);
        average += &theta;
    }
    average /= cfg.steps as f64;
    Ok(SpoPlusReport {
        theta: ParameterMatrix::unconstrained(average),
        skipped_solves: skipped,
    })
}

/// Independent scale-noise channel for the least-squares consistency
/// probe: `α ~ Unif[mean − halfwidth, mean + halfwidth]`, applied as
/// `(1+α)c`, with additive Gaussian ε of the given σ on the costs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleNoiseSpec {
    pub alpha_mean: f64,
    pub alpha_halfwidth: f64,
    pub eps_sigma: f64,
}

/// Generates scale-noised regression data at each horizon in `t_list`
/// and reports `‖Θ̂_T − (1 + E[α])Θ*‖_F`: the deviation from the limit
/// that least squares actually converges to under independent scale
/// contamination.
pub fn ols_scale_consistency_probe(
    theta_star: &Matrix,
    noise: &ScaleNoiseSpec,
    t_list: &[usize],
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    let (n, d) = theta_star.shape();
    let limit = (1.0 + noise.alpha_mean) * theta_star;
    let mut out = Vec::with_capacity(t_list.len());
    for (i, &t) in t_list.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        let mut gram = Matrix::zeros(d, d);
        let mut cross = Matrix::zeros(n, d);
        for _ in 0..t {
            let z = Vector::from_fn(d, |_, _| StandardNormal.sample(&mut rng));
            let eps = Vector::from_fn(n, |_, _| {
                let g: f64 = StandardNormal.sample(&mut rng);
                noise.eps_sigma * g
            });
            let alpha = if noise.alpha_halfwidth > 0.0 {
                rng.random_range(
                    noise.alpha_mean - noise.alpha_halfwidth
                        ..noise.alpha_mean + noise.alpha_halfwidth,
                )
            } else {
                noise.alpha_mean
            };
            let c = (theta_star * &z + eps) * (1.0 + alpha);
            gram.ger(1.0, &z, &z, 1.0);
            cross.ger(1.0, &c, &z, 1.0);
        }
        let solved = gram
            .lu()
            .solve(&cross.transpose())
            .ok_or_else(|| Error::Degenerate("gram matrix singular in probe".into()))?;
        let theta_hat = solved.transpose();
        out.push((t, (theta_hat - &limit).norm()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Basis;
    use approx::assert_abs_diff_eq;

    /// Supervised wrapper around the single-constraint sample with an
    /// arbitrary covariate vector and consistent objective.
    fn sample_with(z: Vec<f64>, c: Vec<f64>) -> SupervisedSample {
        let n = c.len();
        let a = Matrix::from_fn(1, n, |_, _| 1.0);
        // Make variable 0 optimal: c[0] must be the strict minimum.
        let sample = TrainingSample::new(
            Vector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 }),
            a,
            Vector::from_row_slice(&[1.0]),
            Vector::from_vec(z),
            Basis::new(vec![0], n).unwrap(),
        )
        .unwrap();
        SupervisedSample::new(sample, Vector::from_vec(c)).unwrap()
    }

    #[test]
    fn ols_interpolates_on_basis_covariates() {
        // z_t = e_t: each column of Θ̂ equals the matching c_t.
        let data = vec![
            sample_with(vec![1.0, 0.0], vec![0.5, 2.0]),
            sample_with(vec![0.0, 1.0], vec![0.25, 3.0]),
        ];
        let fit = ols_fit(&data).unwrap();
        assert!(!fit.pseudo_inverse);
        let theta = fit.theta.theta();
        assert_abs_diff_eq!(theta[(0, 0)], 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(theta[(1, 0)], 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(theta[(0, 1)], 0.25, epsilon = 1e-10);
        assert_abs_diff_eq!(theta[(1, 1)], 3.0, epsilon = 1e-10);
    }

    #[test]
    fn ols_recovers_noiseless_linear_map() {
        // Coordinate 0 carries a strongly negative coefficient so it
        // stays the LP optimum for every positive covariate draw.
        let theta_star = Matrix::from_row_slice(2, 2, &[-10.0, -0.5, 0.9, 0.1]);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut data = Vec::new();
        for _ in 0..40 {
            let z = vec![rng.random_range(0.1..1.0), rng.random::<f64>()];
            let zv = Vector::from_row_slice(&z);
            let c = &theta_star * &zv;
            data.push(sample_with(z, vec![c[0], c[1]]));
        }
        let fit = ols_fit(&data).unwrap();
        let recovered = fit.theta.theta();
        assert_abs_diff_eq!((recovered - &theta_star).amax(), 0.0, epsilon = 1e-8);
    }

    #[test]
    fn ols_underdetermined_uses_pseudo_inverse() {
        // One sample, two covariate dims: gram is singular.
        let data = vec![sample_with(vec![1.0, 1.0], vec![-1.0, 1.0])];
        let fit = ols_fit(&data).unwrap();
        assert!(fit.pseudo_inverse);
        for s in &data {
            let pred = fit.theta.theta() * s.sample.z();
            assert_abs_diff_eq!((pred - &s.c).amax(), 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn ridge_limits() {
        let data = vec![
            sample_with(vec![1.0, 0.0], vec![0.5, 2.0]),
            sample_with(vec![0.0, 1.0], vec![0.25, 3.0]),
        ];
        let ols = ols_fit(&data).unwrap();
        let r0 = ridge_fit(&data, 0.0).unwrap();
        assert_abs_diff_eq!((r0.theta() - ols.theta.theta()).amax(), 0.0, epsilon = 1e-10);
        // Heavy shrinkage drives the estimate toward zero.
        let r_inf = ridge_fit(&data, 1e9).unwrap();
        assert!(r_inf.theta().norm() < 1e-6);
        // Norm is monotone in lambda.
        let norms: Vec<f64> = [1e-4, 1e-2, 1.0, 100.0]
            .iter()
            .map(|&l| ridge_fit(&data, l).unwrap().theta().norm())
            .collect();
        for w in norms.windows(2) {
            assert!(w[0] >= w[1] - 1e-12);
        }
    }

    #[test]
    fn ridge_closed_form_tiny_instance() {
        // T=2, d=1, n=1: Θ̂ = (Σ c z)/(Σ z² + 2λ).
        let data = vec![
            sample_with(vec![2.0], vec![-1.0, 1.0]),
            sample_with(vec![1.0], vec![-0.5, 1.0]),
        ];
        let lambda = 0.3;
        let fit = ridge_fit(&data, lambda).unwrap();
        let num: f64 = 2.0 * -1.0 + 1.0 * -0.5;
        let den: f64 = 4.0 + 1.0 + 2.0 * lambda;
        assert_abs_diff_eq!(fit.theta()[(0, 0)], num / den, epsilon = 1e-12);
    }

    #[test]
    fn spo_plus_loss_vanishes_at_truth_and_stays_nonnegative() {
        let s = sample_with(vec![1.0], vec![-2.0, 1.0]);
        let opts = SolverOptions::default();
        // Θz = c: shifted objective equals c, loss is zero.
        let truth =
            ParameterMatrix::unconstrained(Matrix::from_row_slice(2, 1, &[-2.0, 1.0]));
        assert_abs_diff_eq!(spo_plus_loss(&s, &truth, &opts).unwrap(), 0.0, epsilon = 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..25 {
            let theta = ParameterMatrix::unconstrained(Matrix::from_fn(2, 1, |_, _| {
                rng.random_range(-3.0..3.0)
            }));
            assert!(spo_plus_loss(&s, &theta, &opts).unwrap() >= -1e-10);
        }
    }

    #[test]
    fn scale_probe_limits() {
        let theta_star = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 1.0]);
        // Zero scale noise: deviation from Θ* shrinks with T.
        let spec = ScaleNoiseSpec {
            alpha_mean: 0.0,
            alpha_halfwidth: 0.0,
            eps_sigma: 0.3,
        };
        let rows = ols_scale_consistency_probe(&theta_star, &spec, &[50, 2000], 3).unwrap();
        assert!(rows[1].1 < rows[0].1);
        // Mean 0.5 noise converges to 1.5·Θ*.
        let spec = ScaleNoiseSpec {
            alpha_mean: 0.5,
            alpha_halfwidth: 0.5,
            eps_sigma: 0.1,
        };
        let rows = ols_scale_consistency_probe(&theta_star, &spec, &[50, 4000], 4).unwrap();
        assert!(rows[1].1 < rows[0].1);
    }
}
