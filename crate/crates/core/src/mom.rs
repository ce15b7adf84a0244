//! Offline max-optimality-margin estimation.
//!
//! Minimizes `F(Θ) = (λ/2)‖Θ‖_F² + (1/T) Σ_t margin_violation(D_t; Θ)`
//! over a Frobenius ball by deterministic projected full-batch
//! subgradient descent with uniform iterate averaging. The reported
//! estimate is the best averaged iterate seen, so the recorded
//! objective trace is non-increasing by construction.

use crate::error::{Error, Result};
use crate::lp::{solve_lp, SolverOptions, StandardFormLp};
use crate::margin::{
    accumulate_active_pull, project_frobenius, predict_objective, ParameterMatrix, TrainingSample,
};
use crate::{Matrix, Vector};
use serde::{Deserialize, Serialize};

/// Step-size schedule of the subgradient loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepSchedule {
    /// `η_k = η₀/√k` with `η₀ = 1/(λ + 2 + √m·σ̂)`.
    InverseSqrt,
    /// Polyak-style adaptive step against the best objective seen.
    PolyakStyle,
}

/// Iterations in the stopping window: the fit converges when the best
/// objective improves by less than `tol_objective` (relatively) across
/// one window.
const STOP_WINDOW: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomFitConfig {
    /// Regularization weight; must be positive.
    pub lambda: f64,
    /// Frobenius-ball radius of the feasible set; 0 means unconstrained.
    pub radius: f64,
    pub max_iters: usize,
    pub tol_objective: f64,
    pub step_schedule: StepSchedule,
    /// Multiplier on the base step `1/(λ + 2 + √m·σ̂)`. `None` picks
    /// `max(1, radius)`: a unit-scale step budget cannot cross a large
    /// feasible ball in any reasonable iteration count, while small
    /// problems want the unstretched base step for precision.
    #[serde(default)]
    pub step_scale: Option<f64>,
    /// Record the per-iteration objective trace in the report.
    pub record_objective: bool,
}

impl Default for MomFitConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            radius: 0.0,
            max_iters: 20_000,
            tol_objective: 1e-6,
            step_schedule: StepSchedule::InverseSqrt,
            step_scale: None,
            record_objective: false,
        }
    }
}

impl MomFitConfig {
    /// Default regularization `λ = 1/√T` for a dataset of size `t`.
    pub fn for_dataset_size(t: usize) -> Self {
        Self {
            lambda: 1.0 / (t.max(1) as f64).sqrt(),
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.lambda <= 0.0 {
            return Err(Error::Config("lambda must be positive".into()));
        }
        if self.radius < 0.0 {
            return Err(Error::Config("radius must be nonnegative".into()));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct MomFitReport {
    pub theta_hat: ParameterMatrix,
    pub final_objective: f64,
    pub iterations_used: usize,
    pub converged: bool,
    /// Best-objective trace, one entry per iteration (empty unless
    /// requested); non-increasing.
    pub objective_trace: Vec<f64>,
}

/// Precomputed dataset view shared by the fit loop.
struct Prepared<'a> {
    samples: &'a [TrainingSample],
    n: usize,
    d: usize,
}

impl<'a> Prepared<'a> {
    fn new(samples: &'a [TrainingSample]) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::Config("empty dataset".into()))?;
        let n = first.num_vars();
        let d = first.covariate_dim();
        if samples
            .iter()
            .any(|s| s.num_vars() != n || s.covariate_dim() != d)
        {
            return Err(Error::Dimension(
                "samples disagree on variable or covariate dimension".into(),
            ));
        }
        Ok(Self { samples, n, d })
    }

    /// Mean margin loss and, when `grad` is given, the summed
    /// subgradient of the data term (caller divides by T).
    fn data_pass(&self, theta: &Matrix, mut grad: Option<&mut Matrix>) -> f64 {
        let mut loss = 0.0;
        let mut pull = Vector::zeros(self.n);
        for s in self.samples {
            let c_hat = theta * s.z();
            let r = s.reduced_costs_of(&c_hat);
            loss += r.iter().map(|&ri| (1.0 - ri).max(0.0)).sum::<f64>();
            if let Some(g) = grad.as_deref_mut() {
                pull.fill(0.0);
                accumulate_active_pull(s, &r, &mut pull);
                g.ger(1.0, &pull, s.z(), 1.0);
            }
        }
        loss / self.samples.len() as f64
    }

    fn objective(&self, theta: &Matrix, lambda: f64) -> f64 {
        0.5 * lambda * theta.norm_squared() + self.data_pass(theta, None)
    }
}

/// Fits the margin estimator. `initial` seeds the iteration (zeros when
/// `None`); warm starts matter for the follow-the-leader wrapper.
pub fn mom_fit_from(
    dataset: &[TrainingSample],
    cfg: &MomFitConfig,
    initial: Option<&Matrix>,
) -> Result<MomFitReport> {
    cfg.validate()?;
    let prepared = Prepared::new(dataset)?;
    let (n, d) = (prepared.n, prepared.d);
    let t = dataset.len() as f64;

    // Median stability constant: a single ill-conditioned sample must
    // not throttle the step size for the whole dataset.
    let mut sigmas: Vec<f64> = dataset
        .iter()
        .map(|s| s.basis_inverse_spectral_norm())
        .collect();
    sigmas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let sigma_hat = sigmas[sigmas.len() / 2];
    let m = dataset[0].num_constraints() as f64;
    let lipschitz = 2.0 + m.sqrt() * sigma_hat;
    let stretch = cfg.step_scale.unwrap_or_else(|| cfg.radius.max(1.0));
    if stretch <= 0.0 {
        return Err(Error::Config("step_scale must be positive".into()));
    }
    let eta0 = stretch / (cfg.lambda + lipschitz);

    let mut theta = match initial {
        Some(init) => {
            if init.shape() != (n, d) {
                return Err(Error::Dimension("initial point has wrong shape".into()));
            }
            init.clone()
        }
        None => Matrix::zeros(n, d),
    };
    project_frobenius(&mut theta, cfg.radius);

    let mut sum = Matrix::zeros(n, d);
    let mut grad = Matrix::zeros(n, d);
    let mut best_objective = f64::INFINITY;
    let mut best_theta = theta.clone();
    let mut trace = Vec::new();
    let mut window = std::collections::VecDeque::with_capacity(STOP_WINDOW + 1);
    let mut converged = false;
    let mut iterations_used = 0;

    for k in 1..=cfg.max_iters {
        iterations_used = k;
        grad.fill(0.0);
        let data_loss = prepared.data_pass(&theta, Some(&mut grad));
        let objective = 0.5 * cfg.lambda * theta.norm_squared() + data_loss;
        grad /= t;
        grad += cfg.lambda * &theta;

        let eta = match cfg.step_schedule {
            StepSchedule::InverseSqrt => eta0 / (k as f64).sqrt(),
            StepSchedule::PolyakStyle => {
                let gap = (objective - best_objective).max(0.0);
                let g2 = grad.norm_squared().max(1e-12);
                gap / g2 + eta0 / k as f64
            }
        };
        theta -= eta * &grad;
        project_frobenius(&mut theta, cfg.radius);

        sum += &theta;
        let averaged = &sum / k as f64;
        let avg_objective = prepared.objective(&averaged, cfg.lambda);
        if avg_objective < best_objective {
            best_objective = avg_objective;
            best_theta.copy_from(&averaged);
        }
        if cfg.record_objective {
            trace.push(best_objective);
        }

        window.push_back(best_objective);
        if window.len() > STOP_WINDOW {
            let reference = window.pop_front().unwrap();
            if reference - best_objective <= cfg.tol_objective * reference.abs().max(1.0) {
                converged = true;
                break;
            }
        }
    }

    Ok(MomFitReport {
        theta_hat: ParameterMatrix::new(best_theta, cfg.radius)?,
        final_objective: best_objective,
        iterations_used,
        converged,
        objective_trace: trace,
    })
}

/// Fits from the zero matrix.
pub fn mom_fit(dataset: &[TrainingSample], cfg: &MomFitConfig) -> Result<MomFitReport> {
    mom_fit_from(dataset, cfg, None)
}

/// Predicts the objective for a new context and solves the resulting
/// LP: returns `(ĉ, x̂)`.
pub fn mom_prescribe(
    theta_hat: &ParameterMatrix,
    a: &Matrix,
    b: &Vector,
    z: &Vector,
    opts: &SolverOptions,
) -> Result<(Vector, Vector)> {
    let c_hat = predict_objective(theta_hat, z)?;
    let lp = StandardFormLp::new(c_hat.clone(), a.clone(), b.clone())?;
    let sol = solve_lp(&lp, opts)?;
    Ok((c_hat, sol.x().clone()))
}
