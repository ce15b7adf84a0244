//! Online learners over streams of inverse-LP observations.
//!
//! Four learners share one trajectory format: projected subgradient
//! descent on the margin loss, a perceptron driven by per-coordinate
//! reduced-cost margins, follow-the-regularized-leader (a full refit on
//! every prefix), and a diagnostic that descends the suboptimality loss
//! directly — the textbook update whose parameter collapses to zero.

use crate::error::{Error, Result};
use crate::lp::{solve_lp, SolverOptions, StandardFormLp};
use crate::margin::{
    accumulate_active_pull, margin_violation, project_frobenius, ParameterMatrix, TrainingSample,
};
use crate::mom::{mom_fit_from, MomFitConfig};
use crate::{Matrix, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OnlineAlgorithm {
    Ogd,
    Perceptron,
    Ftrl,
    NaiveSuboptOgd,
}

/// Relative-loss convention of the stream's evaluation costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RelLossKind {
    /// `cᵀ(x − x*)/cᵀx*`
    Sp,
    /// `cᵀ(x* − x)/‖c‖₂` with `c` in the positive (gain) orientation.
    Fk,
}

/// Evaluation-only cost information for a stream. The parameter updates
/// never read it.
#[derive(Debug, Clone, Copy)]
pub struct StreamCosts<'a> {
    pub costs: &'a [Vector],
    pub kind: RelLossKind,
}

impl<'a> StreamCosts<'a> {
    pub fn relative_loss(&self, t: usize, x_pred: &Vector, x_star: &Vector) -> Result<f64> {
        match self.kind {
            RelLossKind::Sp => crate::margin::relative_loss_sp(&self.costs[t], x_pred, x_star),
            RelLossKind::Fk => crate::margin::relative_loss_fk(&self.costs[t], x_pred, x_star),
        }
    }
}

/// Initialization of the naive diagnostic learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NaiveInit {
    Zero,
    /// Seeded Gaussian direction scaled to the given Frobenius norm.
    RandomShell { norm: f64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnlineRunConfig {
    pub algorithm: OnlineAlgorithm,
    /// Step size (OGD and the naive diagnostic).
    pub eta: f64,
    /// Frobenius-ball radius; 0 leaves the parameter unconstrained.
    pub radius: f64,
    pub record_trajectory: bool,
    pub solver: SolverOptions,
    pub naive_init: NaiveInit,
    /// Iteration budget of each FTRL inner fit.
    pub ftrl_max_iters: usize,
    pub ftrl_tol: f64,
    /// Seed each inner fit at the previous parameter instead of zero.
    pub ftrl_warm_start: bool,
}

impl OnlineRunConfig {
    pub fn new(algorithm: OnlineAlgorithm, eta: f64, radius: f64) -> Self {
        Self {
            algorithm,
            eta,
            radius,
            record_trajectory: false,
            solver: SolverOptions::default(),
            naive_init: NaiveInit::Zero,
            ftrl_max_iters: 150,
            ftrl_tol: 1e-6,
            ftrl_warm_start: true,
        }
    }
}

/// Theory-backed step size for projected subgradient descent:
/// `η = 2Θ̄ / ((√n + σ̄·m·n)·√T)`.
pub fn ogd_step_size(radius: f64, sigma_bar: f64, n: usize, m: usize, t: usize) -> f64 {
    2.0 * radius / (((n as f64).sqrt() + sigma_bar * (m as f64) * (n as f64)) * (t as f64).sqrt())
}

/// Trajectory of one online run.
#[derive(Debug, Clone, Default)]
pub struct OnlineRunResult {
    /// Per-step decisions; `None` when the predicted LP failed to solve.
    pub decisions: Vec<Option<Vector>>,
    /// `T+1` parameter snapshots when recording, else the final one.
    pub thetas: Vec<Matrix>,
    /// Frobenius norms of all `T+1` iterates (always recorded).
    pub theta_norms: Vec<f64>,
    pub per_step_margin_loss: Vec<f64>,
    /// Empty unless evaluation costs were supplied.
    pub per_step_relative_loss: Vec<f64>,
    /// Running sum of the per-step relative loss.
    pub cumulative_regret: Vec<f64>,
    /// Whether the decision missed the observed optimum.
    pub mistake_flags: Vec<bool>,
    pub skipped_solves: usize,
    /// Rank-one updates fired (perceptron only).
    pub updates_fired: usize,
}

impl OnlineRunResult {
    pub fn final_theta(&self) -> &Matrix {
        self.thetas.last().expect("at least one parameter snapshot")
    }

    pub fn mistakes(&self) -> usize {
        self.mistake_flags.iter().filter(|&&b| b).count()
    }

    /// Fraction of matched decisions over the final `window` steps.
    pub fn match_rate_tail(&self, window: usize) -> f64 {
        let t = self.mistake_flags.len();
        let start = t.saturating_sub(window);
        let tail = &self.mistake_flags[start..];
        if tail.is_empty() {
            return 0.0;
        }
        tail.iter().filter(|&&b| !b).count() as f64 / tail.len() as f64
    }

    /// Parameter sampled uniformly from the recorded trajectory, the
    /// randomized-iterate predictor of the online analyses.
    pub fn sample_uniform_theta(&self, seed: u64) -> &Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        &self.thetas[rng.random_range(0..self.thetas.len())]
    }
}

fn decisions_match(x: &Vector, x_star: &Vector) -> bool {
    (x - x_star).amax() <= 1e-6 * (1.0 + x_star.amax())
}

struct RunState<'a> {
    costs: Option<StreamCosts<'a>>,
    result: OnlineRunResult,
    regret: f64,
}

impl<'a> RunState<'a> {
    fn new(costs: Option<StreamCosts<'a>>, t: usize, record: bool) -> Self {
        let mut result = OnlineRunResult::default();
        result.decisions.reserve(t);
        result.mistake_flags.reserve(t);
        if record {
            result.thetas.reserve(t + 1);
        }
        Self {
            costs,
            result,
            regret: 0.0,
        }
    }

    fn snapshot(&mut self, theta: &Matrix, record: bool) {
        self.result.theta_norms.push(theta.norm());
        if record {
            self.result.thetas.push(theta.clone());
        }
    }

    /// Solves the decision LP for the current prediction and records
    /// every per-step metric.
    fn decide(&mut self, t: usize, sample: &TrainingSample, c_hat: &Vector, opts: &SolverOptions) -> Result<()> {
        let lp = StandardFormLp::new(c_hat.clone(), sample.a().clone(), sample.b().clone())?;
        let decision = match solve_lp(&lp, opts) {
            Ok(sol) => Some(sol.x().clone()),
            Err(Error::Unbounded) | Err(Error::Degenerate(_)) => None,
            Err(e) => return Err(e),
        };
        let mistake = match &decision {
            Some(x) => !decisions_match(x, sample.x_star()),
            None => true,
        };
        if decision.is_none() {
            self.result.skipped_solves += 1;
        }
        if let Some(costs) = &self.costs {
            // Skipped solves contribute zero regret but still count as
            // mistakes; degenerate evaluations are skipped the same way.
            let rel = match &decision {
                Some(x) => costs.relative_loss(t, x, sample.x_star()).unwrap_or(0.0),
                None => 0.0,
            };
            self.result.per_step_relative_loss.push(rel);
            self.regret += rel;
            self.result.cumulative_regret.push(self.regret);
        }
        self.result.decisions.push(decision);
        self.result.mistake_flags.push(mistake);
        Ok(())
    }

    fn finish(mut self, theta: Matrix, record: bool) -> OnlineRunResult {
        self.result.theta_norms.push(theta.norm());
        if record {
            self.result.thetas.push(theta);
        } else {
            self.result.thetas = vec![theta];
        }
        self.result
    }
}

/// Projected online subgradient descent on the margin loss: predict,
/// decide, then step along the margin subgradient and project back onto
/// the radius ball.
pub fn ogd_run(
    data: &[TrainingSample],
    costs: Option<StreamCosts<'_>>,
    cfg: &OnlineRunConfig,
) -> Result<OnlineRunResult> {
    if cfg.eta <= 0.0 || cfg.radius <= 0.0 {
        return Err(Error::Config(
            "online subgradient descent needs a positive step size and radius".into(),
        ));
    }
    let first = data
        .first()
        .ok_or_else(|| Error::Config("empty stream".into()))?;
    let (n, d) = (first.num_vars(), first.covariate_dim());
    let mut theta = Matrix::zeros(n, d);
    let mut state = RunState::new(costs, data.len(), cfg.record_trajectory);
    let mut pull = Vector::zeros(n);

    for (t, sample) in data.iter().enumerate() {
        state.snapshot(&theta, cfg.record_trajectory);
        let c_hat = &theta * sample.z();
        state.decide(t, sample, &c_hat, &cfg.solver)?;
        let loss_terms = sample.reduced_costs_of(&c_hat);
        state
            .result
            .per_step_margin_loss
            .push(loss_terms.iter().map(|&r| (1.0 - r).max(0.0)).sum());
        pull.fill(0.0);
        accumulate_active_pull(sample, &loss_terms, &mut pull);
        theta.ger(-cfg.eta, &pull, sample.z(), 1.0);
        project_frobenius(&mut theta, cfg.radius);
    }
    Ok(state.finish(theta, cfg.record_trajectory))
}

/// Optimality-driven perceptron: for each non-basic coordinate in turn
/// (re-predicting from the working parameter), fire a rank-one update
/// whenever its reduced cost sits at or below ½. Each firing raises
/// that reduced cost by `(1 + ‖A_B⁻¹A_i‖²)·‖z‖²`.
pub fn perceptron_run(
    data: &[TrainingSample],
    costs: Option<StreamCosts<'_>>,
    record_trajectory: bool,
    solver: &SolverOptions,
) -> Result<OnlineRunResult> {
    let first = data
        .first()
        .ok_or_else(|| Error::Config("empty stream".into()))?;
    let (n, d) = (first.num_vars(), first.covariate_dim());
    let mut theta = Matrix::zeros(n, d);
    let mut state = RunState::new(costs, data.len(), record_trajectory);

    for (t, sample) in data.iter().enumerate() {
        state.snapshot(&theta, record_trajectory);
        let c_hat = &theta * sample.z();
        state.decide(t, sample, &c_hat, solver)?;
        state
            .result
            .per_step_margin_loss
            .push(margin_violation_of(sample, &theta));

        let z = sample.z();
        let z_sq = z.norm_squared();
        // ĉ is maintained incrementally across inner updates: a firing
        // on coordinate i shifts ĉ_i by ‖z‖² and ĉ_B by −w_i·‖z‖².
        let mut c_work = c_hat;
        for (j, &i) in sample.basis().complement().iter().enumerate() {
            let w = sample_tableau_column(sample, j);
            let c_b = crate::lp::gather(&c_work, sample.basis().indices());
            let reduced = c_work[i] - w.dot(&c_b);
            if reduced <= 0.5 {
                for (row, &bi) in sample.basis().indices().iter().enumerate() {
                    for col in 0..d {
                        theta[(bi, col)] -= w[row] * z[col];
                    }
                    c_work[bi] -= w[row] * z_sq;
                }
                for col in 0..d {
                    theta[(i, col)] += z[col];
                }
                c_work[i] += z_sq;
                state.result.updates_fired += 1;
            }
        }
    }
    Ok(state.finish(theta, record_trajectory))
}

fn margin_violation_of(sample: &TrainingSample, theta: &Matrix) -> f64 {
    let r = sample.reduced_costs_of(&(theta * sample.z()));
    r.iter().map(|&ri| (1.0 - ri).max(0.0)).sum()
}

fn sample_tableau_column(sample: &TrainingSample, j: usize) -> Vector {
    // A_B⁻¹ A_{·,i} for the j-th complement index.
    let i = sample.basis().complement()[j];
    sample.basis_inverse() * sample.a().column(i).into_owned()
}

/// Follow-the-regularized-leader: after deciding step `t`, refit the
/// regularized margin objective on the prefix with `λ = 1/√t`.
pub fn ftrl_run(
    data: &[TrainingSample],
    costs: Option<StreamCosts<'_>>,
    cfg: &OnlineRunConfig,
) -> Result<OnlineRunResult> {
    let first = data
        .first()
        .ok_or_else(|| Error::Config("empty stream".into()))?;
    let (n, d) = (first.num_vars(), first.covariate_dim());
    let mut theta = Matrix::zeros(n, d);
    let mut state = RunState::new(costs, data.len(), cfg.record_trajectory);

    for (t, sample) in data.iter().enumerate() {
        state.snapshot(&theta, cfg.record_trajectory);
        let c_hat = &theta * sample.z();
        state.decide(t, sample, &c_hat, &cfg.solver)?;
        state
            .result
            .per_step_margin_loss
            .push(margin_violation_of(sample, &theta));

        let prefix = &data[..=t];
        let fit_cfg = MomFitConfig {
            lambda: 1.0 / ((t + 1) as f64).sqrt(),
            radius: cfg.radius,
            max_iters: cfg.ftrl_max_iters,
            tol_objective: cfg.ftrl_tol,
            ..MomFitConfig::default()
        };
        let initial = cfg.ftrl_warm_start.then_some(&theta);
        let report = mom_fit_from(prefix, &fit_cfg, initial)?;
        theta = report.theta_hat.theta().clone();
    }
    Ok(state.finish(theta, cfg.record_trajectory))
}

/// The diagnostic learner: descend the per-sample suboptimality loss
/// with the update direction `(x* − x̂)zᵀ`. With the origin inside the
/// feasible set the parameter is drawn toward zero, which is the
/// failure mode this run exists to expose.
pub fn naive_subopt_ogd_run(
    data: &[TrainingSample],
    costs: Option<StreamCosts<'_>>,
    cfg: &OnlineRunConfig,
) -> Result<OnlineRunResult> {
    if cfg.eta <= 0.0 {
        return Err(Error::Config("step size must be positive".into()));
    }
    let first = data
        .first()
        .ok_or_else(|| Error::Config("empty stream".into()))?;
    let (n, d) = (first.num_vars(), first.covariate_dim());
    let mut theta = match cfg.naive_init {
        NaiveInit::Zero => Matrix::zeros(n, d),
        NaiveInit::RandomShell { norm, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut m = Matrix::from_fn(n, d, |_, _| {
                rand_distr::Distribution::sample(&rand_distr::StandardNormal, &mut rng)
            });
            let current = m.norm();
            if current > 0.0 {
                m *= norm / current;
            }
            m
        }
    };
    project_frobenius(&mut theta, cfg.radius);
    let mut state = RunState::new(costs, data.len(), cfg.record_trajectory);

    for (t, sample) in data.iter().enumerate() {
        state.snapshot(&theta, cfg.record_trajectory);
        let c_hat = &theta * sample.z();
        state.decide(t, sample, &c_hat, &cfg.solver)?;
        state
            .result
            .per_step_margin_loss
            .push(margin_violation_of(sample, &theta));
        if let Some(Some(x_hat)) = state.result.decisions.last() {
            let diff = sample.x_star() - x_hat;
            theta.ger(-cfg.eta, &diff, sample.z(), 1.0);
            project_frobenius(&mut theta, cfg.radius);
        }
    }
    Ok(state.finish(theta, cfg.record_trajectory))
}

/// Dispatches on the configured algorithm.
pub fn run_online(
    data: &[TrainingSample],
    costs: Option<StreamCosts<'_>>,
    cfg: &OnlineRunConfig,
) -> Result<OnlineRunResult> {
    match cfg.algorithm {
        OnlineAlgorithm::Ogd => ogd_run(data, costs, cfg),
        OnlineAlgorithm::Perceptron => {
            perceptron_run(data, costs, cfg.record_trajectory, &cfg.solver)
        }
        OnlineAlgorithm::Ftrl => ftrl_run(data, costs, cfg),
        OnlineAlgorithm::NaiveSuboptOgd => naive_subopt_ogd_run(data, costs, cfg),
    }
}

/// Margin loss of a fixed parameter summed over a stream, the
/// comparator term of the online regret statements.
pub fn total_margin_loss(data: &[TrainingSample], theta: &ParameterMatrix) -> Result<f64> {
    let mut total = 0.0;
    for s in data {
        total += margin_violation(s, theta)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::Basis;
    use approx::assert_abs_diff_eq;

    fn unit_sample() -> TrainingSample {
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
    fn step_size_formula() {
        assert_abs_diff_eq!(ogd_step_size(1.0, 1.0, 4, 2, 100), 0.02, epsilon = 1e-15);
    }

    #[test]
    fn one_ogd_step_from_zero() {
        let data = vec![unit_sample()];
        let cfg = OnlineRunConfig {
            record_trajectory: true,
            ..OnlineRunConfig::new(OnlineAlgorithm::Ogd, 0.1, 10.0)
        };
        let result = ogd_run(&data, None, &cfg).unwrap();
        // Subgradient at zero is [[1], [-1]]; one step of size 0.1.
        let theta2 = result.final_theta();
        assert_abs_diff_eq!(theta2[(0, 0)], -0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(theta2[(1, 0)], 0.1, epsilon = 1e-12);
        assert_eq!(result.thetas.len(), 2);
        assert_abs_diff_eq!(result.per_step_margin_loss[0], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn ogd_projection_stays_in_ball() {
        let data = vec![unit_sample(); 50];
        let radius = 0.05;
        let cfg = OnlineRunConfig {
            record_trajectory: true,
            ..OnlineRunConfig::new(OnlineAlgorithm::Ogd, 0.5, radius)
        };
        let result = ogd_run(&data, None, &cfg).unwrap();
        for norm in &result.theta_norms {
            assert!(*norm <= radius + 1e-12);
        }
    }

    #[test]
    fn perceptron_first_sample_fires_every_nonbasic_coordinate() {
        let data = vec![unit_sample()];
        let result =
            perceptron_run(&data, None, true, &SolverOptions::default()).unwrap();
        assert_eq!(result.updates_fired, 1);
        // After the single firing: row for the non-basic coordinate
        // gains +z = 1, the basis row loses A_B⁻¹A₂·z = 1.
        let theta = result.final_theta();
        assert_abs_diff_eq!(theta[(0, 0)], -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(theta[(1, 0)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn perceptron_repeat_sample_stops_updating() {
        let data = vec![unit_sample(); 5];
        let result =
            perceptron_run(&data, None, false, &SolverOptions::default()).unwrap();
        // First firing pushes the reduced cost to 2 > 1/2; no more fire.
        assert_eq!(result.updates_fired, 1);
        // Later decisions are correct.
        assert!(!result.mistake_flags[4]);
    }

    #[test]
    fn ftrl_first_refit_equals_direct_fit() {
        let data = vec![unit_sample(), unit_sample()];
        let cfg = OnlineRunConfig {
            record_trajectory: true,
            ftrl_max_iters: 400,
            ..OnlineRunConfig::new(OnlineAlgorithm::Ftrl, 0.1, 5.0)
        };
        let result = ftrl_run(&data, None, &cfg).unwrap();
        let direct = crate::mom::mom_fit(
            &data[..1],
            &MomFitConfig {
                lambda: 1.0,
                radius: 5.0,
                max_iters: 400,
                tol_objective: 1e-6,
                ..MomFitConfig::default()
            },
        )
        .unwrap();
        // Θ₂ (snapshot after the first refit) equals the direct fit.
        let theta2 = &result.thetas[1];
        assert_abs_diff_eq!(
            (theta2 - direct.theta_hat.theta()).amax(),
            0.0,
            epsilon = 1e-12
        );
        // Θ₁ is the zero initialization.
        assert_abs_diff_eq!(result.thetas[0].amax(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn naive_first_step_is_decision_gap_times_covariates() {
        let data = vec![unit_sample()];
        let cfg = OnlineRunConfig {
            record_trajectory: true,
            ..OnlineRunConfig::new(OnlineAlgorithm::NaiveSuboptOgd, 0.2, 10.0)
        };
        let result = naive_subopt_ogd_run(&data, None, &cfg).unwrap();
        // ĉ = 0 under Θ₁ = 0: the solver picks x̂ = (1,0) (lowest index
        // wins ties), which matches x*, so no update happens.
        let theta2 = result.final_theta();
        let x_hat = result.decisions[0].as_ref().unwrap();
        let expected = {
            let mut m = Matrix::zeros(2, 1);
            let diff = data[0].x_star() - x_hat;
            m.ger(-0.2, &diff, data[0].z(), 1.0);
            m
        };
        assert_abs_diff_eq!((theta2 - expected).amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn determinism_bitwise() {
        let data = vec![unit_sample(); 20];
        let cfg = OnlineRunConfig {
            record_trajectory: true,
            ..OnlineRunConfig::new(OnlineAlgorithm::Ogd, 0.05, 2.0)
        };
        let a = ogd_run(&data, None, &cfg).unwrap();
        let b = ogd_run(&data, None, &cfg).unwrap();
        assert_eq!(a.thetas, b.thetas);
        assert_eq!(a.per_step_margin_loss, b.per_step_margin_loss);
    }
}
