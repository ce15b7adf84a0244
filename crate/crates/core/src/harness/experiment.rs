//! Experiment orchestration: per-trial data generation, grid tuning on
//! a validation split, refitting, evaluation, and row assembly.

use super::config::{ExperimentConfig, MethodSpec};
use super::emit::{sort_rows, ResultRow};
use crate::baselines::{ols_fit, ridge_fit, spo_plus_fit, SpoPlusConfig, SupervisedSample};
use crate::datagen::{
    draw_ground_truth, gen_dataset, gen_separable_stream_with_floor, trial_rng, Family,
    SeparableStream,
};
use crate::error::{Error, Result};
use crate::features::{kernelize_dataset, KernelSpec, KernelTransformer};
use crate::lp::{solve_lp, Perturb, SolverOptions, StandardFormLp};
use crate::margin::{
    estimate_loss, relative_loss_fk, relative_loss_sp, ParameterMatrix, TrainingSample,
};
use crate::mom::{mom_fit, MomFitConfig};
use crate::online::{
    ftrl_run, naive_subopt_ogd_run, ogd_run, ogd_step_size, perceptron_run, NaiveInit,
    OnlineAlgorithm, OnlineRunConfig, RelLossKind, StreamCosts,
};
use crate::Vector;
use rayon::prelude::*;
use std::time::Instant;

/// Golden-ratio stride keeps per-trial seeds well separated.
const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn trial_seed(master: u64, trial: usize) -> u64 {
    master.wrapping_add((trial as u64 + 1).wrapping_mul(SEED_STRIDE))
}

/// A fitted predictor: parameter matrix plus the covariate lift it was
/// trained under.
#[derive(Debug, Clone)]
pub struct FittedModel {
    pub theta: ParameterMatrix,
    pub transformer: Option<KernelTransformer>,
}

impl FittedModel {
    pub fn predict(&self, z: &Vector) -> Result<Vector> {
        let lifted;
        let features = match &self.transformer {
            Some(t) => {
                lifted = t.transform(z);
                &lifted
            }
            None => z,
        };
        crate::margin::predict_objective(&self.theta, features)
    }
}

/// One point of a method's hyperparameter grid.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HyperPoint {
    pub lambda: Option<f64>,
    pub step: Option<f64>,
    pub radius_rel: Option<f64>,
    pub gamma: Option<f64>,
}

impl std::fmt::Display for HyperPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        if let Some(v) = self.lambda {
            parts.push(format!("lambda={v}"));
        }
        if let Some(v) = self.step {
            parts.push(format!("step={v}"));
        }
        if let Some(v) = self.radius_rel {
            parts.push(format!("radius_rel={v}"));
        }
        if let Some(v) = self.gamma {
            parts.push(format!("gamma={v}"));
        }
        if parts.is_empty() {
            parts.push("default".into());
        }
        write!(f, "{}", parts.join(","))
    }
}

/// The grid a method is tuned over, in deterministic order (ascending
/// lambda, then step, then radius, then gamma), which makes the
/// smallest values win ties during tuning.
pub fn grid_points(method: &MethodSpec, cfg: &ExperimentConfig) -> Vec<HyperPoint> {
    let g = &cfg.grids;
    let lambdas = || g.lambda.iter().copied();
    match method {
        MethodSpec::Ols | MethodSpec::MomPerceptron => vec![HyperPoint::default()],
        MethodSpec::Mom | MethodSpec::Ridge => lambdas()
            .map(|l| HyperPoint {
                lambda: Some(l),
                ..HyperPoint::default()
            })
            .collect(),
        MethodSpec::MomFtrl => g
            .radius_rel
            .iter()
            .map(|&r| HyperPoint {
                radius_rel: Some(r),
                ..HyperPoint::default()
            })
            .collect(),
        MethodSpec::MomOgd => {
            let mut points = Vec::new();
            for &s in &g.step {
                for &r in &g.radius_rel {
                    points.push(HyperPoint {
                        step: Some(s),
                        radius_rel: Some(r),
                        ..HyperPoint::default()
                    });
                }
            }
            points
        }
        MethodSpec::SpoPlus => {
            let mut points = Vec::new();
            for &l in &g.lambda {
                for &s in &g.step {
                    points.push(HyperPoint {
                        lambda: Some(l),
                        step: Some(s),
                        ..HyperPoint::default()
                    });
                }
            }
            points
        }
        MethodSpec::MomKernel { kernel } => {
            let gammas: Vec<Option<f64>> = match kernel {
                KernelSpec::Linear => vec![None],
                _ if g.gamma.is_empty() => vec![None],
                _ => g.gamma.iter().copied().map(Some).collect(),
            };
            let mut points = Vec::new();
            for &l in &g.lambda {
                for &gamma in &gammas {
                    points.push(HyperPoint {
                        lambda: Some(l),
                        gamma,
                        ..HyperPoint::default()
                    });
                }
            }
            points
        }
    }
}

fn kernel_with_gamma(spec: &KernelSpec, gamma: Option<f64>) -> KernelSpec {
    match (spec, gamma) {
        (KernelSpec::Polynomial { degree, .. }, Some(g)) => KernelSpec::Polynomial {
            gamma: g,
            degree: *degree,
        },
        (KernelSpec::Rbf { .. }, Some(g)) => KernelSpec::Rbf { gamma: g },
        _ => *spec,
    }
}

/// Per-trial context shared by fitting and evaluation.
struct TrialData {
    train: Vec<SupervisedSample>,
    test: Vec<SupervisedSample>,
    gt_norm: f64,
    seed: u64,
}

fn generate_trial_data(cfg: &ExperimentConfig, trial: usize) -> Result<TrialData> {
    let seed = trial_seed(cfg.seed, trial);
    let gen = cfg.gen_config();
    let mut rng = trial_rng(seed);
    let gt = draw_ground_truth(gen.ground_truth_rows(), gen.covariate_dim(), &mut rng);
    let train = gen_dataset(&gen, &gt, seed, 0, cfg.t_train)?;
    let test = gen_dataset(&gen, &gt, seed, cfg.t_train as u64, cfg.t_test)?;
    Ok(TrialData {
        train,
        test,
        gt_norm: gt.v.norm(),
        seed,
    })
}

fn samples_of(data: &[SupervisedSample]) -> Vec<TrainingSample> {
    data.iter().map(|s| s.sample.clone()).collect()
}

/// Fits one method at one grid point on the given training records.
pub fn fit_method(
    method: &MethodSpec,
    point: &HyperPoint,
    train: &[SupervisedSample],
    cfg: &ExperimentConfig,
    gt_norm: f64,
    seed: u64,
) -> Result<FittedModel> {
    let t = train.len();
    let samples = samples_of(train);
    let lambda = point.lambda.unwrap_or(1.0 / (t.max(1) as f64).sqrt());
    let radius = point.radius_rel.map(|r| r * gt_norm).unwrap_or(0.0);
    let fit_cfg = MomFitConfig {
        lambda,
        radius,
        max_iters: cfg.fit.max_iters,
        tol_objective: cfg.fit.tol_objective,
        step_schedule: cfg.fit.step_schedule,
        record_objective: false,
    };
    let plain = |theta: ParameterMatrix| FittedModel {
        theta,
        transformer: None,
    };
    match method {
        MethodSpec::Mom => Ok(plain(mom_fit(&samples, &fit_cfg)?.theta_hat)),
        MethodSpec::MomKernel { kernel } => {
            let spec = kernel_with_gamma(kernel, point.gamma);
            let (lifted, transformer) = kernelize_dataset(&samples, &spec, true)?;
            let report = mom_fit(&lifted, &fit_cfg)?;
            Ok(FittedModel {
                theta: report.theta_hat,
                transformer: Some(transformer),
            })
        }
        MethodSpec::MomOgd => {
            let radius = point.radius_rel.unwrap_or(1.2) * gt_norm.max(1e-9);
            let eta = point.step.unwrap_or(0.1);
            let run_cfg = OnlineRunConfig {
                solver: cfg.solver,
                ..OnlineRunConfig::new(OnlineAlgorithm::Ogd, eta, radius)
            };
            let result = ogd_run(&samples, None, &run_cfg)?;
            Ok(plain(ParameterMatrix::new(
                result.final_theta().clone(),
                radius,
            )?))
        }
        MethodSpec::MomPerceptron => {
            let result = perceptron_run(&samples, None, false, &cfg.solver)?;
            Ok(plain(ParameterMatrix::unconstrained(
                result.final_theta().clone(),
            )))
        }
        MethodSpec::MomFtrl => {
            let radius = point.radius_rel.unwrap_or(1.2) * gt_norm.max(1e-9);
            let run_cfg = OnlineRunConfig {
                solver: cfg.solver,
                ftrl_max_iters: cfg.fit.max_iters.min(200),
                ..OnlineRunConfig::new(OnlineAlgorithm::Ftrl, 0.1, radius)
            };
            let result = ftrl_run(&samples, None, &run_cfg)?;
            Ok(plain(ParameterMatrix::new(
                result.final_theta().clone(),
                radius,
            )?))
        }
        MethodSpec::Ols => Ok(plain(ols_fit(train)?.theta)),
        MethodSpec::Ridge => Ok(plain(ridge_fit(train, lambda)?)),
        MethodSpec::SpoPlus => {
            let spo_cfg = SpoPlusConfig {
                step_size: point.step.unwrap_or(0.1),
                lambda,
                seed,
                solver: cfg.solver,
                ..SpoPlusConfig::default()
            };
            Ok(plain(spo_plus_fit(train, &spo_cfg)?.theta))
        }
    }
}

/// Aggregate evaluation of a fitted model on held-out records.
#[derive(Debug, Clone, Copy, Default)]
pub struct Evaluation {
    pub rel_loss_mean: f64,
    pub est_loss_mean: f64,
    pub sub_loss_mean: f64,
    pub match_rate: f64,
    pub skipped: usize,
}

/// Prediction LPs can be degenerate under ties, so evaluation always
/// enables RHS perturbation with a seed derived from the trial.
fn eval_solver_options(base: &SolverOptions, seed: u64) -> SolverOptions {
    SolverOptions {
        perturb: match base.perturb {
            Perturb::Off => Perturb::On { eps: 1e-7, seed },
            on => on,
        },
        ..*base
    }
}

pub fn evaluate_model(
    model: &FittedModel,
    test: &[SupervisedSample],
    family: Family,
    opts: &SolverOptions,
) -> Result<Evaluation> {
    let mut eval = Evaluation::default();
    let mut used = 0usize;
    let mut matches = 0usize;
    for s in test {
        let c_hat = model.predict(s.sample.z())?;
        let lp = StandardFormLp::new(c_hat.clone(), s.sample.a().clone(), s.sample.b().clone())?;
        let x_hat = match solve_lp(&lp, opts) {
            Ok(sol) => sol.x().clone(),
            Err(Error::Unbounded) | Err(Error::Degenerate(_)) => {
                eval.skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let x_star = s.sample.x_star();
        let rel = match family {
            Family::Sp => relative_loss_sp(&s.c, &x_hat, x_star),
            Family::Fk => relative_loss_fk(&(-&s.c), &x_hat, x_star),
        };
        let rel = match rel {
            Ok(v) => v,
            Err(Error::DegenerateEvaluation(_)) => {
                eval.skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        eval.rel_loss_mean += rel;
        eval.est_loss_mean += estimate_loss(&s.c, &x_hat, x_star);
        eval.sub_loss_mean += c_hat.dot(x_star) - c_hat.dot(&x_hat);
        if (&x_hat - x_star).amax() <= 1e-6 * (1.0 + x_star.amax()) {
            matches += 1;
        }
        used += 1;
    }
    if used > 0 {
        eval.rel_loss_mean /= used as f64;
        eval.est_loss_mean /= used as f64;
        eval.sub_loss_mean /= used as f64;
        eval.match_rate = matches as f64 / used as f64;
    } else {
        eval.rel_loss_mean = f64::NAN;
        eval.est_loss_mean = f64::NAN;
        eval.sub_loss_mean = f64::NAN;
        eval.match_rate = f64::NAN;
    }
    Ok(eval)
}

/// Exhaustive grid search by mean relative loss on the validation
/// split. Grid points that fail to fit or evaluate to NaN are excluded;
/// ties keep the earliest (smallest) point.
pub fn tune(
    method: &MethodSpec,
    cfg: &ExperimentConfig,
    fit_split: &[SupervisedSample],
    val_split: &[SupervisedSample],
    gt_norm: f64,
    seed: u64,
) -> Result<(HyperPoint, f64)> {
    let points = grid_points(method, cfg);
    if points.is_empty() {
        return Err(Error::Config("empty hyperparameter grid".into()));
    }
    let opts = eval_solver_options(&cfg.solver, seed);
    let mut best: Option<(HyperPoint, f64)> = None;
    for point in points {
        let Ok(model) = fit_method(method, &point, fit_split, cfg, gt_norm, seed) else {
            continue;
        };
        let Ok(eval) = evaluate_model(&model, val_split, cfg.family, &opts) else {
            continue;
        };
        if eval.rel_loss_mean.is_nan() {
            continue;
        }
        if best.is_none() || eval.rel_loss_mean < best.unwrap().1 {
            best = Some((point, eval.rel_loss_mean));
        }
    }
    best.ok_or_else(|| Error::Config("every grid point failed during tuning".into()))
}

fn now_ms(record: bool, start: Instant) -> u64 {
    if record {
        start.elapsed().as_millis() as u64
    } else {
        0
    }
}

/// Runs the full offline protocol: per trial, tune each method on the
/// validation split, refit on the whole training set, and score the
/// test set. Failures become NaN rows rather than aborting the sweep.
pub fn run_offline_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let trial_rows: Vec<Vec<ResultRow>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| offline_trial(cfg, trial))
        .collect::<Result<_>>()?;
    let mut rows: Vec<ResultRow> = trial_rows.into_iter().flatten().collect();
    sort_rows(&mut rows);
    Ok(rows)
}

fn offline_trial(cfg: &ExperimentConfig, trial: usize) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    let data = match generate_trial_data(cfg, trial) {
        Ok(d) => d,
        Err(e) => {
            for method in &cfg.methods {
                rows.push(error_row(trial, &method.name(), &e));
            }
            return Ok(rows);
        }
    };
    let fit_len =
        ((1.0 - cfg.validation_fraction) * cfg.t_train as f64).round().max(1.0) as usize;
    let fit_len = fit_len.min(cfg.t_train - 1).max(1);
    let (fit_split, val_split) = data.train.split_at(fit_len);

    for method in &cfg.methods {
        let start = Instant::now();
        let outcome = (|| -> Result<(HyperPoint, Evaluation)> {
            let (point, _) = tune(method, cfg, fit_split, val_split, data.gt_norm, data.seed)?;
            let model = fit_method(method, &point, &data.train, cfg, data.gt_norm, data.seed)?;
            let opts = eval_solver_options(&cfg.solver, data.seed);
            let eval = evaluate_model(&model, &data.test, cfg.family, &opts)?;
            Ok((point, eval))
        })();
        let runtime = now_ms(cfg.record_timings, start);
        match outcome {
            Ok((point, eval)) => {
                let hp = point.to_string();
                let rel_metric = match cfg.family {
                    Family::Sp => "rel-loss-sp",
                    Family::Fk => "rel-loss-fk",
                };
                let name = method.name();
                for (metric, value) in [
                    (rel_metric, eval.rel_loss_mean),
                    ("l-est", eval.est_loss_mean),
                    ("l-sub", eval.sub_loss_mean),
                    ("match-rate", eval.match_rate),
                ] {
                    rows.push(ResultRow {
                        trial,
                        method: name.clone(),
                        hyperparams: hp.clone(),
                        metric: metric.into(),
                        value,
                        runtime_ms: runtime,
                    });
                }
            }
            Err(e) => rows.push(error_row(trial, &method.name(), &e)),
        }
    }
    Ok(rows)
}

fn error_row(trial: usize, method: &str, e: &Error) -> ResultRow {
    ResultRow {
        trial,
        method: method.into(),
        hyperparams: format!("error: {e}"),
        metric: "rel-loss-sp".into(),
        value: f64::NAN,
        runtime_ms: 0,
    }
}

/// Per-trial stream plus constants for the online protocol.
pub struct OnlineTrial {
    pub stream: SeparableStream,
    pub radius: f64,
    pub eta: f64,
}

pub fn online_trial_stream(cfg: &ExperimentConfig, trial: usize) -> Result<OnlineTrial> {
    let seed = trial_seed(cfg.seed, trial);
    let gen = cfg.gen_config();
    if !cfg.online.separable {
        return Err(Error::Config(
            "non-separable online streams are not wired; set online.separable".into(),
        ));
    }
    let stream = gen_separable_stream_with_floor(
        &gen,
        seed,
        cfg.online.t,
        cfg.online.margin_scale,
        cfg.online.margin_floor,
    )?;
    let radius = cfg.online.radius_rel * stream.theta_star.norm();
    let n = gen.num_vars();
    let m = stream.samples[0].num_constraints();
    let eta = cfg
        .online
        .eta
        .unwrap_or_else(|| ogd_step_size(radius, stream.sigma_bar, n, m, cfg.online.t));
    Ok(OnlineTrial {
        stream,
        radius,
        eta,
    })
}

/// Streams each configured learner over per-trial separable data and
/// emits cumulative regret and mistake counts at the checkpoints.
pub fn run_online_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let trial_rows: Vec<Vec<ResultRow>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| online_trial(cfg, trial))
        .collect::<Result<_>>()?;
    let mut rows: Vec<ResultRow> = trial_rows.into_iter().flatten().collect();
    sort_rows(&mut rows);
    Ok(rows)
}

fn online_trial(cfg: &ExperimentConfig, trial: usize) -> Result<Vec<ResultRow>> {
    let mut rows = Vec::new();
    let trial_data = match online_trial_stream(cfg, trial) {
        Ok(t) => t,
        Err(e) => {
            for alg in &cfg.online.algorithms {
                rows.push(error_row(trial, &format!("{alg:?}"), &e));
            }
            return Ok(rows);
        }
    };
    let kind = match cfg.family {
        Family::Sp => RelLossKind::Sp,
        Family::Fk => RelLossKind::Fk,
    };
    let costs = StreamCosts {
        costs: &trial_data.stream.gains,
        kind,
    };
    let mut checkpoints = cfg.online.checkpoints.clone();
    checkpoints.push(cfg.online.t);
    checkpoints.sort_unstable();
    checkpoints.dedup();

    for alg in &cfg.online.algorithms {
        let start = Instant::now();
        let run_cfg = OnlineRunConfig {
            solver: cfg.solver,
            naive_init: if cfg.online.naive_init_rel > 0.0 {
                NaiveInit::RandomShell {
                    norm: cfg.online.naive_init_rel * trial_data.stream.theta_star.norm(),
                    seed: trial_seed(cfg.seed, trial),
                }
            } else {
                NaiveInit::Zero
            },
            ..OnlineRunConfig::new(*alg, trial_data.eta, trial_data.radius)
        };
        let result = match *alg {
            OnlineAlgorithm::Ogd => ogd_run(&trial_data.stream.samples, Some(costs), &run_cfg),
            OnlineAlgorithm::Perceptron => perceptron_run(
                &trial_data.stream.samples,
                Some(costs),
                false,
                &cfg.solver,
            ),
            OnlineAlgorithm::Ftrl => ftrl_run(&trial_data.stream.samples, Some(costs), &run_cfg),
            OnlineAlgorithm::NaiveSuboptOgd => {
                naive_subopt_ogd_run(&trial_data.stream.samples, Some(costs), &run_cfg)
            }
        };
        let runtime = now_ms(cfg.record_timings, start);
        let method = method_name_of(*alg);
        match result {
            Ok(run) => {
                for &t in &checkpoints {
                    let t = t.min(cfg.online.t);
                    if t == 0 {
                        continue;
                    }
                    let regret = run.cumulative_regret.get(t - 1).copied().unwrap_or(f64::NAN);
                    let mistakes =
                        run.mistake_flags[..t].iter().filter(|&&b| b).count() as f64;
                    let hp = format!("eta={},radius_rel={},t={t}", trial_data.eta, cfg.online.radius_rel);
                    rows.push(ResultRow {
                        trial,
                        method: method.clone(),
                        hyperparams: hp.clone(),
                        metric: "cum-regret".into(),
                        value: regret,
                        runtime_ms: runtime,
                    });
                    rows.push(ResultRow {
                        trial,
                        method: method.clone(),
                        hyperparams: hp,
                        metric: "mistakes".into(),
                        value: mistakes,
                        runtime_ms: runtime,
                    });
                }
            }
            Err(e) => rows.push(error_row(trial, &method, &e)),
        }
    }
    Ok(rows)
}

fn method_name_of(alg: OnlineAlgorithm) -> String {
    match alg {
        OnlineAlgorithm::Ogd => "mom-ogd".into(),
        OnlineAlgorithm::Perceptron => "mom-perceptron".into(),
        OnlineAlgorithm::Ftrl => "mom-ftrl".into(),
        OnlineAlgorithm::NaiveSuboptOgd => "naive-subopt-ogd".into(),
    }
}

/// Fits one named method with default hyperparameters on a dataset
/// loaded from disk; the `train` CLI entry point.
pub fn fit_single(
    method: &MethodSpec,
    train: &[SupervisedSample],
    cfg: &ExperimentConfig,
) -> Result<FittedModel> {
    let gt_norm = 1.0;
    let point = grid_points(method, cfg)
        .into_iter()
        .next()
        .unwrap_or_default();
    fit_method(method, &point, train, cfg, gt_norm, cfg.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::PriceMode;

    fn smoke_config() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{
                "family": "fk",
                "knapsack": {"n_items": 4, "d": 3, "price_mode": "uniform-0-1"},
                "t_train": 24,
                "t_test": 10,
                "trials": 2,
                "seed": 5,
                "methods": [{"kind": "mom"}, {"kind": "ols"}],
                "grids": {"lambda": [0.01, 1.0], "step": [0.1], "radius_rel": [1.2], "gamma": []},
                "fit": {"max_iters": 200, "tol_objective": 1e-6, "step_schedule": "inverse-sqrt"}
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn offline_smoke_run_emits_rows_per_method_and_metric() {
        let cfg = smoke_config();
        assert_eq!(cfg.knapsack.price_mode, PriceMode::Uniform01);
        let rows = run_offline_experiment(&cfg).unwrap();
        // 2 trials × 2 methods × 4 metrics.
        assert_eq!(rows.len(), 16);
        assert!(rows.iter().all(|r| r.value.is_finite()));
        // Sorted by (trial, method, metric).
        let mut sorted = rows.clone();
        sort_rows(&mut sorted);
        assert_eq!(rows, sorted);
    }

    #[test]
    fn offline_runs_are_deterministic() {
        let cfg = smoke_config();
        let a = run_offline_experiment(&cfg).unwrap();
        let b = run_offline_experiment(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn all_methods_fit_on_a_tiny_trial() {
        let mut cfg = smoke_config();
        cfg.methods = vec![
            MethodSpec::Mom,
            MethodSpec::MomOgd,
            MethodSpec::MomPerceptron,
            MethodSpec::MomFtrl,
            MethodSpec::Ols,
            MethodSpec::Ridge,
            MethodSpec::SpoPlus,
            MethodSpec::MomKernel {
                kernel: KernelSpec::Rbf { gamma: 1.0 },
            },
        ];
        cfg.trials = 1;
        cfg.grids.lambda = vec![0.1];
        cfg.grids.step = vec![0.1];
        let rows = run_offline_experiment(&cfg).unwrap();
        assert_eq!(rows.len(), 8 * 4);
        for row in &rows {
            assert!(
                row.value.is_finite(),
                "{} {} failed: {}",
                row.method,
                row.metric,
                row.hyperparams
            );
        }
    }

    #[test]
    fn online_smoke_emits_checkpoint_rows() {
        let mut cfg = smoke_config();
        cfg.online.t = 30;
        cfg.online.checkpoints = vec![10];
        cfg.online.margin_floor = 0.2;
        cfg.online.margin_scale = Some(1.0);
        cfg.online.algorithms = vec![OnlineAlgorithm::Ogd, OnlineAlgorithm::Perceptron];
        cfg.trials = 1;
        let rows = run_online_experiment(&cfg).unwrap();
        // 2 algorithms × 2 checkpoints × 2 metrics.
        assert_eq!(rows.len(), 8);
        // Cumulative regret is non-decreasing across checkpoints.
        let regrets: Vec<f64> = rows
            .iter()
            .filter(|r| r.metric == "cum-regret" && r.method == "mom-ogd")
            .map(|r| r.value)
            .collect();
        assert!(regrets[0] <= regrets[1] + 1e-12);
    }

    #[test]
    fn tune_prefers_smaller_lambda_on_ties_and_skips_failures() {
        let cfg = smoke_config();
        let data = generate_trial_data(&cfg, 0).unwrap();
        let (fit_split, val_split) = data.train.split_at(18);
        let (point, loss) = tune(
            &MethodSpec::Mom,
            &cfg,
            fit_split,
            val_split,
            data.gt_norm,
            data.seed,
        )
        .unwrap();
        assert!(loss.is_finite());
        assert!(point.lambda.is_some());
    }
}
