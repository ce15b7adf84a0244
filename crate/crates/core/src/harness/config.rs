//! JSON experiment configuration.

use crate::datagen::{
    Family, FkGenConfig, GenConfig, GridSpec, KnapsackSpec, NoiseSpec, SpGenConfig,
};
use crate::error::{Error, Result};
use crate::features::KernelSpec;
use crate::lp::SolverOptions;
use crate::mom::StepSchedule;
use crate::online::OnlineAlgorithm;
use serde::{Deserialize, Serialize};

/// Noise amplitudes without the degree (which lives at the top level).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct NoiseAmplitudes {
    #[serde(default)]
    pub eps_bar: f64,
    #[serde(default)]
    pub alpha_bar: f64,
    #[serde(default)]
    pub eta_bar: f64,
}

/// One learning method in a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum MethodSpec {
    Mom,
    MomOgd,
    MomPerceptron,
    MomFtrl,
    Ols,
    Ridge,
    SpoPlus,
    MomKernel { kernel: KernelSpec },
}

impl MethodSpec {
    pub fn name(&self) -> String {
        match self {
            MethodSpec::Mom => "mom".into(),
            MethodSpec::MomOgd => "mom-ogd".into(),
            MethodSpec::MomPerceptron => "mom-perceptron".into(),
            MethodSpec::MomFtrl => "mom-ftrl".into(),
            MethodSpec::Ols => "ols".into(),
            MethodSpec::Ridge => "ridge".into(),
            MethodSpec::SpoPlus => "spo-plus".into(),
            MethodSpec::MomKernel { kernel } => match kernel {
                KernelSpec::Linear => "mom-kernel-linear".into(),
                KernelSpec::Polynomial { .. } => "mom-kernel-poly".into(),
                KernelSpec::Rbf { .. } => "mom-kernel-rbf".into(),
            },
        }
    }
}

/// Hyperparameter grids. Radii are multiples of the Frobenius norm of
/// the trial's ground-truth matrix, matching how projection balls are
/// tuned when the generator is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grids {
    pub lambda: Vec<f64>,
    pub step: Vec<f64>,
    pub radius_rel: Vec<f64>,
    pub gamma: Vec<f64>,
}

impl Default for Grids {
    fn default() -> Self {
        Self {
            lambda: vec![1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2],
            step: vec![1e-3, 1e-2, 1e-1, 1.0, 1e1],
            radius_rel: vec![0.8, 1.2, 1.6, 2.0],
            gamma: vec![0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0],
        }
    }
}

/// Offline fit knobs shared by the margin estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSection {
    pub max_iters: usize,
    pub tol_objective: f64,
    pub step_schedule: StepSchedule,
}

impl Default for FitSection {
    fn default() -> Self {
        Self {
            max_iters: 2000,
            tol_objective: 1e-6,
            step_schedule: StepSchedule::InverseSqrt,
        }
    }
}

/// Streaming-experiment section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnlineSection {
    /// Stream length.
    pub t: usize,
    pub algorithms: Vec<OnlineAlgorithm>,
    /// Step size; `None` derives the theory step from measured
    /// constants.
    pub eta: Option<f64>,
    /// Projection radius as a multiple of `‖Θ*‖_F`.
    pub radius_rel: f64,
    /// Generate a separable stream (costs exactly linear in z).
    pub separable: bool,
    /// Rescale the generating predictor to this margin.
    pub margin_scale: Option<f64>,
    /// Re-draw instances whose raw margin falls below this.
    pub margin_floor: f64,
    /// Steps at which cumulative metrics are emitted (the final step is
    /// always included).
    pub checkpoints: Vec<usize>,
    /// Initial norm of the naive diagnostic, relative to `‖Θ*‖_F`
    /// (zero starts at the origin).
    pub naive_init_rel: f64,
}

impl Default for OnlineSection {
    fn default() -> Self {
        Self {
            t: 1000,
            algorithms: vec![
                OnlineAlgorithm::Ogd,
                OnlineAlgorithm::Perceptron,
                OnlineAlgorithm::Ftrl,
            ],
            eta: None,
            radius_rel: 1.2,
            separable: true,
            margin_scale: None,
            margin_floor: 0.0,
            checkpoints: vec![],
            naive_init_rel: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub knapsack: KnapsackSpec,
    /// Covariate dimension for the shortest-path family (knapsack reads
    /// its own spec).
    #[serde(default = "default_sp_dim")]
    pub sp_covariate_dim: usize,
    #[serde(default = "default_deg")]
    pub deg: u32,
    #[serde(default)]
    pub noise: NoiseAmplitudes,
    pub t_train: usize,
    pub t_test: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_validation_fraction")]
    pub validation_fraction: f64,
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub grids: Grids,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub fit: FitSection,
    #[serde(default)]
    pub online: OnlineSection,
    /// Scale knapsack feasible regions into the unit ball.
    #[serde(default)]
    pub unit_ball: bool,
    /// Record wall-clock runtimes in result rows. Off by default so
    /// that identical configurations produce byte-identical outputs.
    #[serde(default)]
    pub record_timings: bool,
}

fn default_sp_dim() -> usize {
    6
}

fn default_deg() -> u32 {
    1
}

fn default_trials() -> usize {
    1
}

fn default_validation_fraction() -> f64 {
    0.2
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) || self.validation_fraction == 0.0 {
            return Err(Error::Config(
                "validation_fraction must lie strictly between 0 and 1".into(),
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        if self.t_train == 0 || self.t_test == 0 {
            return Err(Error::Config("t_train and t_test must be positive".into()));
        }
        self.noise_spec().validate()?;
        Ok(())
    }

    pub fn noise_spec(&self) -> NoiseSpec {
        NoiseSpec {
            deg: self.deg,
            eps_bar: self.noise.eps_bar,
            alpha_bar: self.noise.alpha_bar,
            eta_bar: self.noise.eta_bar,
        }
    }

    pub fn gen_config(&self) -> GenConfig {
        match self.family {
            Family::Sp => GenConfig::Sp(SpGenConfig {
                grid: self.grid,
                d: self.sp_covariate_dim,
                noise: self.noise_spec(),
                ..SpGenConfig::default()
            }),
            Family::Fk => GenConfig::Fk(FkGenConfig {
                spec: KnapsackSpec {
                    d: self.knapsack.d,
                    n_items: self.knapsack.n_items,
                    price_mode: self.knapsack.price_mode,
                },
                noise: self.noise_spec(),
                unit_ball: self.unit_ball,
                normalize_z: false,
            }),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("parsing config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &str) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("reading {path}: {e}")))?;
        Self::from_json(&text)
    }
}
