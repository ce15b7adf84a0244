//! Experiment orchestration, hyperparameter tuning, and result
//! emission. Trials are generated independently (per-trial seeds and
//! RNG streams), run in a worker pool, and reduced in deterministic
//! order: identical configurations produce byte-identical output files
//! unless wall-clock timing capture is switched on.

mod config;
mod emit;
mod experiment;

pub use config::{
    ExperimentConfig, FitSection, Grids, MethodSpec, NoiseAmplitudes, OnlineSection,
};
pub use emit::{emit, emit_to_file, parse_csv, sort_rows, EmitFormat, ResultRow};
pub use experiment::{
    evaluate_model, fit_method, fit_single, grid_points, online_trial_stream,
    run_offline_experiment, run_online_experiment, trial_seed, tune, Evaluation, FittedModel,
    HyperPoint, OnlineTrial,
};
