//! Experiment runners: synthetic grids, real-data cross-validation and
//! aggregation into plot-ready CSV.
//!
//! Every unit of work (grid cell, repetition, fold) runs as an independent
//! rayon task. Results are collected in task order, never completion order,
//! so output depends only on the inputs and seeds.

mod cv;
mod grid;
mod heatmap;
mod rows;

use std::time::Instant;

pub use cv::{format_mean_std, run_real_cv, write_summary, CvResult, CvSpec, CvSummary, REAL_CS, REAL_GAMMAS};
pub use grid::{
    fixed_cell_seed, run_fixed_grid, run_tuned_grid, synthetic_split, tuned_cell_seed, GridSpec, TuningSpec, GRID_CS,
    GRID_DIMS, GRID_GAMMAS, GRID_SEPS,
};
pub use heatmap::{emit_heatmap, write_heatmap_csv, Axis, HeatCell, HeatValue, KeyPart};
pub use rows::{read_rows, read_rows_file, write_rows, write_rows_file, Method, ResultRow};

use crate::dataset::Dataset;
use crate::error::Result;
use crate::metrics::{evaluate, MetricsRecord};
use crate::optimizer::{train_oksvm, train_svm_baseline, OksvmConfig, Termination};
use crate::solver::{SolverConfig, SvmModel};

/// Training settings shared by every run of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ExperimentConfig {
    pub oksvm: OksvmConfig,
    pub solver: SolverConfig,
    /// Record wall-clock time per row.
    pub timing: bool,
}

/// A trained model plus what the result row needs to know about training.
#[derive(Debug, Clone)]
pub struct Fit {
    pub model: SvmModel,
    pub converged: bool,
    pub terminated_by: Option<Termination>,
    pub outer_steps: usize,
}

/// Trains `method` at `(c, gamma0)`. For OKSVM `gamma0` is the starting width.
pub fn fit(method: Method, train: &Dataset, c: f64, gamma0: f64, config: &ExperimentConfig) -> Result<Fit> {
    match method {
        Method::Svm => {
            let model = train_svm_baseline(train, c, gamma0, &config.solver)?;
            Ok(Fit {
                converged: model.converged,
                model,
                terminated_by: None,
                outer_steps: 0,
            })
        }
        Method::Oksvm => {
            let oksvm = OksvmConfig { gamma0, ..config.oksvm };
            let (model, state) = train_oksvm(train, c, &oksvm, &config.solver)?;
            let terminated_by = state.terminated_by;
            Ok(Fit {
                converged: model.converged && terminated_by != Some(Termination::StepCap),
                model,
                terminated_by,
                outer_steps: state.t,
            })
        }
    }
}

/// Scores `test` with `model`: labels from the sign, AUC from the raw scores.
pub fn evaluate_model(model: &SvmModel, test: &Dataset) -> Result<MetricsRecord> {
    let scores = model.decision_values(test.features(), test.n_features())?;
    let predicted: Vec<i8> = scores.iter().map(|&s| crate::solver::sign_label(s)).collect();
    evaluate(test.labels(), &predicted, &scores)
}

/// Identifies where a row came from.
#[derive(Debug, Clone)]
pub(crate) struct RowKey {
    pub dataset: String,
    pub dim: usize,
    pub sep: Option<f64>,
    pub rep: usize,
    pub fold: Option<usize>,
    pub seed: u64,
    pub standardized: bool,
}

/// Trains, evaluates and packages one row.
pub(crate) fn run_one(
    method: Method,
    train: &Dataset,
    test: &Dataset,
    c: f64,
    gamma0: f64,
    key: &RowKey,
    config: &ExperimentConfig,
) -> Result<ResultRow> {
    let start = Instant::now();
    let fitted = fit(method, train, c, gamma0, config)?;
    let metrics = evaluate_model(&fitted.model, test)?;
    let elapsed = start.elapsed().as_secs_f64();
    Ok(ResultRow {
        method,
        dataset: key.dataset.clone(),
        dim: key.dim,
        sep: key.sep,
        c,
        gamma0,
        rep: key.rep,
        fold: key.fold,
        seed: key.seed,
        standardized: key.standardized,
        metrics,
        final_gamma: fitted.model.gamma,
        converged: fitted.converged,
        terminated_by: fitted.terminated_by,
        outer_steps: fitted.outer_steps,
        wall_time: config.timing.then_some(elapsed),
    })
}
