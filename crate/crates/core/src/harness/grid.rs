use rayon::prelude::*;

use super::{fit, run_one, ExperimentConfig, Method, ResultRow, RowKey};
use crate::dataset::{generate_synthetic, split_train_test, Dataset, SyntheticConfig};
use crate::error::{Error, Result};
use crate::metrics::evaluate;
use crate::rng::mix_seed;
use crate::solver::sign_label;

pub const GRID_DIMS: [usize; 7] = [2, 3, 4, 5, 6, 7, 8];
pub const GRID_SEPS: [f64; 5] = [0.6, 0.8, 1.0, 1.2, 1.4];
pub const GRID_CS: [f64; 3] = [0.5, 1.0, 1.5];
pub const GRID_GAMMAS: [f64; 6] = [0.1, 0.5, 0.9, 1.3, 1.7, 2.1];

/// Axes and repetitions of a synthetic experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub dims: Vec<usize>,
    pub seps: Vec<f64>,
    pub cs: Vec<f64>,
    pub gammas: Vec<f64>,
    pub repetitions: usize,
    pub base_seed: u64,
    pub test_fraction: f64,
    pub n_samples: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            dims: GRID_DIMS.to_vec(),
            seps: GRID_SEPS.to_vec(),
            cs: GRID_CS.to_vec(),
            gammas: GRID_GAMMAS.to_vec(),
            repetitions: 20,
            base_seed: 0,
            test_fraction: 0.5,
            n_samples: 200,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.seps.is_empty() || self.cs.is_empty() || self.gammas.is_empty() {
            return Err(Error::InvalidConfig("every grid axis needs at least one value".into()));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig("repetitions must be at least 1".into()));
        }
        if let Some(v) = self
            .cs
            .iter()
            .chain(&self.gammas)
            .find(|v| !(**v > 0.0 && v.is_finite()))
        {
            return Err(Error::InvalidConfig(format!(
                "C and gamma values must be positive, got {v}"
            )));
        }
        for &dim in &self.dims {
            for &sep in &self.seps {
                SyntheticConfig {
                    n_samples: self.n_samples,
                    dim,
                    sep,
                    seed: 0,
                }
                .validate()?;
            }
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidConfig("test fraction must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// How hyperparameters are tuned inside each repetition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningSpec {
    /// Share of the training portion held out for validation.
    pub validation_fraction: f64,
    /// Validation re-splits averaged per candidate.
    pub tuning_runs: usize,
}

impl Default for TuningSpec {
    fn default() -> Self {
        Self {
            validation_fraction: 0.25,
            tuning_runs: 10,
        }
    }
}

impl TuningSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::InvalidConfig("validation fraction must lie in (0, 1)".into()));
        }
        if self.tuning_runs == 0 {
            return Err(Error::InvalidConfig("tuning_runs must be at least 1".into()));
        }
        Ok(())
    }
}

/// Seed of one fixed-grid cell: `mix_seed(base, [dim, sep, C, gamma index, rep])`
/// with reals mixed in by their bit patterns.
pub fn fixed_cell_seed(base: u64, dim: usize, sep: f64, c: f64, gamma_index: usize, rep: usize) -> u64 {
    mix_seed(
        base,
        &[dim as u64, sep.to_bits(), c.to_bits(), gamma_index as u64, rep as u64],
    )
}

/// Seed of one tuned-grid cell: `mix_seed(base, [dim, sep, rep])`.
pub fn tuned_cell_seed(base: u64, dim: usize, sep: f64, rep: usize) -> u64 {
    mix_seed(base, &[dim as u64, sep.to_bits(), rep as u64])
}

/// The dataset of a cell, split stratified into `(train, test)`.
pub fn synthetic_split(
    n_samples: usize,
    dim: usize,
    sep: f64,
    test_fraction: f64,
    cell_seed: u64,
) -> Result<(Dataset, Dataset)> {
    let ds = generate_synthetic(&SyntheticConfig {
        n_samples,
        dim,
        sep,
        seed: mix_seed(cell_seed, &[1]),
    })?;
    split_train_test(&ds, test_fraction, true, mix_seed(cell_seed, &[2]))
}

/// Both methods at the same `(C, gamma)` on every cell and repetition.
/// Produces `2 * |dims| * |seps| * |cs| * |gammas| * R` rows.
pub fn run_fixed_grid(spec: &GridSpec, config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    let mut cells = Vec::new();
    for &dim in &spec.dims {
        for &sep in &spec.seps {
            for &c in &spec.cs {
                for (gi, &gamma) in spec.gammas.iter().enumerate() {
                    for rep in 0..spec.repetitions {
                        cells.push((dim, sep, c, gi, gamma, rep));
                    }
                }
            }
        }
    }
    let per_cell: Vec<Result<[ResultRow; 2]>> = cells
        .par_iter()
        .map(|&(dim, sep, c, gi, gamma, rep)| {
            let seed = fixed_cell_seed(spec.base_seed, dim, sep, c, gi, rep);
            let (train, test) = synthetic_split(spec.n_samples, dim, sep, spec.test_fraction, seed)?;
            let key = RowKey {
                dataset: "synthetic".into(),
                dim,
                sep: Some(sep),
                rep,
                fold: None,
                seed,
                standardized: false,
            };
            Ok([
                run_one(Method::Svm, &train, &test, c, gamma, &key, config)?,
                run_one(Method::Oksvm, &train, &test, c, gamma, &key, config)?,
            ])
        })
        .collect();
    let mut rows = Vec::with_capacity(per_cell.len() * 2);
    for pair in per_cell {
        rows.extend(pair?);
    }
    Ok(rows)
}

/// Mean validation F1 of `method` at `(c, gamma)` over the given splits.
fn validation_f1(
    method: Method,
    splits: &[(Dataset, Dataset)],
    c: f64,
    gamma: f64,
    config: &ExperimentConfig,
) -> Result<f64> {
    let mut total = 0.0;
    for (train, val) in splits {
        let model = fit(method, train, c, gamma, config)?.model;
        let scores = model.decision_values(val.features(), val.n_features())?;
        let predicted: Vec<i8> = scores.iter().map(|&s| sign_label(s)).collect();
        total += evaluate(val.labels(), &predicted, &scores)?.f1;
    }
    Ok(total / splits.len() as f64)
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Grid search by mean validation F1. Candidates are visited in ascending
/// `(C, gamma)` order and only a strictly better score replaces the
/// incumbent, so ties go to the smallest pair.
pub(crate) fn select_hyperparameters(
    method: Method,
    train: &Dataset,
    cs: &[f64],
    gammas: &[f64],
    tuning: &TuningSpec,
    seed: u64,
    config: &ExperimentConfig,
) -> Result<(f64, f64)> {
    let splits = (0..tuning.tuning_runs)
        .map(|run| {
            split_train_test(
                train,
                tuning.validation_fraction,
                true,
                mix_seed(seed, &[3, run as u64]),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let mut candidates = Vec::new();
    for &c in &sorted(cs) {
        for &g in &sorted(gammas) {
            candidates.push((c, g));
        }
    }
    let scores: Vec<Result<f64>> = candidates
        .par_iter()
        .map(|&(c, g)| validation_f1(method, &splits, c, g, config))
        .collect();
    let mut best = (f64::NEG_INFINITY, candidates[0]);
    for (score, cand) in scores.into_iter().zip(candidates) {
        let score = score?;
        if score > best.0 {
            best = (score, cand);
        }
    }
    Ok(best.1)
}

/// Per repetition, SVM tunes `(C, gamma)` and OKSVM tunes `C` (starting
/// from `config.oksvm.gamma0`) on validation splits of the training part,
/// then both retrain on the whole training part and are scored on test.
/// Produces `2 * |dims| * |seps| * R` rows.
pub fn run_tuned_grid(spec: &GridSpec, tuning: &TuningSpec, config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    spec.validate()?;
    tuning.validate()?;
    let mut cells = Vec::new();
    for &dim in &spec.dims {
        for &sep in &spec.seps {
            for rep in 0..spec.repetitions {
                cells.push((dim, sep, rep));
            }
        }
    }
    let gamma0 = config.oksvm.gamma0;
    let per_cell: Vec<Result<[ResultRow; 2]>> = cells
        .par_iter()
        .map(|&(dim, sep, rep)| {
            let seed = tuned_cell_seed(spec.base_seed, dim, sep, rep);
            let (train, test) = synthetic_split(spec.n_samples, dim, sep, spec.test_fraction, seed)?;
            let key = RowKey {
                dataset: "synthetic".into(),
                dim,
                sep: Some(sep),
                rep,
                fold: None,
                seed,
                standardized: false,
            };
            let (svm_c, svm_gamma) =
                select_hyperparameters(Method::Svm, &train, &spec.cs, &spec.gammas, tuning, seed, config)?;
            let (ok_c, _) = select_hyperparameters(Method::Oksvm, &train, &spec.cs, &[gamma0], tuning, seed, config)?;
            Ok([
                run_one(Method::Svm, &train, &test, svm_c, svm_gamma, &key, config)?,
                run_one(Method::Oksvm, &train, &test, ok_c, gamma0, &key, config)?,
            ])
        })
        .collect();
    let mut rows = Vec::with_capacity(per_cell.len() * 2);
    for pair in per_cell {
        rows.extend(pair?);
    }
    Ok(rows)
}
