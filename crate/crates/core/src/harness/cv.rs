use std::io::Write;

use rayon::prelude::*;

use super::grid::select_hyperparameters;
use super::{run_one, ExperimentConfig, Method, ResultRow, RowKey, TuningSpec};
use crate::dataset::{stratified_kfold, Dataset, Standardizer};
use crate::error::{Error, Result};
use crate::metrics::{mean_std, METRIC_NAMES};
use crate::rng::mix_seed;

pub const REAL_CS: [f64; 7] = [0.1, 0.4, 0.7, 1.0, 1.3, 1.6, 1.9];
pub const REAL_GAMMAS: [f64; 7] = [0.005, 0.01, 0.05, 0.1, 0.5, 1.0, 1.5];

#[derive(Debug, Clone, PartialEq)]
pub struct CvSpec {
    pub k: usize,
    pub seed: u64,
    /// Z-score features with the statistics of each fold's training part.
    pub standardize: bool,
    pub cs: Vec<f64>,
    pub gammas: Vec<f64>,
    pub tuning: TuningSpec,
}

impl Default for CvSpec {
    fn default() -> Self {
        Self {
            k: 5,
            seed: 0,
            standardize: true,
            cs: REAL_CS.to_vec(),
            gammas: REAL_GAMMAS.to_vec(),
            tuning: TuningSpec {
                validation_fraction: 0.25,
                tuning_runs: 1,
            },
        }
    }
}

/// Mean and population standard deviation of each metric over folds.
#[derive(Debug, Clone, PartialEq)]
pub struct CvSummary {
    pub method: Method,
    pub folds: usize,
    /// `(metric, mean, std)` in [`METRIC_NAMES`] order.
    pub metrics: Vec<(&'static str, f64, f64)>,
}

impl CvSummary {
    pub fn get(&self, metric: &str) -> Option<(f64, f64)> {
        self.metrics
            .iter()
            .find(|(name, _, _)| *name == metric)
            .map(|&(_, m, s)| (m, s))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<CvSummary>,
}

/// `0.900±0.032`
pub fn format_mean_std(mean: f64, std: f64) -> String {
    format!("{mean:.3}±{std:.3}")
}

/// Stratified k-fold evaluation of both methods. Within each fold the
/// hyperparameters are tuned on validation splits of the training part
/// (SVM: `C` and `gamma`; OKSVM: `C` only), then the winner is retrained
/// on the whole training part and scored on the held-out fold.
pub fn run_real_cv(ds: &Dataset, name: &str, spec: &CvSpec, config: &ExperimentConfig) -> Result<CvResult> {
    spec.tuning.validate()?;
    if spec.cs.is_empty() || spec.gammas.is_empty() {
        return Err(Error::InvalidConfig("C and gamma grids must be nonempty".into()));
    }
    let folds = stratified_kfold(ds, spec.k, mix_seed(spec.seed, &[spec.k as u64]))?;
    let gamma0 = config.oksvm.gamma0;

    let per_fold: Vec<Result<[ResultRow; 2]>> = (0..spec.k)
        .into_par_iter()
        .map(|f| {
            let mut train = ds.subset(&folds.train_indices(f))?;
            let mut test = ds.subset(folds.test_indices(f))?;
            if spec.standardize {
                let map = Standardizer::fit(&train);
                train = map.apply(&train)?;
                test = map.apply(&test)?;
            }
            let tune_seed = mix_seed(spec.seed, &[f as u64]);
            let (svm_c, svm_gamma) = select_hyperparameters(
                Method::Svm,
                &train,
                &spec.cs,
                &spec.gammas,
                &spec.tuning,
                tune_seed,
                config,
            )?;
            let (ok_c, _) = select_hyperparameters(
                Method::Oksvm,
                &train,
                &spec.cs,
                &[gamma0],
                &spec.tuning,
                tune_seed,
                config,
            )?;
            let key = RowKey {
                dataset: name.to_string(),
                dim: ds.n_features(),
                sep: None,
                rep: 0,
                fold: Some(f),
                seed: spec.seed,
                standardized: spec.standardize,
            };
            Ok([
                run_one(Method::Svm, &train, &test, svm_c, svm_gamma, &key, config)?,
                run_one(Method::Oksvm, &train, &test, ok_c, gamma0, &key, config)?,
            ])
        })
        .collect();
    let mut rows = Vec::with_capacity(2 * spec.k);
    for pair in per_fold {
        rows.extend(pair?);
    }
    let summary = [Method::Svm, Method::Oksvm]
        .into_iter()
        .map(|method| summarize(&rows, method))
        .collect::<Result<_>>()?;
    Ok(CvResult { rows, summary })
}

fn summarize(rows: &[ResultRow], method: Method) -> Result<CvSummary> {
    let mine: Vec<&ResultRow> = rows.iter().filter(|r| r.method == method).collect();
    let metrics = METRIC_NAMES
        .iter()
        .map(|&name| {
            let values = mine.iter().map(|r| r.metrics.get(name)).collect::<Result<Vec<f64>>>()?;
            let (m, s) = mean_std(&values);
            Ok((name, m, s))
        })
        .collect::<Result<_>>()?;
    Ok(CvSummary {
        method,
        folds: mine.len(),
        metrics,
    })
}

/// CSV with columns `dataset,method,metric,mean,std,formatted`.
pub fn write_summary<W: Write>(name: &str, summary: &[CvSummary], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["dataset", "method", "metric", "mean", "std", "formatted"])?;
    for s in summary {
        for &(metric, mean, std) in &s.metrics {
            w.write_record([
                name,
                s.method.as_str(),
                metric,
                &mean.to_string(),
                &std.to_string(),
                &format_mean_std(mean, std),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("<summary>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, SyntheticConfig};

    #[test]
    fn formatting() {
        assert_eq!(format_mean_std(0.9, 0.0316), "0.900±0.032");
        assert_eq!(format_mean_std(1.0, 0.0), "1.000±0.000");
    }

    #[test]
    fn cv_on_easy_data() {
        let ds = generate_synthetic(&SyntheticConfig {
            n_samples: 60,
            dim: 2,
            sep: 3.0,
            seed: 5,
        })
        .unwrap();
        let spec = CvSpec {
            cs: vec![0.5, 1.0],
            gammas: vec![0.1, 0.5],
            ..Default::default()
        };
        let res = run_real_cv(&ds, "blobs", &spec, &ExperimentConfig::default()).unwrap();
        assert_eq!(res.rows.len(), 10);
        assert!(res.rows.iter().all(|r| r.standardized && r.fold.is_some()));
        for s in &res.summary {
            assert_eq!(s.folds, 5);
            assert!(s.get("acc").unwrap().0 > 0.95, "{s:?}");
        }
        let mut buf = Vec::new();
        write_summary("blobs", &res.summary, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 5);
    }

    #[test]
    fn too_small_for_k() {
        let ds = Dataset::new(vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0], 1, vec![1, 1, 1, -1, -1, -1]).unwrap();
        let err = run_real_cv(&ds, "x", &CvSpec::default(), &ExperimentConfig::default()).unwrap_err();
        assert!(matches!(err, Error::ClassTooSmall { count: 3, k: 5 }));
    }
}
