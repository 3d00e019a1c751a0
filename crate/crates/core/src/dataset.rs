//! Labelled datasets: synthetic generation, CSV ingestion, splits and folds.
//!
//! Labels are always binary, `+1` or `-1`. Features are stored row-major.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Feature matrix with one `±1` label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    n_features: usize,
    labels: Vec<i8>,
}

impl Dataset {
    /// Builds a dataset from row-major `features`.
    ///
    /// Requires at least two samples, at least one feature, finite values and
    /// labels drawn from `{-1, +1}`.
    pub fn new(features: Vec<f64>, n_features: usize, labels: Vec<i8>) -> Result<Self> {
        if labels.len() < 2 {
            return Err(Error::InvalidDataset(format!(
                "need at least 2 samples, got {}",
                labels.len()
            )));
        }
        Self::with_min_samples(features, n_features, labels)
    }

    fn with_min_samples(features: Vec<f64>, n_features: usize, labels: Vec<i8>) -> Result<Self> {
        if n_features == 0 {
            return Err(Error::InvalidDataset("need at least 1 feature".into()));
        }
        if labels.is_empty() {
            return Err(Error::EmptyInput);
        }
        if features.len() != labels.len() * n_features {
            return Err(Error::InvalidDataset(format!(
                "{} feature values do not fill {} rows of {} features",
                features.len(),
                labels.len(),
                n_features
            )));
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
            return Err(Error::InvalidDataset(format!("label {bad} is not -1 or +1")));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite feature value".into()));
        }
        Ok(Self {
            features,
            n_features,
            labels,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn labels_f64(&self) -> Vec<f64> {
        self.labels.iter().map(|&y| f64::from(y)).collect()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.n_features)
    }

    /// `(negatives, positives)`
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&y| y == 1).count();
        (self.labels.len() - pos, pos)
    }

    pub fn has_both_classes(&self) -> bool {
        let (neg, pos) = self.class_counts();
        neg > 0 && pos > 0
    }

    /// Rows at `indices`, in that order. A subset may hold a single sample.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        let mut features = Vec::with_capacity(indices.len() * self.n_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.n_samples() {
                return Err(Error::InvalidDataset(format!("index {i} out of range")));
            }
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset::with_min_samples(features, self.n_features, labels)
    }

    /// Sample indices grouped by class: `(negatives, positives)`, ascending.
    fn class_indices(&self) -> (Vec<usize>, Vec<usize>) {
        (0..self.n_samples()).partition(|&i| self.labels[i] == -1)
    }

    /// Writes the dataset as CSV with columns `x0..x{n-1},label`.
    ///
    /// Values use Rust's shortest round-trip formatting, so [`load_csv`]
    /// reads back exactly the same numbers.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (0..self.n_features).map(|c| format!("x{c}")).collect();
        header.push("label".into());
        w.write_record(&header)?;
        for (row, &y) in self.rows().zip(&self.labels) {
            let mut rec: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            rec.push(y.to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Synthetic data

/// Two balanced isotropic Gaussian blobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticConfig {
    pub n_samples: usize,
    pub dim: usize,
    /// Each class centre sits at distance `sep` from the origin, so the
    /// centres are `2 * sep` apart whatever the dimension.
    pub sep: f64,
    pub seed: u64,
}

pub const MAX_SYNTHETIC_DIM: usize = 64;

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_samples < 2 || !self.n_samples.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "n_samples must be even and at least 2, got {}",
                self.n_samples
            )));
        }
        if !(1..=MAX_SYNTHETIC_DIM).contains(&self.dim) {
            return Err(Error::InvalidConfig(format!(
                "dim must be in [1, {MAX_SYNTHETIC_DIM}], got {}",
                self.dim
            )));
        }
        if !(self.sep.is_finite() && self.sep >= 0.0) {
            return Err(Error::InvalidConfig(format!("sep must be >= 0, got {}", self.sep)));
        }
        Ok(())
    }
}

/// Class `+1` is drawn from `N(+sep*u, I)` and class `-1` from `N(-sep*u, I)`,
/// with `u = (1/sqrt(dim), ..., 1/sqrt(dim))`. Rows are shuffled. No label
/// noise and no redundant features.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<Dataset> {
    config.validate()?;
    let SyntheticConfig {
        n_samples,
        dim,
        sep,
        seed,
    } = *config;
    let mut rng = rng_from_seed(seed);
    let offset = sep / (dim as f64).sqrt();

    let mut features = Vec::with_capacity(n_samples * dim);
    let mut labels = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        let y: i8 = if i < n_samples / 2 { 1 } else { -1 };
        let centre = f64::from(y) * offset;
        for _ in 0..dim {
            let z: f64 = StandardNormal.sample(&mut rng);
            features.push(centre + z);
        }
        labels.push(y);
    }

    let mut order: Vec<usize> = (0..n_samples).collect();
    order.shuffle(&mut rng);
    let ds = Dataset::new(features, dim, labels)?;
    ds.subset(&order)
}

// ---------------------------------------------------------------------------
// CSV ingestion

/// How to turn a labelled CSV into a binary dataset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LoadOptions {
    pub label_column: String,
    /// Rows whose label equals this string become `+1`. Ignored when
    /// `positive_above` is set.
    pub positive_label: String,
    /// Keep only rows whose label is one of these (e.g. two iris species).
    pub keep_labels: Option<Vec<String>>,
    /// Numeric thresholding: label `> t` becomes `+1`, `<= t` becomes `-1`
    /// (wine quality uses `5`, heart disease uses `0`).
    pub positive_above: Option<f64>,
    /// Columns excluded from the features (ids and the like).
    pub drop_columns: Vec<String>,
    /// Skip rows with an empty or `?` cell instead of failing.
    pub drop_incomplete: bool,
}

impl LoadOptions {
    pub fn new(label_column: impl Into<String>, positive_label: impl Into<String>) -> Self {
        Self {
            label_column: label_column.into(),
            positive_label: positive_label.into(),
            ..Default::default()
        }
    }
}

fn is_missing(cell: &str) -> bool {
    let c = cell.trim();
    c.is_empty() || c == "?"
}

/// Reads a comma-separated file with a header row.
pub fn load_csv(path: &Path, options: &LoadOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_csv_from_reader(file, options)
}

pub fn load_csv_from_reader<R: std::io::Read>(reader: R, options: &LoadOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();

    let label_idx = headers
        .iter()
        .position(|h| h == options.label_column)
        .ok_or_else(|| Error::MissingLabelColumn(options.label_column.clone()))?;
    for col in &options.drop_columns {
        if !headers.iter().any(|h| h == col) {
            return Err(Error::MissingColumn(col.clone()));
        }
    }
    let feature_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| i != label_idx && !options.drop_columns.iter().any(|d| d == &headers[i]))
        .collect();
    if feature_cols.is_empty() {
        return Err(Error::InvalidDataset("no feature columns".into()));
    }

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let raw_label = record.get(label_idx).unwrap_or("");
        if let Some(keep) = &options.keep_labels {
            if !keep.iter().any(|k| k == raw_label) {
                continue;
            }
        }
        if options.drop_incomplete
            && (is_missing(raw_label) || feature_cols.iter().any(|&c| is_missing(record.get(c).unwrap_or(""))))
        {
            continue;
        }

        let y: i8 = match options.positive_above {
            Some(t) => {
                let v: f64 = raw_label.parse().map_err(|_| Error::NonNumericCell {
                    line,
                    column: options.label_column.clone(),
                    value: raw_label.to_string(),
                })?;
                if v > t {
                    1
                } else {
                    -1
                }
            }
            None if raw_label == options.positive_label => 1,
            None => -1,
        };

        for &c in &feature_cols {
            let cell = record.get(c).unwrap_or("");
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::NonNumericCell {
                    line,
                    column: headers[c].to_string(),
                    value: cell.to_string(),
                })?;
            features.push(v);
        }
        labels.push(y);
    }

    if !labels.contains(&1) || !labels.contains(&-1) {
        return Err(Error::SingleLabel);
    }
    Dataset::new(features, feature_cols.len(), labels)
}

// ---------------------------------------------------------------------------
// Splits

/// Number of samples out of `n` that go to the held-out side: `round(n * fraction)`.
fn held_out_count(n: usize, fraction: f64) -> usize {
    (n as f64 * fraction).round() as usize
}

/// Index-level train/test split. Returns `(train_indices, test_indices)`,
/// each sorted ascending.
pub fn split_indices(
    ds: &Dataset,
    test_fraction: f64,
    stratified: bool,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let groups: Vec<Vec<usize>> = if stratified {
        let (neg, pos) = ds.class_indices();
        vec![neg, pos]
    } else {
        vec![(0..ds.n_samples()).collect()]
    };

    let mut train = Vec::new();
    let mut test = Vec::new();
    for mut group in groups {
        let n = group.len();
        let k = held_out_count(n, test_fraction);
        if n < 2 || k == 0 || k == n {
            return Err(Error::DegenerateSplit(format!(
                "{n} samples with test fraction {test_fraction} leave one side empty"
            )));
        }
        group.shuffle(&mut rng);
        test.extend_from_slice(&group[..k]);
        train.extend_from_slice(&group[k..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Splits into `(train, test)`. With `stratified`, each class is split
/// separately with `round(class_size * test_fraction)` samples held out.
pub fn split_train_test(ds: &Dataset, test_fraction: f64, stratified: bool, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(ds, test_fraction, stratified, seed)?;
    Ok((ds.subset(&train)?, ds.subset(&test)?))
}

/// Disjoint folds covering every sample index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldAssignment {
    pub k: usize,
    pub indices: Vec<Vec<usize>>,
}

impl FoldAssignment {
    pub fn test_indices(&self, fold: usize) -> &[usize] {
        &self.indices[fold]
    }

    /// Every index not in `fold`, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .indices
            .iter()
            .enumerate()
            .filter(|&(f, _)| f != fold)
            .flat_map(|(_, idx)| idx.iter().copied())
            .collect();
        out.sort_unstable();
        out
    }
}

/// Stratified k-fold assignment.
///
/// Each class is shuffled and dealt round-robin over the folds; the dealing
/// position carries over from one class to the next so fold sizes differ by
/// at most one overall as well as per class.
pub fn stratified_kfold(ds: &Dataset, k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("k must be at least 2, got {k}")));
    }
    let (neg, pos) = ds.class_indices();
    for class in [&neg, &pos] {
        if class.len() < k {
            return Err(Error::ClassTooSmall { count: class.len(), k });
        }
    }
    let mut rng = rng_from_seed(seed);
    let mut indices = vec![Vec::new(); k];
    let mut slot = 0;
    for mut class in [neg, pos] {
        class.shuffle(&mut rng);
        for i in class {
            indices[slot % k].push(i);
            slot += 1;
        }
    }
    for fold in &mut indices {
        fold.sort_unstable();
    }
    Ok(FoldAssignment { k, indices })
}

// ---------------------------------------------------------------------------
// Standardization

/// Per-column affine map `x -> (x - mean) / std` fitted on one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    /// Population standard deviations. Zero marks a constant column,
    /// which is passed through unchanged.
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(ds: &Dataset) -> Self {
        let n = ds.n_samples() as f64;
        let d = ds.n_features();
        let mut means = vec![0.0; d];
        for row in ds.rows() {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);

        let mut vars = vec![0.0; d];
        for row in ds.rows() {
            for ((s, v), m) in vars.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let stds = vars
            .iter()
            .zip(&means)
            .map(|(s, m)| {
                let sd = (s / n).sqrt();
                if sd <= 1e-12 * m.abs().max(1.0) {
                    0.0
                } else {
                    sd
                }
            })
            .collect();
        Self { means, stds }
    }

    pub fn apply(&self, ds: &Dataset) -> Result<Dataset> {
        if ds.n_features() != self.means.len() {
            return Err(Error::DimensionMismatch {
                expected: self.means.len(),
                got: ds.n_features(),
            });
        }
        let d = ds.n_features();
        let features = ds
            .features()
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let c = k % d;
                if self.stds[c] == 0.0 {
                    v
                } else {
                    (v - self.means[c]) / self.stds[c]
                }
            })
            .collect();
        Dataset::with_min_samples(features, d, ds.labels().to_vec())
    }
}

/// Z-scores `train` with its own statistics and applies the same map to `others`.
pub fn standardize(train: &Dataset, others: &[&Dataset]) -> Result<(Dataset, Vec<Dataset>)> {
    let map = Standardizer::fit(train);
    let train_std = map.apply(train)?;
    let others = others.iter().map(|ds| map.apply(ds)).collect::<Result<Vec<_>>>()?;
    Ok((train_std, others))
}

/// Count of each raw label value in a CSV column, for inspecting a file before
/// choosing binarization flags.
pub fn label_histogram(path: &Path, label_column: &str) -> Result<BTreeMap<String, usize>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_path(path)?;
    let idx = rdr
        .headers()?
        .iter()
        .position(|h| h == label_column)
        .ok_or_else(|| Error::MissingLabelColumn(label_column.to_string()))?;
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        *out.entry(rec.get(idx).unwrap_or("").to_string()).or_insert(0) += 1;
    }
    Ok(out)
}
