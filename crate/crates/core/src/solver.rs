//! Soft-margin dual SVM.
//!
//! The dual is solved by SMO on the minimisation form
//! `f(a) = 1/2 a'Qa - e'a`, `Q_ij = y_i y_j K_ij`, subject to `0 <= a_i <= C`
//! and `y'a = 0`. The solver keeps the gradient `G = Qa - e` up to date;
//! the dual value is `D(a) = -f(a) = 1/2 * sum_t a_t (1 - G_t)`.
//!
//! Two pair-selection rules are available (see [`PairSelection`]). Both move
//! along `a_i += y_i t`, `a_j -= y_j t`, which leaves `y'a` unchanged, and
//! clip `t` so both multipliers stay inside the box.

use rand::Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::kernel::{rbf_kernel_row, squared_distances_to, KernelCache};
use crate::rng::rng_from_seed;

/// Curvature floor for pairs whose kernel rows coincide.
const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairSelection {
    /// Maximal violating pair with second-order choice of the partner.
    /// Stops once the KKT gap `max_up(-y G) - min_low(-y G)` is within
    /// `kkt_tolerance`.
    SecondOrder,
    /// Platt-style sweeps over KKT violators with a random, seeded partner.
    /// Stops after `max_passes` consecutive sweeps without a change.
    RandomSweep { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub kkt_tolerance: f64,
    pub max_passes: usize,
    /// `None` means `10 * N^2` pair updates.
    pub max_iterations: Option<usize>,
    pub support_threshold: f64,
    pub equality_tolerance: f64,
    pub selection: PairSelection,
    /// Record the dual value after every pair update.
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            kkt_tolerance: 1e-3,
            max_passes: 5,
            max_iterations: None,
            support_threshold: 1e-8,
            equality_tolerance: 1e-10,
            selection: PairSelection::SecondOrder,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("kkt_tolerance", self.kkt_tolerance),
            ("support_threshold", self.support_threshold),
            ("equality_tolerance", self.equality_tolerance),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_passes == 0 {
            return Err(Error::InvalidConfig("max_passes must be positive".into()));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidConfig("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

/// Raw solution of the dual.
#[derive(Debug, Clone, PartialEq)]
pub struct DualSolution {
    pub alphas: Vec<f64>,
    pub dual_value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Dual value after each pair update, starting with the initial point.
    /// Empty unless `record_trace` was set.
    pub trace: Vec<f64>,
}

/// `sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K_ij`
pub fn dual_objective(alphas: &[f64], labels: &[f64], kernel: &KernelCache) -> f64 {
    let n = alphas.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alphas[i] == 0.0 {
            continue;
        }
        let row = kernel.row(i);
        let mut acc = 0.0;
        for j in 0..n {
            acc += alphas[j] * labels[j] * row[j];
        }
        quad += alphas[i] * labels[i] * acc;
    }
    alphas.iter().sum::<f64>() - 0.5 * quad
}

fn check_inputs(kernel: &KernelCache, labels: &[f64], c: f64) -> Result<()> {
    if labels.len() != kernel.n() {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: kernel.n(),
        });
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::InvalidConfig(format!("C must be positive, got {c}")));
    }
    if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(Error::InvalidDataset("labels must be -1 or +1".into()));
    }
    let has_pos = labels.iter().any(|&y| y > 0.0);
    let has_neg = labels.iter().any(|&y| y < 0.0);
    if !(has_pos && has_neg) {
        return Err(Error::SingleClass);
    }
    Ok(())
}

/// Checks that `alphas` satisfies the box and equality constraints.
pub fn check_feasible(alphas: &[f64], labels: &[f64], c: f64, equality_tolerance: f64) -> Result<()> {
    if alphas.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: alphas.len(),
            right: labels.len(),
        });
    }
    if let Some(a) = alphas.iter().find(|&&a| !(0.0..=c).contains(&a)) {
        return Err(Error::InvalidConfig(format!("multiplier {a} outside [0, {c}]")));
    }
    let eq: f64 = alphas.iter().zip(labels).map(|(a, y)| a * y).sum();
    if eq.abs() > equality_tolerance.max(1e-12 * c * alphas.len() as f64) {
        return Err(Error::InvalidConfig(format!("sum y_i a_i = {eq:e} is not zero")));
    }
    Ok(())
}

struct Smo<'a> {
    kernel: &'a KernelCache,
    y: &'a [f64],
    c: f64,
    alpha: Vec<f64>,
    grad: Vec<f64>,
}

impl<'a> Smo<'a> {
    fn new(kernel: &'a KernelCache, y: &'a [f64], c: f64, alpha: Vec<f64>) -> Self {
        let n = y.len();
        let mut grad = vec![-1.0; n];
        for j in 0..n {
            if alpha[j] == 0.0 {
                continue;
            }
            let coef = alpha[j] * y[j];
            let row = kernel.row(j);
            for t in 0..n {
                grad[t] += y[t] * coef * row[t];
            }
        }
        Self {
            kernel,
            y,
            c,
            alpha,
            grad,
        }
    }

    fn dual_value(&self) -> f64 {
        0.5 * self
            .alpha
            .iter()
            .zip(&self.grad)
            .map(|(a, g)| a * (1.0 - g))
            .sum::<f64>()
    }

    fn in_up(&self, t: usize) -> bool {
        (self.y[t] > 0.0 && self.alpha[t] < self.c) || (self.y[t] < 0.0 && self.alpha[t] > 0.0)
    }

    fn in_low(&self, t: usize) -> bool {
        (self.y[t] > 0.0 && self.alpha[t] > 0.0) || (self.y[t] < 0.0 && self.alpha[t] < self.c)
    }

    /// Moves along `a_i += y_i t`, `a_j -= y_j t` to the clipped minimiser.
    /// Returns the signed step actually taken.
    fn take_step(&mut self, i: usize, j: usize) -> f64 {
        let (yi, yj, c) = (self.y[i], self.y[j], self.c);
        let k = self.kernel;
        let curvature = (k.get(i, i) + k.get(j, j) - 2.0 * k.get(i, j)).max(TAU);
        let slope = yi * self.grad[i] - yj * self.grad[j];
        let mut t = -slope / curvature;

        // t-range keeping each multiplier in [0, C].
        let (ai, aj) = (self.alpha[i], self.alpha[j]);
        let (lo_i, hi_i) = if yi > 0.0 { (-ai, c - ai) } else { (ai - c, ai) };
        let (lo_j, hi_j) = if yj > 0.0 { (aj - c, aj) } else { (-aj, c - aj) };
        let lo = lo_i.max(lo_j);
        let hi = hi_i.min(hi_j);
        t = t.clamp(lo, hi);
        if t == 0.0 {
            return 0.0;
        }

        let snap = |v: f64| -> f64 {
            if v <= 0.0 {
                0.0
            } else if v >= c {
                c
            } else {
                v
            }
        };
        let new_i = snap(if t == lo_i || t == hi_i {
            // the box of `i` is binding: land exactly on it
            if (t == hi_i) == (yi > 0.0) {
                c
            } else {
                0.0
            }
        } else {
            ai + yi * t
        });
        let delta_i = new_i - ai;
        // keep y_i a_i + y_j a_j fixed
        let new_j = snap(if t == lo_j || t == hi_j {
            if (t == lo_j) == (yj > 0.0) {
                c
            } else {
                0.0
            }
        } else {
            aj - yi * yj * delta_i
        });
        let delta_j = new_j - aj;
        if delta_i == 0.0 && delta_j == 0.0 {
            return 0.0;
        }
        self.alpha[i] = new_i;
        self.alpha[j] = new_j;

        let (ci, cj) = (yi * delta_i, yj * delta_j);
        let (row_i, row_j) = (k.row(i), k.row(j));
        for t in 0..self.y.len() {
            self.grad[t] += self.y[t] * (ci * row_i[t] + cj * row_j[t]);
        }
        t
    }

    /// Second-order working-set selection. `None` once the KKT gap is within `tol`.
    fn select_pair(&self, tol: f64) -> Option<(usize, usize)> {
        let n = self.y.len();
        let mut i = usize::MAX;
        let mut gmax = f64::NEG_INFINITY;
        for t in 0..n {
            if self.in_up(t) {
                let v = -self.y[t] * self.grad[t];
                if v > gmax {
                    gmax = v;
                    i = t;
                }
            }
        }
        if i == usize::MAX {
            return None;
        }
        let mut j = usize::MAX;
        let mut gmin = f64::INFINITY;
        let mut best = f64::INFINITY;
        let k_ii = self.kernel.get(i, i);
        let row_i = self.kernel.row(i);
        for t in 0..n {
            if !self.in_low(t) {
                continue;
            }
            let v = -self.y[t] * self.grad[t];
            gmin = gmin.min(v);
            let b = gmax - v;
            if b > 0.0 {
                let a = (k_ii + self.kernel.get(t, t) - 2.0 * row_i[t]).max(TAU);
                let score = -(b * b) / a;
                if score < best {
                    best = score;
                    j = t;
                }
            }
        }
        if j == usize::MAX || gmax - gmin <= tol {
            None
        } else {
            Some((i, j))
        }
    }
}

/// Maximises the dual for a fixed kernel. Starts from `warm_start` when given
/// (it must be feasible), otherwise from zero.
///
/// Hitting the iteration cap is not an error: the best point so far is
/// returned with `converged == false`.
pub fn smo(
    kernel: &KernelCache,
    labels: &[f64],
    c: f64,
    config: &SolverConfig,
    warm_start: Option<&[f64]>,
) -> Result<DualSolution> {
    config.validate()?;
    check_inputs(kernel, labels, c)?;
    let n = labels.len();
    let start = match warm_start {
        Some(a) => {
            check_feasible(a, labels, c, config.equality_tolerance)?;
            a.to_vec()
        }
        None => vec![0.0; n],
    };
    let max_iter = config.max_iterations.unwrap_or_else(|| 10usize.saturating_mul(n * n));

    let mut smo = Smo::new(kernel, labels, c, start);
    let mut trace = Vec::new();
    if config.record_trace {
        trace.push(smo.dual_value());
    }

    let mut iterations = 0;
    let converged = match config.selection {
        PairSelection::SecondOrder => loop {
            let Some((i, j)) = smo.select_pair(config.kkt_tolerance) else {
                break true;
            };
            if iterations >= max_iter {
                break false;
            }
            iterations += 1;
            if smo.take_step(i, j) == 0.0 {
                // No progress possible along the best pair: numerically stuck.
                break smo.select_pair(config.kkt_tolerance).is_none();
            }
            if config.record_trace {
                trace.push(smo.dual_value());
            }
        },
        PairSelection::RandomSweep { seed } => {
            random_sweep(&mut smo, config, max_iter, seed, &mut iterations, &mut trace)
        }
    };

    let dual_value = smo.dual_value();
    Ok(DualSolution {
        alphas: smo.alpha,
        dual_value,
        iterations,
        converged,
        trace,
    })
}

fn random_sweep(
    smo: &mut Smo<'_>,
    config: &SolverConfig,
    max_iter: usize,
    seed: u64,
    iterations: &mut usize,
    trace: &mut Vec<f64>,
) -> bool {
    let n = smo.y.len();
    let tol = config.kkt_tolerance;
    let mut rng = rng_from_seed(seed);
    let mut b = 0.0;
    let mut passes = 0;
    while passes < config.max_passes {
        let mut changed = 0;
        for i in 0..n {
            // y_i E_i where E_i = f(x_i) - y_i under the running bias estimate
            let r_i = smo.grad[i] + smo.y[i] * b;
            let violates = (r_i < -tol && smo.alpha[i] < smo.c) || (r_i > tol && smo.alpha[i] > 0.0);
            if !violates {
                continue;
            }
            if *iterations >= max_iter {
                return false;
            }
            let mut j = rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let e_i = smo.y[i] * r_i;
            let e_j = smo.grad[j] * smo.y[j] + b;
            let (old_i, old_j) = (smo.alpha[i], smo.alpha[j]);
            *iterations += 1;
            if smo.take_step(i, j) == 0.0 {
                continue;
            }
            let (yi, yj, c) = (smo.y[i], smo.y[j], smo.c);
            let di = smo.alpha[i] - old_i;
            let dj = smo.alpha[j] - old_j;
            let k = smo.kernel;
            let b1 = b - e_i - yi * di * k.get(i, i) - yj * dj * k.get(i, j);
            let b2 = b - e_j - yi * di * k.get(i, j) - yj * dj * k.get(j, j);
            b = if smo.alpha[i] > 0.0 && smo.alpha[i] < c {
                b1
            } else if smo.alpha[j] > 0.0 && smo.alpha[j] < c {
                b2
            } else {
                0.5 * (b1 + b2)
            };
            if config.record_trace {
                trace.push(smo.dual_value());
            }
            changed += 1;
        }
        passes = if changed == 0 { passes + 1 } else { 0 };
    }
    true
}

/// Trained classifier: the multipliers plus the support vectors needed to
/// score new points.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub alphas: Vec<f64>,
    pub bias: f64,
    /// Indices `i` with `alphas[i] > support_threshold`.
    pub support_indices: Vec<usize>,
    pub gamma: f64,
    pub c: f64,
    pub n_features: usize,
    /// Row-major copies of the support vectors, in `support_indices` order.
    pub support_vectors: Vec<f64>,
    pub support_labels: Vec<i8>,
    pub dual_value: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Set when no multiplier was strictly inside the box and the bias was
    /// averaged over all support vectors instead.
    pub bias_fallback: bool,
}

impl SvmModel {
    pub fn n_support(&self) -> usize {
        self.support_indices.len()
    }

    /// Multiplier-weighted labels `y_s a_s` of the support vectors.
    pub fn dual_coefficients(&self) -> Vec<f64> {
        self.support_indices
            .iter()
            .zip(&self.support_labels)
            .map(|(&i, &y)| f64::from(y) * self.alphas[i])
            .collect()
    }

    pub fn decision_values(&self, test_features: &[f64], n_features: usize) -> Result<Vec<f64>> {
        decision_values(self, test_features, n_features)
    }

    pub fn predict(&self, test_features: &[f64], n_features: usize) -> Result<Vec<i8>> {
        predict(self, test_features, n_features)
    }
}

/// Bias from the KKT conditions: the mean of `y_i - sum_j a_j y_j K_ji` over
/// margin support vectors (`threshold < a_i < C - threshold`), or over all
/// support vectors when there are none. The flag reports the fallback.
pub fn bias_from_alphas(
    alphas: &[f64],
    labels: &[f64],
    c: f64,
    kernel: &KernelCache,
    threshold: f64,
) -> Result<(f64, bool)> {
    let support: Vec<usize> = (0..alphas.len()).filter(|&i| alphas[i] > threshold).collect();
    if support.is_empty() {
        return Err(Error::DegenerateModel);
    }
    let margin: Vec<usize> = support.iter().copied().filter(|&i| alphas[i] < c - threshold).collect();
    let (set, fallback) = if margin.is_empty() {
        (&support, true)
    } else {
        (&margin, false)
    };
    let sum: f64 = set
        .iter()
        .map(|&i| {
            let row = kernel.row(i);
            let f: f64 = support.iter().map(|&j| alphas[j] * labels[j] * row[j]).sum();
            labels[i] - f
        })
        .sum();
    Ok((sum / set.len() as f64, fallback))
}

pub fn compute_bias(model: &SvmModel, train: &Dataset, kernel: &KernelCache, config: &SolverConfig) -> Result<f64> {
    let (b, _) = bias_from_alphas(
        &model.alphas,
        &train.labels_f64(),
        model.c,
        kernel,
        config.support_threshold,
    )?;
    Ok(b)
}

/// Builds a model from a dual solution on `train`.
pub fn model_from_solution(
    solution: &DualSolution,
    train: &Dataset,
    kernel: &KernelCache,
    c: f64,
    config: &SolverConfig,
) -> Result<SvmModel> {
    let labels = train.labels_f64();
    let (bias, bias_fallback) = bias_from_alphas(&solution.alphas, &labels, c, kernel, config.support_threshold)?;
    let support_indices: Vec<usize> = (0..solution.alphas.len())
        .filter(|&i| solution.alphas[i] > config.support_threshold)
        .collect();
    let mut support_vectors = Vec::with_capacity(support_indices.len() * train.n_features());
    for &i in &support_indices {
        support_vectors.extend_from_slice(train.row(i));
    }
    let support_labels = support_indices.iter().map(|&i| train.labels()[i]).collect();
    Ok(SvmModel {
        alphas: solution.alphas.clone(),
        bias,
        support_indices,
        gamma: kernel.gamma(),
        c,
        n_features: train.n_features(),
        support_vectors,
        support_labels,
        dual_value: solution.dual_value,
        converged: solution.converged,
        iterations: solution.iterations,
        bias_fallback,
    })
}

/// Solves the dual on `train` with a precomputed kernel and wraps the result
/// into a model.
pub fn solve_dual(
    kernel: &KernelCache,
    train: &Dataset,
    c: f64,
    config: &SolverConfig,
    warm_start: Option<&[f64]>,
) -> Result<SvmModel> {
    if !train.has_both_classes() {
        return Err(Error::SingleClass);
    }
    let solution = smo(kernel, &train.labels_f64(), c, config, warm_start)?;
    model_from_solution(&solution, train, kernel, c, config)
}

/// `sum_{s in S} y_s a_s exp(-gamma |x - x_s|^2) + b` for every test row.
pub fn decision_values(model: &SvmModel, test_features: &[f64], n_features: usize) -> Result<Vec<f64>> {
    if n_features != model.n_features {
        return Err(Error::DimensionMismatch {
            expected: model.n_features,
            got: n_features,
        });
    }
    if !test_features.len().is_multiple_of(n_features) {
        return Err(Error::InvalidDataset("ragged test matrix".into()));
    }
    let coef = model.dual_coefficients();
    Ok(test_features
        .chunks_exact(n_features)
        .map(|x| {
            let d2 = squared_distances_to(x, &model.support_vectors, n_features);
            let k = rbf_kernel_row(&d2, model.gamma);
            coef.iter().zip(&k).map(|(a, k)| a * k).sum::<f64>() + model.bias
        })
        .collect())
}

/// Sign of a decision value; a score of exactly zero maps to `+1`.
pub fn sign_label(score: f64) -> i8 {
    if score >= 0.0 {
        1
    } else {
        -1
    }
}

pub fn predict(model: &SvmModel, test_features: &[f64], n_features: usize) -> Result<Vec<i8>> {
    Ok(decision_values(model, test_features, n_features)?
        .into_iter()
        .map(sign_label)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{rbf_kernel_matrix, squared_distance_matrix};
    use crate::oracle::solve_dual_bruteforce;
    use proptest::prelude::*;
    use rand::Rng;

    fn two_points(c: f64) -> (Dataset, KernelCache) {
        let ds = Dataset::new(vec![0.0, 1.0], 1, vec![1, -1]).unwrap();
        let k = rbf_kernel_matrix(&squared_distance_matrix(ds.features(), 1), 1.0).unwrap();
        let _ = c;
        (ds, k)
    }

    fn random_problem(seed: u64, n: usize, d: usize) -> (Dataset, f64, f64) {
        let mut rng = rng_from_seed(seed);
        let features: Vec<f64> = (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut labels: Vec<i8> = (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
        labels[0] = 1;
        labels[1] = -1;
        let gamma = rng.random_range(0.1..2.0);
        let c = rng.random_range(0.2..5.0);
        (Dataset::new(features, d, labels).unwrap(), gamma, c)
    }

    #[test]
    fn dual_objective_small_cases() {
        let (ds, k) = two_points(1.0);
        let y = ds.labels_f64();
        assert_eq!(dual_objective(&[0.0, 0.0], &y, &k), 0.0);
        let a = 0.7;
        let k12 = k.get(0, 1);
        let expected = 2.0 * a - a * a * (1.0 - k12);
        assert!((dual_objective(&[a, a], &y, &k) - expected).abs() < 1e-14);
    }

    #[test]
    fn dual_objective_matches_naive_loop() {
        let (ds, gamma, _) = random_problem(17, 5, 3);
        let k = rbf_kernel_matrix(&squared_distance_matrix(ds.features(), 3), gamma).unwrap();
        let y = ds.labels_f64();
        let a = [0.3, 0.1, 0.7, 0.0, 0.25];
        let mut naive = a.iter().sum::<f64>();
        for i in 0..5 {
            for j in 0..5 {
                naive -= 0.5 * a[i] * a[j] * y[i] * y[j] * k.get(i, j);
            }
        }
        assert!((dual_objective(&a, &y, &k) - naive).abs() < 1e-10);
    }

    #[test]
    fn analytic_two_point_solution() {
        let (ds, k) = two_points(10.0);
        let m = solve_dual(&k, &ds, 10.0, &SolverConfig::default(), None).unwrap();
        let expected = 1.0 / (1.0 - (-1.0f64).exp());
        assert!((m.alphas[0] - expected).abs() < 1e-6, "{:?}", m.alphas);
        assert!((m.alphas[1] - expected).abs() < 1e-6);
        assert!((m.dual_value - expected).abs() < 1e-6);
        assert!(m.bias.abs() < 1e-12);
        assert!(m.converged);

        let m = solve_dual(&k, &ds, 1.0, &SolverConfig::default(), None).unwrap();
        assert_eq!(m.alphas, vec![1.0, 1.0]);
        assert!(m.bias_fallback);
    }

    #[test]
    fn single_class_rejected() {
        let ds = Dataset::new(vec![0.0, 1.0, 2.0], 1, vec![1, 1, 1]).unwrap();
        let k = rbf_kernel_matrix(&squared_distance_matrix(ds.features(), 1), 1.0).unwrap();
        let err = solve_dual(&k, &ds, 1.0, &SolverConfig::default(), None).unwrap_err();
        assert_eq!(err.to_string(), "single-class input");
    }

    #[test]
    fn infeasible_warm_start_rejected() {
        let (ds, k) = two_points(1.0);
        let cfg = SolverConfig::default();
        assert!(solve_dual(&k, &ds, 1.0, &cfg, Some(&[0.5, 0.0])).is_err());
        assert!(solve_dual(&k, &ds, 1.0, &cfg, Some(&[2.0, 2.0])).is_err());
    }

    #[test]
    fn iteration_cap_flags_unconverged() {
        let (ds, gamma, c) = random_problem(3, 30, 2);
        let k = rbf_kernel_matrix(&squared_distance_matrix(ds.features(), 2), gamma).unwrap();
        let cfg = SolverConfig {
            max_iterations: Some(1),
            ..Default::default()
        };
        let m = solve_dual(&k, &ds, c, &cfg, None).unwrap();
        assert!(!m.converged);
        assert_eq!(m.iterations, 1);
    }

    #[test]
    fn bias_matches_three_point_kkt() {
        // Three collinear points; the oracle's multipliers give the bias
        // through any margin support vector.
        let ds = Dataset::new(vec![0.0, 0.8, 2.0], 1, vec![1, -1, 1]).unwrap();
        let k = rbf_kernel_matrix(&squared_distance_matrix(ds.features(), 1), 0.5).unwrap();
        let y = ds.labels_f64();
        let c = 100.0;
        let cfg = SolverConfig {
            kkt_tolerance: 1e-12,
            ..Default::default()
        };
        let m = solve_dual(&k, &ds, c, &cfg, None).unwrap();
        let oracle = solve_dual_bruteforce(&k, &y, c, 200_000);
        for i in 0..3 {
            if oracle[i] > 1e-6 && oracle[i] < c - 1e-6 {
                let f: f64 = (0..3).map(|j| oracle[j] * y[j] * k.get(j, i)).sum();
                assert!((m.bias - (y[i] - f)).abs() < 1e-8, "{} vs {}", m.bias, y[i] - f);
            }
        }
        assert!(!m.bias_fallback);
    }

    #[test]
    fn random_sweep_variant_solves_two_points() {
        let (ds, k) = two_points(10.0);
        let cfg = SolverConfig {
            selection: PairSelection::RandomSweep { seed: 1 },
            kkt_tolerance: 1e-9,
            ..Default::default()
        };
        let m = solve_dual(&k, &ds, 10.0, &cfg, None).unwrap();
        let expected = 1.0 / (1.0 - (-1.0f64).exp());
        assert!((m.alphas[0] - expected).abs() < 1e-6);
    }

    #[test]
    fn mirrored_points_give_zero_bias_and_score_b_at_midpoint() {
        let ds = Dataset::new(vec![-1.0, 2.0, 1.0, -2.0], 2, vec![1, -1]).unwrap();
        let k = rbf_kernel_matrix(&squared_distance_matrix(ds.features(), 2), 0.3).unwrap();
        let m = solve_dual(&k, &ds, 10.0, &SolverConfig::default(), None).unwrap();
        assert!(m.bias.abs() < 1e-12);
        let s = m.decision_values(&[0.0, 0.0, 3.0, 1.5], 2).unwrap();
        assert!((s[0] - m.bias).abs() < 1e-12);
        assert!((s[1] - m.bias).abs() < 1e-12);
    }

    #[test]
    fn predict_sign_rule() {
        assert_eq!(sign_label(3.2), 1);
        assert_eq!(sign_label(-0.1), -1);
        assert_eq!(sign_label(0.0), 1);
        assert_eq!(sign_label(-0.0), 1);
    }

    #[test]
    fn decision_dimension_mismatch() {
        let (ds, k) = two_points(1.0);
        let m = solve_dual(&k, &ds, 1.0, &SolverConfig::default(), None).unwrap();
        assert!(matches!(
            m.decision_values(&[0.0, 0.0], 2),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn trace_is_monotone_for_both_selections() {
        let (ds, gamma, c) = random_problem(21, 40, 3);
        let k = rbf_kernel_matrix(&squared_distance_matrix(ds.features(), 3), gamma).unwrap();
        for selection in [PairSelection::SecondOrder, PairSelection::RandomSweep { seed: 4 }] {
            let cfg = SolverConfig {
                record_trace: true,
                selection,
                ..Default::default()
            };
            let sol = smo(&k, &ds.labels_f64(), c, &cfg, None).unwrap();
            assert!(sol.trace.len() > 1);
            for w in sol.trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-12, "{selection:?}: {} -> {}", w[0], w[1]);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn constraints_hold_exactly(seed in any::<u64>(), n in 2usize..30) {
            let (ds, gamma, c) = random_problem(seed, n, 2);
            let k = rbf_kernel_matrix(&squared_distance_matrix(ds.features(), 2), gamma).unwrap();
            let m = solve_dual(&k, &ds, c, &SolverConfig::default(), None).unwrap();
            let y = ds.labels_f64();
            prop_assert!(m.alphas.iter().all(|&a| (0.0..=c).contains(&a)));
            let eq: f64 = m.alphas.iter().zip(&y).map(|(a, y)| a * y).sum();
            prop_assert!(eq.abs() <= 1e-10, "sum y a = {eq:e}");
            prop_assert!(!m.support_indices.is_empty());
        }

        #[test]
        fn warm_start_never_loses_dual_value(seed in any::<u64>()) {
            let (ds, gamma, c) = random_problem(seed, 12, 3);
            let d2 = squared_distance_matrix(ds.features(), 3);
            let y = ds.labels_f64();
            let first = smo(&rbf_kernel_matrix(&d2, gamma).unwrap(), &y, c, &SolverConfig::default(), None).unwrap();
            let k2 = rbf_kernel_matrix(&d2, gamma * 1.7).unwrap();
            let start_value = dual_objective(&first.alphas, &y, &k2);
            let warm = smo(&k2, &y, c, &SolverConfig::default(), Some(&first.alphas)).unwrap();
            prop_assert!(warm.dual_value >= start_value - 1e-12);
        }

        #[test]
        fn support_set_sum_equals_full_sum(seed in any::<u64>()) {
            let (ds, gamma, c) = random_problem(seed, 15, 2);
            let k = rbf_kernel_matrix(&squared_distance_matrix(ds.features(), 2), gamma).unwrap();
            let m = solve_dual(&k, &ds, c, &SolverConfig::default(), None).unwrap();
            let scores = m.decision_values(ds.features(), 2).unwrap();
            for i in 0..ds.n_samples() {
                let full: f64 = (0..ds.n_samples())
                    .map(|j| m.alphas[j] * f64::from(ds.labels()[j]) * k.get(i, j))
                    .sum::<f64>() + m.bias;
                prop_assert!((scores[i] - full).abs() < 1e-6);
            }
            let labels = m.predict(ds.features(), 2).unwrap();
            for (l, s) in labels.iter().zip(&scores) {
                prop_assert_eq!(*l, sign_label(*s));
            }
        }

        #[test]
        fn feature_rescaling_with_gamma_is_invariant(seed in any::<u64>(), s in 0.25f64..4.0) {
            let (ds, gamma, c) = random_problem(seed, 10, 2);
            let scaled: Vec<f64> = ds.features().iter().map(|v| v * s).collect();
            let ds2 = Dataset::new(scaled, 2, ds.labels().to_vec()).unwrap();
            let k1 = rbf_kernel_matrix(&squared_distance_matrix(ds.features(), 2), gamma).unwrap();
            let k2 = rbf_kernel_matrix(&squared_distance_matrix(ds2.features(), 2), gamma / (s * s)).unwrap();
            for (a, b) in k1.as_slice().iter().zip(k2.as_slice()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let tight = SolverConfig { kkt_tolerance: 1e-12, ..Default::default() };
            let m1 = solve_dual(&k1, &ds, c, &tight, None).unwrap();
            let m2 = solve_dual(&k2, &ds2, c, &tight, None).unwrap();
            for (a, b) in m1.alphas.iter().zip(&m2.alphas) {
                prop_assert!((a - b).abs() < 1e-6, "{a} vs {b}");
            }
            let s1 = m1.decision_values(ds.features(), 2).unwrap();
            let p1 = m1.predict(ds.features(), 2).unwrap();
            let p2 = m2.predict(ds2.features(), 2).unwrap();
            for i in 0..p1.len() {
                if s1[i].abs() > 1e-6 {
                    prop_assert_eq!(p1[i], p2[i]);
                }
            }
        }
    }
}
