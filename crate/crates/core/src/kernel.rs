//! Squared-distance cache and RBF kernel matrices.
//!
//! [`DistanceMatrix`] is computed once per training set. Moving to a new
//! kernel width only re-exponentiates it via [`rbf_kernel_matrix`].

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Symmetric `N x N` matrix of squared Euclidean distances, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    d2: Vec<f64>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d2[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.d2[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.d2
    }
}

/// Squared Euclidean distance, clamped at zero.
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().max(0.0)
}

/// All pairwise squared distances between the rows of a row-major matrix.
///
/// Rows are filled in parallel; each entry is computed by the same
/// sequential sum regardless of scheduling, so the result is deterministic.
/// The upper triangle is mirrored so the matrix is exactly symmetric.
pub fn squared_distance_matrix(features: &[f64], n_features: usize) -> DistanceMatrix {
    assert!(n_features > 0, "need at least one feature");
    let n = features.len() / n_features;
    let row = |i: usize| &features[i * n_features..(i + 1) * n_features];
    let mut d2 = vec![0.0; n * n];
    d2.par_chunks_mut(n).enumerate().for_each(|(i, out)| {
        let xi = row(i);
        for (j, slot) in out.iter_mut().enumerate() {
            let (a, b) = if i <= j { (xi, row(j)) } else { (row(j), xi) };
            *slot = if i == j { 0.0 } else { squared_distance(a, b) };
        }
    });
    DistanceMatrix { n, d2 }
}

/// Kernel matrix `exp(-gamma * d2)` for one value of gamma.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCache {
    gamma: f64,
    n: usize,
    k: Vec<f64>,
}

impl KernelCache {
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.k[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.k[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.k
    }
}

/// Builds the RBF kernel at `gamma` from cached distances.
///
/// `gamma` must be positive and finite. Large values underflow to zero
/// off the diagonal; the diagonal stays exactly one.
pub fn rbf_kernel_matrix(d2: &DistanceMatrix, gamma: f64) -> Result<KernelCache> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidConfig(format!("gamma must be positive, got {gamma}")));
    }
    Ok(kernel_unchecked(d2, gamma))
}

/// Like [`rbf_kernel_matrix`] but also accepts `gamma == 0` (the all-ones
/// kernel), which is only meaningful in tests and limit checks.
pub fn rbf_kernel_matrix_allow_zero(d2: &DistanceMatrix, gamma: f64) -> Result<KernelCache> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidConfig(format!("gamma must be non-negative, got {gamma}")));
    }
    Ok(kernel_unchecked(d2, gamma))
}

fn kernel_unchecked(d2: &DistanceMatrix, gamma: f64) -> KernelCache {
    let n = d2.n;
    let mut k = vec![0.0; n * n];
    k.par_chunks_mut(n.max(1))
        .zip(d2.d2.par_chunks(n.max(1)))
        .for_each(|(out, dist)| {
            for (o, &d) in out.iter_mut().zip(dist) {
                *o = (-gamma * d.max(0.0)).exp();
            }
        });
    KernelCache { gamma, n, k }
}

/// `exp(-gamma * d)` for each squared distance in `d2_row`.
pub fn rbf_kernel_row(d2_row: &[f64], gamma: f64) -> Vec<f64> {
    d2_row.iter().map(|&d| (-gamma * d.max(0.0)).exp()).collect()
}

/// Squared distances from `point` to every row of `rows` (row-major).
pub fn squared_distances_to(point: &[f64], rows: &[f64], n_features: usize) -> Vec<f64> {
    rows.chunks_exact(n_features)
        .map(|r| squared_distance(point, r))
        .collect()
}
