//! Reference dual solver for tests: accelerated projected-gradient ascent
//! with an explicit projection onto `{0 <= a <= C, y'a = 0}`.
//!
//! Slow (dense `O(N^2)` per step) and meant for `N <= 16`.

use crate::kernel::KernelCache;

/// Euclidean projection of `v` onto the feasible set of the dual.
///
/// The projection is `a_i = clip(v_i - lambda * y_i, 0, C)` for the
/// `lambda` that zeroes `sum y_i a_i`; that sum is non-increasing in
/// `lambda`, so `lambda` is found by bisection to machine precision.
pub fn project_feasible(v: &[f64], labels: &[f64], c: f64) -> Vec<f64> {
    let eval = |lambda: f64| -> f64 {
        v.iter()
            .zip(labels)
            .map(|(&vi, &yi)| yi * (vi - lambda * yi).clamp(0.0, c))
            .sum()
    };
    let bound = v.iter().fold(0.0f64, |m, x| m.max(x.abs())) + c + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if eval(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    v.iter()
        .zip(labels)
        .map(|(&vi, &yi)| (vi - lambda * yi).clamp(0.0, c))
        .collect()
}

/// Maximises the dual by FISTA with gradient-based restarts, starting from
/// `a = 0`. Every iterate is a projection, so every iterate is feasible.
pub fn solve_dual_bruteforce(kernel: &KernelCache, labels: &[f64], c: f64, steps: usize) -> Vec<f64> {
    let n = labels.len();
    // Gershgorin bound on the largest eigenvalue of Q.
    let lipschitz = (0..n)
        .map(|i| kernel.row(i).iter().map(|k| k.abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
        .max(1e-12);
    let step = 1.0 / lipschitz;

    // gradient of the dual: 1 - Q a
    let grad = |a: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let row = kernel.row(i);
                let qa: f64 = (0..n).map(|j| labels[i] * labels[j] * row[j] * a[j]).sum();
                1.0 - qa
            })
            .collect()
    };

    let mut x = vec![0.0; n];
    let mut z = x.clone();
    let mut t = 1.0f64;
    for _ in 0..steps {
        let g = grad(&z);
        let v: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi + step * gi).collect();
        let x_next = project_feasible(&v, labels, c);
        // restart momentum when the step points against the ascent direction
        let against: f64 = g
            .iter()
            .zip(x_next.iter().zip(&x))
            .map(|(gi, (xn, xo))| gi * (xn - xo))
            .sum();
        let t_next = if against < 0.0 {
            1.0
        } else {
            0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
        };
        let momentum = if against < 0.0 { 0.0 } else { (t - 1.0) / t_next };
        z = x_next
            .iter()
            .zip(&x)
            .map(|(xn, xo)| xn + momentum * (xn - xo))
            .map(|v| v.clamp(0.0, c))
            .collect();
        if against < 0.0 {
            z = x_next.clone();
        }
        x = x_next;
        t = t_next;
    }
    x
}
