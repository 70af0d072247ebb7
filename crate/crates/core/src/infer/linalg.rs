//! Small dense symmetric positive-definite solves.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Lower Cholesky factor of a row-major `k x k` matrix, or `None` if the
/// matrix is not numerically positive definite.
pub(crate) fn cholesky(a: &[f64], k: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; k * k];
    let scale = (0..k).map(|i| a[i * k + i].abs()).fold(0.0, f64::max);
    for i in 0..k {
        for j in 0..=i {
            let mut s = a[i * k + j];
            for m in 0..j {
                s -= l[i * k + m] * l[j * k + m];
            }
            if i == j {
                if !(s > 1e-13 * scale) {
                    return None;
                }
                l[i * k + i] = math::sqrt(s);
            } else {
                l[i * k + j] = s / l[j * k + j];
            }
        }
    }
    Some(l)
}

/// Solves `L L^T x = b`.
pub(crate) fn solve(l: &[f64], k: usize, b: &[f64]) -> Vec<f64> {
    let mut y = b.to_vec();
    for i in 0..k {
        for m in 0..i {
            y[i] -= l[i * k + m] * y[m];
        }
        y[i] /= l[i * k + i];
    }
    for i in (0..k).rev() {
        for m in i + 1..k {
            y[i] -= l[m * k + i] * y[m];
        }
        y[i] /= l[i * k + i];
    }
    y
}

/// Diagonal of `(L L^T)^{-1}`.
pub(crate) fn inverse_diagonal(l: &[f64], k: usize) -> Vec<f64> {
    (0..k)
        .map(|i| {
            let mut e = vec![0.0; k];
            e[i] = 1.0;
            solve(l, k, &e)[i]
        })
        .collect()
}
