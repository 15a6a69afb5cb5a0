//! Losses, gradients and the descent step.
//!
//! Gradients are plain sums over points (no averaging). The ridge term
//! `lambda/2 * ||beta||^2` is applied once by the master, never per partition.

use std::ops::Range;

use nalgebra::DMatrix;

use super::dataset::{Dataset, Task};
use crate::{Error, Result};

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn dot(x: &[f64], beta: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (a, b) in x.iter().zip(beta) {
        acc += a * b;
    }
    acc
}

pub fn point_loss(task: Task, x: &[f64], y: f64, beta: &[f64]) -> f64 {
    let z = dot(x, beta);
    match task {
        Task::Linear => (z - y) * (z - y),
        // log(1 + e^z) - y z, written to avoid overflow
        Task::Logistic => z.max(0.0) + (-z.abs()).exp().ln_1p() - y * z,
    }
}

/// Scalar `c` such that the point's loss gradient is `c * x`.
fn gradient_scale(task: Task, x: &[f64], y: f64, beta: &[f64]) -> f64 {
    let z = dot(x, beta);
    match task {
        Task::Linear => 2.0 * (z - y),
        Task::Logistic => sigmoid(z) - y,
    }
}

/// `acc += weight * g_range`, point by point in index order.
pub(crate) fn accumulate_gradient(data: &Dataset, range: Range<usize>, beta: &[f64], weight: f64, acc: &mut [f64]) {
    for (x, y) in data.points(range) {
        let c = weight * gradient_scale(data.task(), x, y, beta);
        for (a, xi) in acc.iter_mut().zip(x) {
            *a += c * xi;
        }
    }
}

/// Sum of per-point loss gradients over `range`.
pub fn partial_gradient(data: &Dataset, range: Range<usize>, beta: &[f64]) -> Result<Vec<f64>> {
    if beta.len() != data.dim() {
        return Err(Error::DimensionMismatch { expected: data.dim(), found: beta.len() });
    }
    if range.end > data.len() {
        return Err(Error::IndexOutOfRange { index: range.end, len: data.len() });
    }
    let mut acc = vec![0.0; beta.len()];
    accumulate_gradient(data, range, beta, 1.0, &mut acc);
    Ok(acc)
}

/// Full training objective `sum_i l(beta; x_i, y_i) + lambda/2 ||beta||^2`.
pub fn objective(data: &Dataset, beta: &[f64], lambda: f64) -> f64 {
    let mut loss = 0.0;
    for (x, y) in data.points(0..data.len()) {
        loss += point_loss(data.task(), x, y, beta);
    }
    loss + 0.5 * lambda * dot(beta, beta)
}

pub fn gd_step(beta: &[f64], gradient: &[f64], eta: f64) -> Result<Vec<f64>> {
    if beta.len() != gradient.len() {
        return Err(Error::DimensionMismatch { expected: beta.len(), found: gradient.len() });
    }
    Ok(beta.iter().zip(gradient).map(|(b, g)| b - eta * g).collect())
}

/// Inverse Lipschitz constant of the summed loss gradient.
///
/// Linear: `1 / (2 sigma_max(X^T X))`. Logistic: `4 / sigma_max(X^T X)`.
pub fn default_step_size(data: &Dataset) -> f64 {
    let n = data.len();
    let x = DMatrix::from_row_slice(n, data.dim(), &(0..n).flat_map(|i| data.point(i).0.to_vec()).collect::<Vec<_>>());
    let gram = x.tr_mul(&x);
    let largest = gram.symmetric_eigenvalues().max().max(f64::MIN_POSITIVE);
    match data.task() {
        Task::Linear => 1.0 / (2.0 * largest),
        Task::Logistic => 4.0 / largest,
    }
}
