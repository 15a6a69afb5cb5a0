//! Optimal decoding for a non-straggler matrix `A`.
//!
//! The master looks for the combining vector `x` minimising `||A x - 1||^2`.
//! The minimum value is the optimal decoding error `err(A)`; the minimiser
//! returned is the minimum-norm one, `x = A^+ 1`.

use nalgebra::{DMatrix, DVector};

use crate::coding::NonStragglerMatrix;
use crate::{Error, Result};

/// Errors at or below this are treated as exact recovery.
pub const EXACT_TOLERANCE: f64 = 1e-9;

/// Eigenvalues of `A^T A` below `GRAM_RTOL * lambda_max` are treated as zero.
pub const GRAM_RTOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeResult {
    pub x: DVector<f64>,
    pub err: f64,
    pub exact: bool,
}

impl DecodeResult {
    /// Effective weight of each partition in the decoded gradient, `A x`.
    ///
    /// When the decode is exact the weights are returned as exactly one so the
    /// aggregate reproduces the plain sum of partial gradients.
    pub fn partition_weights(&self, a: &NonStragglerMatrix) -> DVector<f64> {
        if self.exact {
            DVector::from_element(a.n(), 1.0)
        } else if a.r() == 0 {
            DVector::zeros(a.n())
        } else {
            a.entries() * &self.x
        }
    }
}

pub fn optimal_decode(a: &NonStragglerMatrix) -> DecodeResult {
    let n = a.n();
    let r = a.r();
    let ones = DVector::from_element(n, 1.0);
    if r == 0 {
        let err = n as f64;
        return DecodeResult { x: DVector::zeros(0), err, exact: is_exact(err) };
    }

    // Spectral decomposition of the Gram matrix A^T A, whose entries are small
    // integers and therefore exact; eigenvalues are squared singular values.
    let at1 = a.entries().tr_mul(&ones);
    let eigen = a.entries().tr_mul(a.entries()).symmetric_eigen();
    let lambda_max = eigen.eigenvalues.max();
    let threshold = GRAM_RTOL * lambda_max;

    let mut x = DVector::zeros(r);
    for (k, &lambda) in eigen.eigenvalues.iter().enumerate() {
        if lambda > threshold && lambda > 0.0 {
            let v = eigen.eigenvectors.column(k);
            let coeff = v.dot(&at1) / lambda;
            x.axpy(coeff, &v, 1.0);
        }
    }
    let err = (a.entries() * &x - ones).norm_squared();
    DecodeResult { x, err, exact: is_exact(err) }
}

pub fn is_exact(err: f64) -> bool {
    err <= EXACT_TOLERANCE
}

/// `F^T x` for worker outputs `F` (one row per surviving worker).
pub fn reconstruct_gradient(outputs: &DMatrix<f64>, x: &DVector<f64>) -> Result<DVector<f64>> {
    if outputs.nrows() != x.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: outputs.nrows() });
    }
    Ok(outputs.tr_mul(x))
}
