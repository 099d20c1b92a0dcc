//! Cholesky factorization for the metric.
//!
//! The metric is at most 8x8, so a textbook unblocked factorization is
//! enough.  A point is rejected as numerically non-SPD when a pivot is
//! non-positive or when the smallest pivot falls below `1e-10` times the
//! largest, which keeps nearly singular metrics out of the inverse.

use crate::tensor::{Tensor, Variance};
use thiserror::Error;

/// Ratio of smallest to largest Cholesky pivot below which a metric is
/// treated as singular.
pub const PIVOT_RATIO_FLOOR: f64 = 1e-10;

#[derive(Clone, Debug, Error, PartialEq)]
pub enum SpdError {
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositive { row: usize, pivot: f64 },
    #[error("matrix is numerically singular (pivot ratio {ratio:.3e} below {PIVOT_RATIO_FLOOR:.0e})")]
    NearSingular { ratio: f64 },
}

/// Lower-triangular Cholesky factor of a symmetric positive-definite
/// matrix, stored row-major.
#[derive(Clone, Debug)]
pub struct Cholesky {
    dim: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors a symmetric rank-2 tensor.  Only the lower triangle of the
    /// input is read.
    pub fn new(g: &Tensor) -> Result<Cholesky, SpdError> {
        debug_assert_eq!(g.rank(), 2);
        let n = g.dim();
        let mut l = vec![0.0f64; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut sum = g.get(&[i, j]);
                for k in 0..j {
                    sum -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if sum <= 0.0 {
                        return Err(SpdError::NotPositive { row: i + 1, pivot: sum });
                    }
                    l[i * n + i] = sum.sqrt();
                } else {
                    l[i * n + j] = sum / l[j * n + j];
                }
            }
        }
        let mut min_pivot = f64::INFINITY;
        let mut max_pivot = 0.0f64;
        for i in 0..n {
            min_pivot = min_pivot.min(l[i * n + i]);
            max_pivot = max_pivot.max(l[i * n + i]);
        }
        let ratio = min_pivot / max_pivot;
        if ratio < PIVOT_RATIO_FLOOR {
            return Err(SpdError::NearSingular { ratio });
        }
        Ok(Cholesky { dim: n, l })
    }

    pub fn log_det(&self) -> f64 {
        let n = self.dim;
        2.0 * (0..n).map(|i| self.l[i * n + i].ln()).sum::<f64>()
    }

    /// Inverse as an upper-variance tensor, via forward/back substitution
    /// column by column.
    pub fn inverse(&self) -> Tensor {
        let n = self.dim;
        let mut inv = Tensor::zeros(n, &[Variance::Upper, Variance::Upper]);
        let mut col = vec![0.0f64; n];
        for rhs in 0..n {
            // Solve L y = e_rhs.
            for i in 0..n {
                let mut sum = if i == rhs { 1.0 } else { 0.0 };
                for k in 0..i {
                    sum -= self.l[i * n + k] * col[k];
                }
                col[i] = sum / self.l[i * n + i];
            }
            // Solve L^T x = y.
            for i in (0..n).rev() {
                let mut sum = col[i];
                for k in (i + 1)..n {
                    sum -= self.l[k * n + i] * col[k];
                }
                col[i] = sum / self.l[i * n + i];
            }
            for i in 0..n {
                inv.set(&[i, rhs], col[i]);
            }
        }
        // Symmetrize: the two triangles agree up to rounding, and the rest
        // of the pipeline assumes bitwise symmetry.
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (inv.get(&[i, j]) + inv.get(&[j, i]));
                inv.set(&[i, j], avg);
                inv.set(&[j, i], avg);
            }
        }
        inv
    }
}
