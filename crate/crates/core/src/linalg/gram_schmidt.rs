// SPDX-License-Identifier: MIT OR Apache-2.0

use crate::linalg::matrix::{dot, norm, Matrix};
use crate::scalar::Scalar;

/// Orthonormal basis produced by [`gram_schmidt_basis`].
#[derive(Debug, Clone, PartialEq)]
pub struct OrthoBasis<T> {
    /// `d x r`, one basis vector per column.
    pub basis: Matrix<T>,
    /// Input rows that contributed a basis vector.
    pub kept: Vec<usize>,
    /// Input rows whose residual fell below tolerance.
    pub dropped: Vec<usize>,
}

impl<T: Scalar> OrthoBasis<T> {
    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    /// True when every row was dropped; not treated as an error here.
    pub fn is_empty(&self) -> bool {
        self.basis.cols() == 0
    }
}

/// Orthonormal basis for the row space of `m` by modified Gram-Schmidt with
/// one re-orthogonalization pass.
///
/// A row is dropped when its residual norm falls below `tol` times the largest
/// input row norm.
pub fn gram_schmidt_basis<T: Scalar>(m: &Matrix<T>, tol: T) -> OrthoBasis<T> {
    let d = m.cols();
    let max_norm = m.row_norms().into_iter().fold(T::zero(), T::max);
    let cut = tol * max_norm;

    let mut vectors: Vec<Vec<T>> = Vec::new();
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (i, row) in m.row_iter().enumerate() {
        let mut r = row.to_vec();
        for _ in 0..2 {
            for q in &vectors {
                let h = dot(&r, q);
                for (ri, &qi) in r.iter_mut().zip(q) {
                    *ri = *ri - h * qi;
                }
            }
        }
        let n = norm(&r);
        if max_norm == T::zero() || n <= cut {
            dropped.push(i);
            continue;
        }
        vectors.push(r.into_iter().map(|x| x / n).collect());
        kept.push(i);
    }

    OrthoBasis {
        basis: Matrix::from_columns(d, &vectors),
        kept,
        dropped,
    }
}
