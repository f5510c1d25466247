// SPDX-License-Identifier: MIT OR Apache-2.0
//! Thin SVD by one-sided (Hestenes) Jacobi rotations.
//!
//! The input is oriented so that the rotated set is the shorter dimension:
//! an `l x d` embedding with `l < d` is processed as `d x l`, which keeps the
//! number of column pairs at `l(l-1)/2`.

use crate::error::{DecorError, Result};
use crate::linalg::matrix::{dot, norm, Matrix};
use crate::scalar::Scalar;

/// Off-diagonal rotations are skipped once `|<w_p, w_q>| <= JACOBI_TOL * |w_p| |w_q|`.
pub const JACOBI_TOL: f64 = 1e-12;
pub const MAX_SWEEPS: usize = 60;
/// A singular value counts toward the effective rank when `σ_i > EFFECTIVE_RANK_TOL * σ_1`.
pub const EFFECTIVE_RANK_TOL: f64 = 1e-10;

/// `m = u · diag(sigma) · vᵀ` with `k = min(rows, cols)` components.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactorization<T> {
    pub u: Matrix<T>,
    pub sigma: Vec<T>,
    pub v: Matrix<T>,
}

impl<T: Scalar> SvdFactorization<T> {
    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    /// Number of singular values above the effective-rank threshold.
    pub fn effective_rank(&self) -> usize {
        let Some(&s1) = self.sigma.first() else {
            return 0;
        };
        if s1 == T::zero() {
            return 0;
        }
        let cut = T::tol(EFFECTIVE_RANK_TOL) * s1;
        self.sigma.iter().take_while(|&&s| s > cut).count()
    }

    pub fn rank_threshold(&self) -> T {
        self.sigma.first().copied().unwrap_or_else(T::zero) * T::tol(EFFECTIVE_RANK_TOL)
    }

    /// `σ_i u_i v_iᵀ`
    pub fn component(&self, i: usize) -> Matrix<T> {
        let (l, d) = (self.u.rows(), self.v.rows());
        let s = self.sigma[i];
        Matrix::from_fn(l, d, |r, c| s * self.u[(r, i)] * self.v[(c, i)])
    }

    pub fn reconstruct_all(&self) -> Matrix<T> {
        let mut out = Matrix::zeros(self.u.rows(), self.v.rows());
        for i in 0..self.k() {
            self.accumulate(i, &mut out);
        }
        out
    }

    pub(crate) fn accumulate(&self, i: usize, out: &mut Matrix<T>) {
        let s = self.sigma[i];
        if s == T::zero() {
            return;
        }
        let v_col = self.v.col(i);
        for r in 0..self.u.rows() {
            let w = s * self.u[(r, i)];
            for (o, &vc) in out.row_mut(r).iter_mut().zip(&v_col) {
                *o = *o + w * vc;
            }
        }
    }

    /// Leading `rank` right singular vectors as a `d x rank` matrix.
    pub fn right_basis(&self, rank: usize) -> Matrix<T> {
        Matrix::from_fn(self.v.rows(), rank, |i, j| self.v[(i, j)])
    }
}

pub fn thin_svd<T: Scalar>(m: &Matrix<T>) -> Result<SvdFactorization<T>> {
    if m.is_empty() {
        return Err(DecorError::Empty("thin_svd"));
    }
    m.check_finite()?;

    let (rows, cols) = m.shape();
    let transposed = rows < cols;
    let (len, k) = if transposed {
        (cols, rows)
    } else {
        (rows, cols)
    };

    // Working columns w_j (length `len`) and accumulated rotations (k x k, by column).
    let mut w: Vec<Vec<T>> = if transposed {
        (0..rows).map(|i| m.row(i).to_vec()).collect()
    } else {
        (0..cols).map(|j| m.col(j)).collect()
    };
    let mut rot: Vec<Vec<T>> = (0..k)
        .map(|j| {
            let mut e = vec![T::zero(); k];
            e[j] = T::one();
            e
        })
        .collect();

    // rounding in a length-`len` dot product bounds how small the criterion can get
    let tol = T::lit(JACOBI_TOL).max(T::epsilon() * T::lit(len as f64));
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                rotate_pair(&mut w, p, q, c, s);
                rotate_pair(&mut rot, p, q, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(DecorError::NotConverged { sweeps: MAX_SWEEPS });
    }

    let mut sigma: Vec<T> = w.iter().map(|c| norm(c)).collect();
    let mut order: Vec<usize> = (0..k).collect();
    // stable: ties keep original column order
    order.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).expect("finite"));
    sigma = order.iter().map(|&j| sigma[j]).collect();

    // Columns too small to normalize are replaced by an orthonormal completion.
    let floor = T::min_positive_value().sqrt() * m.frobenius_norm().max(T::one());
    let mut scaled: Vec<Vec<T>> = Vec::with_capacity(k);
    let mut pending = Vec::new();
    for (slot, &j) in order.iter().enumerate() {
        let s = sigma[slot];
        if s > floor {
            scaled.push(w[j].iter().map(|&x| x / s).collect());
        } else {
            scaled.push(Vec::new());
            pending.push(slot);
        }
    }
    for slot in pending {
        let accepted: Vec<&Vec<T>> = scaled.iter().filter(|c| !c.is_empty()).collect();
        let fill = complete_basis(len, &accepted);
        scaled[slot] = fill;
    }
    let rot_sorted: Vec<Vec<T>> = order.iter().map(|&j| rot[j].clone()).collect();

    let scaled_m = Matrix::from_columns(len, &scaled);
    let rot_m = Matrix::from_columns(k, &rot_sorted);
    let (mut u, mut v) = if transposed {
        (rot_m, scaled_m)
    } else {
        (scaled_m, rot_m)
    };

    for j in 0..k {
        let col = v.col(j);
        let mut best = 0;
        for (i, x) in col.iter().enumerate() {
            if x.abs() > col[best].abs() {
                best = i;
            }
        }
        if col[best] < T::zero() {
            for i in 0..v.rows() {
                v[(i, j)] = -v[(i, j)];
            }
            for i in 0..u.rows() {
                u[(i, j)] = -u[(i, j)];
            }
        }
    }

    Ok(SvdFactorization { u, sigma, v })
}

fn rotate_pair<T: Scalar>(cols: &mut [Vec<T>], p: usize, q: usize, c: T, s: T) {
    let (head, tail) = cols.split_at_mut(q);
    let (cp, cq) = (&mut head[p], &mut tail[0]);
    for (a, b) in cp.iter_mut().zip(cq.iter_mut()) {
        let (x, y) = (*a, *b);
        *a = c * x - s * y;
        *b = s * x + c * y;
    }
}

/// Unit vector orthogonal to every vector in `basis`, picked from the
/// standard basis direction with the largest residual.
fn complete_basis<T: Scalar>(len: usize, basis: &[&Vec<T>]) -> Vec<T> {
    let mut best: Option<(T, Vec<T>)> = None;
    for e in 0..len {
        let mut r = vec![T::zero(); len];
        r[e] = T::one();
        for _ in 0..2 {
            for b in basis {
                let h = dot(&r, b);
                for (ri, &bi) in r.iter_mut().zip(b.iter()) {
                    *ri = *ri - h * bi;
                }
            }
        }
        let n = norm(&r);
        if best.as_ref().is_none_or(|(bn, _)| n > *bn) {
            best = Some((n, r));
        }
    }
    let (n, r) = best.expect("len > 0");
    r.into_iter().map(|x| x / n).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruction_error(m: &Matrix<f64>, f: &SvdFactorization<f64>) -> f64 {
        m.sub(&f.reconstruct_all()).unwrap().frobenius_norm() / m.frobenius_norm()
    }

    fn assert_orthonormal_columns(q: &Matrix<f64>, tol: f64) {
        let g = q.transpose().matmul(q).unwrap();
        let dev = g.sub(&Matrix::identity(q.cols())).unwrap().max_abs();
        assert!(dev <= tol, "orthonormality deviation {dev}");
    }

    #[test]
    fn identity_2x2() {
        let f = thin_svd(&Matrix::<f64>::identity(2)).unwrap();
        assert_eq!(f.sigma, vec![1.0, 1.0]);
        let uvt = f.u.matmul(&f.v.transpose()).unwrap();
        assert!(uvt.max_abs_diff(&Matrix::identity(2)).unwrap() < 1e-15);
    }

    #[test]
    fn rank_one_outer_product() {
        // |a| = 3, |b| = 2
        let a = [1.0f64, 2.0, 2.0];
        let b = [0.0, 2.0];
        let m = Matrix::from_fn(3, 2, |i, j| a[i] * b[j]);
        let f = thin_svd(&m).unwrap();
        assert!((f.sigma[0] - 6.0).abs() < 1e-14);
        assert!(f.sigma[1].abs() < 1e-14);
        assert_eq!(f.effective_rank(), 1);
        assert_orthonormal_columns(&f.u, 1e-12);
        assert_orthonormal_columns(&f.v, 1e-12);
    }

    #[test]
    fn zero_matrix_has_orthonormal_completion() {
        let f = thin_svd(&Matrix::<f64>::zeros(3, 5)).unwrap();
        assert_eq!(f.sigma, vec![0.0; 3]);
        assert_eq!(f.effective_rank(), 0);
        assert_orthonormal_columns(&f.u, 1e-14);
        assert_orthonormal_columns(&f.v, 1e-14);
    }

    #[test]
    fn both_orientations() {
        let m = Matrix::from_fn(4, 7, |i, j| {
            ((i * i * 7 + j * j + 3 * i * j) as f64 * 0.37).sin()
        });
        for x in [m.clone(), m.transpose()] {
            let f = thin_svd(&x).unwrap();
            assert_eq!(f.k(), 4);
            assert!(reconstruction_error(&x, &f) < 1e-13);
            assert_orthonormal_columns(&f.u, 1e-12);
            assert_orthonormal_columns(&f.v, 1e-12);
            assert!(f.sigma.windows(2).all(|p| p[0] >= p[1]));
        }
    }

    #[test]
    fn sign_convention_is_deterministic() {
        let m = Matrix::from_fn(3, 5, |i, j| ((i + 2 * j) as f64).cos());
        let f = thin_svd(&m).unwrap();
        for j in 0..f.k() {
            let col = f.v.col(j);
            let big = col
                .iter()
                .fold(0.0f64, |a, &b| if b.abs() > a.abs() { b } else { a });
            assert!(big > 0.0);
        }
        assert_eq!(f, thin_svd(&m).unwrap());
    }

    #[test]
    fn rejects_empty() {
        assert!(matches!(
            thin_svd(&Matrix::<f64>::zeros(0, 3)),
            Err(DecorError::Empty(_))
        ));
    }

    #[test]
    fn works_in_f32() {
        let m = Matrix::from_fn(5, 8, |i, j| {
            ((i * i * 8 + j * j + 2 * i * j) as f32 * 0.71).sin()
        });
        let f = thin_svd(&m).unwrap();
        let err = m.sub(&f.reconstruct_all()).unwrap().frobenius_norm() / m.frobenius_norm();
        assert!(err < 1e-5, "{err}");
    }
}
