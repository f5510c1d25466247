// SPDX-License-Identifier: MIT OR Apache-2.0
#![allow(dead_code)]

use decor_core::linalg::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix<f64> {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

pub fn random_shape(rng: &mut ChaCha8Rng, max_rows: usize, max_cols: usize) -> (usize, usize) {
    (
        rng.random_range(1..=max_rows),
        rng.random_range(1..=max_cols),
    )
}

pub fn rel_frobenius(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
    let denom = b.frobenius_norm();
    let diff = a.sub(b).unwrap().frobenius_norm();
    if denom == 0.0 {
        diff
    } else {
        diff / denom
    }
}

pub fn orthonormality_deviation(q: &Matrix<f64>) -> f64 {
    let g = q.transpose().matmul(q).unwrap();
    g.sub(&Matrix::identity(q.cols())).unwrap().max_abs()
}

/// Squared singular values from the smaller Gram matrix, via nalgebra's
/// symmetric eigensolver. Independent of the Jacobi implementation.
pub fn gram_singular_values(m: &Matrix<f64>) -> Vec<f64> {
    let (r, c) = m.shape();
    let gram = if r <= c {
        m.matmul_transpose(m).unwrap()
    } else {
        m.transpose().matmul(m).unwrap()
    };
    let n = gram.rows();
    let g = nalgebra::DMatrix::from_fn(n, n, |i, j| gram[(i, j)]);
    let mut ev: Vec<f64> = g
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .map(|&l| l.max(0.0).sqrt())
        .collect();
    ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
    ev
}
