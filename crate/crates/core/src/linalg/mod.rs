// SPDX-License-Identifier: MIT OR Apache-2.0
//! Dense kernels: row-major matrices, thin SVD, Gram-Schmidt.

mod gram_schmidt;
mod matrix;
mod svd;

pub use gram_schmidt::{gram_schmidt_basis, OrthoBasis};
pub use matrix::{dot, frobenius_norm, matmul, norm, row_cosine, Matrix};
pub use svd::{thin_svd, SvdFactorization, EFFECTIVE_RANK_TOL, JACOBI_TOL, MAX_SWEEPS};
