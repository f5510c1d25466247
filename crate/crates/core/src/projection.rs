// SPDX-License-Identifier: MIT OR Apache-2.0
//! Orthogonal projectors onto unwanted token subspaces, the separation
//! `X' = X - α X P`, and the baseline suppression schemes it is compared with.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::decompose::{norm_match, reconstruct, ComponentSelection};
use crate::embedding::EmbeddingMatrix;
use crate::error::{DecorError, Result};
use crate::format;
use crate::linalg::{dot, gram_schmidt_basis, thin_svd, Matrix, EFFECTIVE_RANK_TOL};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectionMethod {
    #[default]
    Svd,
    GramSchmidt,
}

impl fmt::Display for ProjectionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Svd => "svd",
            Self::GramSchmidt => "gram_schmidt",
        })
    }
}

impl FromStr for ProjectionMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "svd" => Ok(Self::Svd),
            "gram_schmidt" | "gram-schmidt" | "gs" => Ok(Self::GramSchmidt),
            other => Err(format!(
                "unknown projection method `{other}` (svd, gram_schmidt)"
            )),
        }
    }
}

/// Symmetric idempotent `d x d` projector onto the row space of a source matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector<T> {
    pub p: Matrix<T>,
    pub rank: usize,
    pub source_rows: usize,
    pub method: ProjectionMethod,
}

impl<T: Scalar> Projector<T> {
    pub fn d(&self) -> usize {
        self.p.rows()
    }

    /// `x · p`
    pub fn apply(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        if x.cols() != self.d() {
            return Err(DecorError::ShapeMismatch {
                op: "projector apply",
                left: x.shape(),
                right: self.p.shape(),
            });
        }
        x.matmul(&self.p)
    }

    /// `‖x · p‖_F / ‖reference‖_F`, or 0 when the reference is zero.
    pub fn residual(&self, x: &Matrix<T>, reference: &Matrix<T>) -> Result<f64> {
        let r = reference.frobenius_norm().to_f64_lossy();
        let xp = self.apply(x)?.frobenius_norm().to_f64_lossy();
        Ok(if r == 0.0 { 0.0 } else { xp / r })
    }
}

pub fn build_projector<T: Scalar>(
    x_tilde: &Matrix<T>,
    method: ProjectionMethod,
) -> Result<Projector<T>> {
    if x_tilde.rows() == 0 || x_tilde.cols() == 0 {
        return Err(DecorError::Empty("build_projector"));
    }
    let basis = match method {
        ProjectionMethod::Svd => {
            let f = thin_svd(x_tilde)?;
            f.right_basis(f.effective_rank())
        }
        ProjectionMethod::GramSchmidt => {
            gram_schmidt_basis(x_tilde, T::tol(EFFECTIVE_RANK_TOL)).basis
        }
    };
    if basis.cols() == 0 {
        return Err(DecorError::EmptySubspace);
    }
    Ok(Projector {
        p: outer_gram(&basis),
        rank: basis.cols(),
        source_rows: x_tilde.rows(),
        method,
    })
}

/// `b · bᵀ`, filled from the upper triangle so the result is exactly symmetric.
fn outer_gram<T: Scalar>(b: &Matrix<T>) -> Matrix<T> {
    let d = b.rows();
    let mut p = Matrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v = dot(b.row(i), b.row(j));
            p[(i, j)] = v;
            p[(j, i)] = v;
        }
    }
    p
}

fn check_alpha<T: Scalar>(alpha: T) -> Result<()> {
    let a = alpha.to_f64_lossy();
    if (0.0..=1.0).contains(&a) {
        Ok(())
    } else {
        Err(DecorError::AlphaOutOfRange(a))
    }
}

/// `x - α · x · p`
pub fn project_separate<T: Scalar>(
    x: &Matrix<T>,
    proj: &Projector<T>,
    alpha: T,
) -> Result<Matrix<T>> {
    check_alpha(alpha)?;
    let xp = proj.apply(x)?;
    x.add_scaled(-alpha, &xp)
}

/// Separation strength and whether to restore the original Frobenius norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualPathConfig {
    pub alpha: f64,
    pub resize: bool,
}

impl DualPathConfig {
    pub fn new(alpha: f64, resize: bool) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(Self { alpha, resize })
    }
}

impl Default for DualPathConfig {
    fn default() -> Self {
        Self {
            alpha: 0.8,
            resize: true,
        }
    }
}

/// Separates `e` from its own word-token subspace, optionally norm-matched to `e`.
pub fn decor_embedding<T: Scalar>(
    e: &EmbeddingMatrix<T>,
    cfg: &DualPathConfig,
) -> Result<Matrix<T>> {
    let proj = build_projector(&e.words(), ProjectionMethod::Svd)?;
    decor_with_projector(e.x(), &proj, cfg)
}

/// Separation plus optional resize against an already built projector.
pub fn decor_with_projector<T: Scalar>(
    x: &Matrix<T>,
    proj: &Projector<T>,
    cfg: &DualPathConfig,
) -> Result<Matrix<T>> {
    check_alpha(cfg.alpha)?;
    let out = project_separate(x, proj, T::lit(cfg.alpha))?;
    if cfg.resize {
        norm_match(&out, x)
    } else {
        Ok(out)
    }
}

/// Word rows set to zero, pad rows untouched.
pub fn suppress_zero_words<T: Scalar>(e: &EmbeddingMatrix<T>) -> Matrix<T> {
    let mut x = e.x().clone();
    for i in 0..e.n() {
        x.row_mut(i).fill(T::zero());
    }
    x
}

/// Reconstruction from every component except ranks `lo_rank..=hi_rank` (1-based).
pub fn suppress_exclude_components<T: Scalar>(
    e: &EmbeddingMatrix<T>,
    lo_rank: usize,
    hi_rank: usize,
) -> Result<Matrix<T>> {
    let f = thin_svd(e.x())?;
    let k = f.k();
    if lo_rank < 1 || lo_rank > hi_rank || hi_rank > k {
        return Err(DecorError::InvalidRankRange {
            lo: lo_rank,
            hi: hi_rank,
            k,
        });
    }
    let keep = ComponentSelection::ranks_clipped(lo_rank, hi_rank, k).complement(k);
    reconstruct(&f, &keep)
}

/// Removes the subspace spanned by `target`'s rows from `x`.
pub fn remove_target<T: Scalar>(x: &Matrix<T>, target: &Matrix<T>, alpha: T) -> Result<Matrix<T>> {
    check_alpha(alpha)?;
    project_separate(x, &build_projector(target, ProjectionMethod::Svd)?, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectorHeader {
    pub kind: String,
    pub d: usize,
    pub rank: usize,
    pub source_rows: usize,
    pub method: ProjectionMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

pub fn save_projector<T: Scalar>(
    proj: &Projector<T>,
    source: Option<&str>,
    path: &Path,
    header_path: &Path,
) -> Result<()> {
    let header = ProjectorHeader {
        kind: "projector".into(),
        d: proj.d(),
        rank: proj.rank,
        source_rows: proj.source_rows,
        method: proj.method,
        source: source.map(str::to_string),
    };
    format::write_payload(path, &[&proj.p])?;
    format::write_header(header_path, &header)
}

pub fn load_projector<T: Scalar>(path: &Path, header_path: &Path) -> Result<Projector<T>> {
    let h: ProjectorHeader = format::read_header(header_path)?;
    if h.kind != "projector" {
        return Err(DecorError::Format {
            path: header_path.to_path_buf(),
            msg: format!("expected kind \"projector\", got {:?}", h.kind),
        });
    }
    let values = format::read_payload(path, h.d * h.d)?;
    let p = format::payload_blocks(path, &values, &[(h.d, h.d)])?.remove(0);
    Ok(Projector {
        p,
        rank: h.rank,
        source_rows: h.source_rows,
        method: h.method,
    })
}
