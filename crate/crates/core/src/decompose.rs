// SPDX-License-Identifier: MIT OR Apache-2.0
//! Component-group analysis of an embedding's singular structure.
//!
//! Indices are stored 0-based. Ranks (`1..=k`) are the 1-based display form and
//! are what [`GroupRanges`] and the CLI speak.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingMatrix;
use crate::error::{DecorError, Result};
use crate::linalg::{row_cosine, thin_svd, Matrix, SvdFactorization};
use crate::scalar::Scalar;

/// A set of 0-based component indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSelection {
    indices: BTreeSet<usize>,
}

impl ComponentSelection {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn all(k: usize) -> Self {
        (0..k).collect()
    }

    /// Ranks `lo..=hi` (1-based), clipped to `k`.
    pub fn ranks_clipped(lo: usize, hi: usize, k: usize) -> Self {
        let lo = lo.max(1);
        (lo..=hi.min(k)).map(|r| r - 1).collect()
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    /// 1-based ranks for display.
    pub fn ranks(&self) -> Vec<usize> {
        self.indices.iter().map(|i| i + 1).collect()
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.contains(&i)
    }

    pub fn union(&self, other: &Self) -> Self {
        self.indices.union(&other.indices).copied().collect()
    }

    /// Every index in `0..k` not in `self`.
    pub fn complement(&self, k: usize) -> Self {
        (0..k).filter(|i| !self.indices.contains(i)).collect()
    }

    pub fn validate(&self, k: usize) -> Result<()> {
        match self.indices.iter().find(|&&i| i >= k) {
            Some(&index) => Err(DecorError::ComponentOutOfRange { index, k }),
            None => Ok(()),
        }
    }
}

impl FromIterator<usize> for ComponentSelection {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        Self {
            indices: iter.into_iter().collect(),
        }
    }
}

/// `Σ_{i ∈ sel} σ_i u_i v_iᵀ`
pub fn reconstruct<T: Scalar>(
    f: &SvdFactorization<T>,
    sel: &ComponentSelection,
) -> Result<Matrix<T>> {
    sel.validate(f.k())?;
    let mut out = Matrix::zeros(f.u.rows(), f.v.rows());
    for i in sel.indices() {
        f.accumulate(i, &mut out);
    }
    Ok(out)
}

/// Inclusive 1-based rank ranges for the three component groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupRanges {
    pub primary: (usize, usize),
    pub subsequent: (usize, usize),
    pub residual: (usize, usize),
}

impl Default for GroupRanges {
    fn default() -> Self {
        Self {
            primary: (1, 1),
            subsequent: (2, 9),
            residual: (20, 54),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentGroups {
    pub primary: ComponentSelection,
    pub subsequent: ComponentSelection,
    pub residual: ComponentSelection,
}

impl ComponentGroups {
    pub fn iter(&self) -> impl Iterator<Item = (&'static str, &ComponentSelection)> {
        [
            ("primary", &self.primary),
            ("subsequent", &self.subsequent),
            ("residual", &self.residual),
        ]
        .into_iter()
    }
}

/// Default groups (rank 1; ranks 2..=9; ranks 20..=54), clipped to the
/// factorization's component count.
pub fn component_groups<T: Scalar>(f: &SvdFactorization<T>, l: usize) -> ComponentGroups {
    component_groups_with(f, l, &GroupRanges::default())
}

pub fn component_groups_with<T: Scalar>(
    f: &SvdFactorization<T>,
    l: usize,
    ranges: &GroupRanges,
) -> ComponentGroups {
    debug_assert_eq!(l, f.u.rows(), "length must match factorization rows");
    let k = f.k().min(l);
    let pick = |(lo, hi): (usize, usize)| ComponentSelection::ranks_clipped(lo, hi, k);
    ComponentGroups {
        primary: pick(ranges.primary),
        subsequent: pick(ranges.subsequent),
        residual: pick(ranges.residual),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub sigmas: Vec<f64>,
    pub normalized: Vec<f64>,
    /// `σ_1 / σ_2`, with `σ_2` floored at the effective-rank threshold.
    pub dominance_ratio: f64,
    pub effective_rank: usize,
    pub rank_deficient: bool,
}

pub fn spectrum<T: Scalar>(e: &EmbeddingMatrix<T>, top: usize) -> Result<SpectrumReport> {
    spectrum_of(&thin_svd(e.x())?, top)
}

pub fn spectrum_of<T: Scalar>(f: &SvdFactorization<T>, top: usize) -> Result<SpectrumReport> {
    if top > f.k() {
        return Err(DecorError::TopOutOfRange {
            top,
            available: f.k(),
        });
    }
    let s1 = f.sigma[0].to_f64_lossy();
    if s1 == 0.0 {
        return Err(DecorError::RankZero("spectrum"));
    }
    let sigmas: Vec<f64> = f.sigma[..top].iter().map(|s| s.to_f64_lossy()).collect();
    let normalized = sigmas.iter().map(|s| s / s1).collect();
    let effective_rank = f.effective_rank();
    let dominance_ratio = match f.sigma.get(1) {
        Some(&s2) => s1 / s2.to_f64_lossy().max(f.rank_threshold().to_f64_lossy()),
        None => 1.0,
    };
    Ok(SpectrumReport {
        sigmas,
        normalized,
        dominance_ratio,
        effective_rank,
        rank_deficient: effective_rank < f.k(),
    })
}

/// Entrywise mean of several spectra, truncated to the shortest.
pub fn mean_spectrum(reports: &[SpectrumReport]) -> Option<SpectrumReport> {
    let len = reports.iter().map(|r| r.sigmas.len()).min()?;
    let count = reports.len() as f64;
    let mean = |f: &dyn Fn(&SpectrumReport) -> &[f64]| -> Vec<f64> {
        (0..len)
            .map(|i| reports.iter().map(|r| f(r)[i]).sum::<f64>() / count)
            .collect()
    };
    Some(SpectrumReport {
        sigmas: mean(&|r| &r.sigmas),
        normalized: mean(&|r| &r.normalized),
        dominance_ratio: reports.iter().map(|r| r.dominance_ratio).sum::<f64>() / count,
        effective_rank: reports.iter().map(|r| r.effective_rank).min().unwrap_or(0),
        rank_deficient: reports.iter().any(|r| r.rank_deficient),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityProfile {
    pub per_token: Vec<f64>,
    pub word_mean: f64,
    pub pad_mean: f64,
}

/// Token-wise cosine between `e` and a same-shape reconstruction.
pub fn similarity_profile<T: Scalar>(
    e: &EmbeddingMatrix<T>,
    recon: &Matrix<T>,
) -> Result<SimilarityProfile> {
    let per_token: Vec<f64> = row_cosine(e.x(), recon)?
        .into_iter()
        .map(|c| c.to_f64_lossy())
        .collect();
    let n = e.n();
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    Ok(SimilarityProfile {
        word_mean: mean(&per_token[..n]),
        pad_mean: mean(&per_token[n..]),
        per_token,
    })
}

/// Rescales `target` so its Frobenius norm equals that of `reference`.
pub fn norm_match<T: Scalar>(target: &Matrix<T>, reference: &Matrix<T>) -> Result<Matrix<T>> {
    if target.shape() != reference.shape() {
        return Err(DecorError::ShapeMismatch {
            op: "norm_match",
            left: target.shape(),
            right: reference.shape(),
        });
    }
    let t = target.frobenius_norm();
    if t == T::zero() {
        return Err(DecorError::ZeroNorm("norm_match target"));
    }
    Ok(target.scale(reference.frobenius_norm() / t))
}
