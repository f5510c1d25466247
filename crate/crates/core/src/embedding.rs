// SPDX-License-Identifier: MIT OR Apache-2.0
//! Token-embedding matrices with a word/pad row partition.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{DecorError, Result};
use crate::format;
use crate::linalg::{norm, Matrix};
use crate::scalar::Scalar;

/// An `l x d` embedding. Rows `0..n` are word tokens, rows `n..l` padding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix<T> {
    x: Matrix<T>,
    word_count: usize,
    labels: Option<Vec<String>>,
    name: Option<String>,
}

impl<T: Scalar> EmbeddingMatrix<T> {
    pub fn new(x: Matrix<T>, word_count: usize) -> Result<Self> {
        if word_count < 1 || word_count >= x.rows() {
            return Err(DecorError::InvalidWordCount {
                n: word_count,
                l: x.rows(),
            });
        }
        x.check_finite()?;
        Ok(Self {
            x,
            word_count,
            labels: None,
            name: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.l() {
            return Err(DecorError::LabelCount {
                expected: self.l(),
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// Same partition and labels, different contents.
    pub fn with_matrix(&self, x: Matrix<T>) -> Result<Self> {
        if x.shape() != self.x.shape() {
            return Err(DecorError::ShapeMismatch {
                op: "with_matrix",
                left: self.x.shape(),
                right: x.shape(),
            });
        }
        x.check_finite()?;
        Ok(Self {
            x,
            word_count: self.word_count,
            labels: self.labels.clone(),
            name: self.name.clone(),
        })
    }

    /// Same tokens (rows, partition, labels) over a different feature width,
    /// e.g. attention keys.
    pub fn with_same_tokens(&self, x: Matrix<T>) -> Result<Self> {
        if x.rows() != self.l() {
            return Err(DecorError::ShapeMismatch {
                op: "with_same_tokens",
                left: self.x.shape(),
                right: x.shape(),
            });
        }
        x.check_finite()?;
        Ok(Self {
            x,
            word_count: self.word_count,
            labels: self.labels.clone(),
            name: self.name.clone(),
        })
    }

    pub fn x(&self) -> &Matrix<T> {
        &self.x
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.x
    }

    pub fn l(&self) -> usize {
        self.x.rows()
    }

    pub fn d(&self) -> usize {
        self.x.cols()
    }

    pub fn n(&self) -> usize {
        self.word_count
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn label(&self, i: usize) -> String {
        match &self.labels {
            Some(l) => l[i].clone(),
            None if i < self.word_count => format!("w{i}"),
            None => "[PAD]".to_string(),
        }
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    /// Word-token rows `X_w`.
    pub fn words(&self) -> Matrix<T> {
        self.x.slice_rows(0, self.word_count)
    }

    /// Padding rows.
    pub fn pads(&self) -> Matrix<T> {
        self.x.slice_rows(self.word_count, self.l())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingHeader {
    pub l: usize,
    pub d: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

pub fn load_embedding<T: Scalar>(path: &Path, header_path: &Path) -> Result<EmbeddingMatrix<T>> {
    let h: EmbeddingHeader = format::read_header(header_path)?;
    let values = format::read_payload(path, h.l * h.d)?;
    let x = format::payload_blocks(path, &values, &[(h.l, h.d)])?.remove(0);
    let mut e = EmbeddingMatrix::new(x, h.n)?;
    if let Some(labels) = h.labels {
        e = e.with_labels(labels)?;
    }
    e.name = h.name;
    Ok(e)
}

pub fn save_embedding<T: Scalar>(
    e: &EmbeddingMatrix<T>,
    path: &Path,
    header_path: &Path,
) -> Result<()> {
    let header = EmbeddingHeader {
        l: e.l(),
        d: e.d(),
        n: e.n(),
        labels: e.labels.clone(),
        name: e.name.clone(),
    };
    format::write_payload(path, &[&e.x])?;
    format::write_header(header_path, &header)
}

/// Parameters for the synthetic pad-coherent generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub l: usize,
    pub d: usize,
    pub n: usize,
    pub pad_coherence: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n < 1 || self.n >= self.l {
            return Err(DecorError::InvalidSpec(format!(
                "need l > n >= 1, got l={} n={}",
                self.l, self.n
            )));
        }
        if self.d < 2 {
            return Err(DecorError::InvalidSpec(format!(
                "need d >= 2, got {}",
                self.d
            )));
        }
        if !(0.0..=1.0).contains(&self.pad_coherence) {
            return Err(DecorError::InvalidSpec(format!(
                "pad_coherence {} outside [0, 1]",
                self.pad_coherence
            )));
        }
        Ok(())
    }

    /// The unit direction shared by every pad row.
    pub fn pad_direction<T: Scalar>(&self) -> Vec<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        unit_vector(&mut rng, self.d)
            .into_iter()
            .map(T::lit)
            .collect()
    }
}

fn gaussian_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}

fn unit_vector(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    loop {
        let v = gaussian_vector(rng, d);
        let n = norm(&v);
        if n > 0.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Word rows are i.i.d. standard normal. Pad rows mix a shared unit direction
/// with an independent unit direction, `c * shared + (1 - c) * noise`, and are
/// rescaled to the mean word-row norm.
pub fn synthesize<T: Scalar>(spec: &SyntheticSpec) -> Result<EmbeddingMatrix<T>> {
    spec.validate()?;
    let SyntheticSpec { l, d, n, .. } = *spec;
    let c = spec.pad_coherence;

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let shared = unit_vector(&mut rng, d);
    let mut rows: Vec<Vec<f64>> = (0..n).map(|_| gaussian_vector(&mut rng, d)).collect();
    let target = rows.iter().map(|r| norm(r)).sum::<f64>() / n as f64;

    for _ in n..l {
        let noise = unit_vector(&mut rng, d);
        let mut p: Vec<f64> = shared
            .iter()
            .zip(&noise)
            .map(|(s, z)| c * s + (1.0 - c) * z)
            .collect();
        let pn = norm(&p);
        let k = if pn > 0.0 { target / pn } else { 0.0 };
        p.iter_mut().for_each(|x| *x *= k);
        rows.push(p);
    }

    let x = Matrix::from_fn(l, d, |i, j| T::lit(rows[i][j]));
    let e = EmbeddingMatrix::new(x, n)?;
    Ok(e.with_name(format!(
        "synthetic-l{l}-d{d}-n{n}-c{}-s{}",
        spec.pad_coherence, spec.seed
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::thin_svd;

    fn spec(c: f64, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            l: 12,
            d: 16,
            n: 3,
            pad_coherence: c,
            seed,
        }
    }

    #[test]
    fn word_count_must_be_strictly_inside() {
        let x = Matrix::<f64>::zeros(4, 2);
        assert!(EmbeddingMatrix::new(x.clone(), 4).is_err());
        assert!(EmbeddingMatrix::new(x.clone(), 0).is_err());
        assert!(EmbeddingMatrix::new(x, 3).is_ok());
    }

    #[test]
    fn labels_must_cover_every_row() {
        let e = EmbeddingMatrix::new(Matrix::<f64>::zeros(3, 2), 1).unwrap();
        assert!(e.clone().with_labels(vec!["a".into()]).is_err());
        let e = e
            .with_labels(vec!["a".into(), "b".into(), "c".into()])
            .unwrap();
        assert_eq!(e.label(2), "c");
    }

    #[test]
    fn partition_concatenates_back() {
        let e: EmbeddingMatrix<f64> = synthesize(&spec(0.5, 3)).unwrap();
        assert_eq!(e.words().vstack(&e.pads()).unwrap(), *e.x());
    }

    #[test]
    fn coherent_pads_are_identical() {
        let e: EmbeddingMatrix<f64> = synthesize(&spec(1.0, 9)).unwrap();
        let pads = e.pads();
        for i in 1..pads.rows() {
            assert_eq!(pads.row(i), pads.row(0));
        }
        let f = thin_svd(&pads).unwrap();
        assert!(f.sigma[1] <= 1e-12 * f.sigma[0]);
    }

    #[test]
    fn pad_rows_match_mean_word_norm() {
        let e: EmbeddingMatrix<f64> = synthesize(&spec(0.3, 1)).unwrap();
        let norms = e.x().row_norms();
        let mean = norms[..3].iter().sum::<f64>() / 3.0;
        for &p in &norms[3..] {
            assert!((p - mean).abs() < 1e-12 * mean);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a: EmbeddingMatrix<f64> = synthesize(&spec(0.9, 42)).unwrap();
        let b: EmbeddingMatrix<f64> = synthesize(&spec(0.9, 42)).unwrap();
        let c: EmbeddingMatrix<f64> = synthesize(&spec(0.9, 43)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_spec() {
        assert!(synthesize::<f64>(&spec(1.5, 0)).is_err());
        let mut s = spec(0.5, 0);
        s.d = 1;
        assert!(synthesize::<f64>(&s).is_err());
        s = spec(0.5, 0);
        s.n = s.l;
        assert!(synthesize::<f64>(&s).is_err());
    }
}
