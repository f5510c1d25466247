// SPDX-License-Identifier: MIT OR Apache-2.0
//! Key/value projections of a cross-attention layer carrying a LoRA update.
//!
//! Convention: `ΔW = a · b` with `a: d x r` and `b: r x d_attn`, so the LoRA
//! path is `scale · (x · a) · b`. The base path always sees the original
//! embedding; [`forward_decor`] feeds a separate embedding to the LoRA path.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{DecorError, Result};
use crate::format;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

pub const FACTOR_ORDER: [&str; 6] = ["w_k", "w_v", "a_k", "b_k", "a_v", "b_v"];
pub const CONVENTION: &str =
    "delta = a . b; a: d x r, b: r x d_attn; keys = x . w_k + scale . (x' . a_k) . b_k";

#[derive(Debug, Clone, PartialEq)]
pub struct LoraAttentionWeights<T> {
    pub w_k: Matrix<T>,
    pub w_v: Matrix<T>,
    pub a_k: Matrix<T>,
    pub b_k: Matrix<T>,
    pub a_v: Matrix<T>,
    pub b_v: Matrix<T>,
    pub scale: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttentionOutput<T> {
    pub keys: Matrix<T>,
    pub values: Matrix<T>,
}

impl<T: Scalar> AttentionOutput<T> {
    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            keys: self.keys.add(&other.keys)?,
            values: self.values.add(&other.values)?,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Ok(Self {
            keys: self.keys.sub(&other.keys)?,
            values: self.values.sub(&other.values)?,
        })
    }
}

impl<T: Scalar> LoraAttentionWeights<T> {
    pub fn new(
        w_k: Matrix<T>,
        w_v: Matrix<T>,
        (a_k, b_k): (Matrix<T>, Matrix<T>),
        (a_v, b_v): (Matrix<T>, Matrix<T>),
        scale: T,
    ) -> Result<Self> {
        let w = Self {
            w_k,
            w_v,
            a_k,
            b_k,
            a_v,
            b_v,
            scale,
        };
        w.validate()?;
        Ok(w)
    }

    fn validate(&self) -> Result<()> {
        let (d, da) = self.w_k.shape();
        let r = self.a_k.cols();
        let max = d.min(da);
        if r < 1 || r > max {
            return Err(DecorError::InvalidLoraRank { r, max });
        }
        let expect = [
            ("w_v", &self.w_v, (d, da)),
            ("a_k", &self.a_k, (d, r)),
            ("b_k", &self.b_k, (r, da)),
            ("a_v", &self.a_v, (d, r)),
            ("b_v", &self.b_v, (r, da)),
        ];
        for (name, m, shape) in expect {
            if m.shape() != shape {
                return Err(DecorError::ShapeMismatch {
                    op: name,
                    left: m.shape(),
                    right: shape,
                });
            }
        }
        if !self.scale.is_finite() {
            return Err(DecorError::NonFinite { row: 0, col: 0 });
        }
        Ok(())
    }

    pub fn d(&self) -> usize {
        self.w_k.rows()
    }

    pub fn d_attn(&self) -> usize {
        self.w_k.cols()
    }

    pub fn rank(&self) -> usize {
        self.a_k.cols()
    }

    pub fn delta_k(&self) -> Matrix<T> {
        self.a_k.matmul(&self.b_k).expect("validated shapes")
    }

    pub fn delta_v(&self) -> Matrix<T> {
        self.a_v.matmul(&self.b_v).expect("validated shapes")
    }

    fn check_input(&self, x: &Matrix<T>) -> Result<()> {
        if x.cols() != self.d() {
            return Err(DecorError::ShapeMismatch {
                op: "attention input",
                left: x.shape(),
                right: self.w_k.shape(),
            });
        }
        Ok(())
    }

    /// `x · w_k`, `x · w_v`
    pub fn base_path(&self, x: &Matrix<T>) -> Result<AttentionOutput<T>> {
        self.check_input(x)?;
        Ok(AttentionOutput {
            keys: x.matmul(&self.w_k)?,
            values: x.matmul(&self.w_v)?,
        })
    }

    /// `scale · (x · a) · b` for keys and values.
    pub fn lora_path(&self, x: &Matrix<T>) -> Result<AttentionOutput<T>> {
        self.check_input(x)?;
        Ok(AttentionOutput {
            keys: x.matmul(&self.a_k)?.matmul(&self.b_k)?.scale(self.scale),
            values: x.matmul(&self.a_v)?.matmul(&self.b_v)?.scale(self.scale),
        })
    }
}

/// Both paths consume `x`.
pub fn forward_standard<T: Scalar>(
    x: &Matrix<T>,
    w: &LoraAttentionWeights<T>,
) -> Result<AttentionOutput<T>> {
    forward_decor(x, x, w)
}

/// Base path consumes `x`, LoRA path consumes `x_prime`.
pub fn forward_decor<T: Scalar>(
    x: &Matrix<T>,
    x_prime: &Matrix<T>,
    w: &LoraAttentionWeights<T>,
) -> Result<AttentionOutput<T>> {
    if x.shape() != x_prime.shape() {
        return Err(DecorError::ShapeMismatch {
            op: "forward_decor",
            left: x.shape(),
            right: x_prime.shape(),
        });
    }
    w.base_path(x)?.add(&w.lora_path(x_prime)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoraInit {
    /// `b = 0`: the update starts disabled.
    #[default]
    ZeroB,
    Spherical,
}

fn gaussian<T: Scalar>(rng: &mut ChaCha8Rng, rows: usize, cols: usize, std: f64) -> Matrix<T> {
    Matrix::from_fn(rows, cols, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        T::lit(z * std)
    })
}

fn check_rank(d: usize, d_attn: usize, r: usize) -> Result<()> {
    let max = d.min(d_attn);
    if r < 1 || r > max {
        return Err(DecorError::InvalidLoraRank { r, max });
    }
    Ok(())
}

/// Random base weights and factors; deterministic per seed.
pub fn random_lora<T: Scalar>(
    seed: u64,
    d: usize,
    d_attn: usize,
    r: usize,
    scale: f64,
    init: LoraInit,
) -> Result<LoraAttentionWeights<T>> {
    check_rank(d, d_attn, r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ws = 1.0 / (d as f64).sqrt();
    let w_k = gaussian(&mut rng, d, d_attn, ws);
    let w_v = gaussian(&mut rng, d, d_attn, ws);
    let a_k = gaussian(&mut rng, d, r, ws);
    let a_v = gaussian(&mut rng, d, r, ws);
    let (b_k, b_v) = match init {
        LoraInit::ZeroB => (Matrix::zeros(r, d_attn), Matrix::zeros(r, d_attn)),
        LoraInit::Spherical => {
            let bs = 1.0 / (r as f64).sqrt();
            (
                gaussian(&mut rng, r, d_attn, bs),
                gaussian(&mut rng, r, d_attn, bs),
            )
        }
    };
    LoraAttentionWeights::new(w_k, w_v, (a_k, b_k), (a_v, b_v), T::lit(scale))
}

/// Like [`random_lora`] with spherical `b`, but every column of `a_k` and
/// `a_v` is a random combination of the rows of `span`.
pub fn random_lora_in_span<T: Scalar>(
    seed: u64,
    span: &Matrix<T>,
    d_attn: usize,
    r: usize,
    scale: f64,
) -> Result<LoraAttentionWeights<T>> {
    let d = span.cols();
    let base = random_lora::<T>(seed, d, d_attn, r, scale, LoraInit::Spherical)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5a11);
    let s = span.frobenius_norm();
    if s == T::zero() {
        return Err(DecorError::EmptySubspace);
    }
    let unit = span.scale(T::one() / s);
    // a = spanᵀ · c, with c: rows(span) x r
    let mut mix = |_: ()| -> Result<Matrix<T>> {
        let c = gaussian::<T>(&mut rng, span.rows(), r, 1.0);
        unit.transpose().matmul(&c)
    };
    let a_k = mix(())?;
    let a_v = mix(())?;
    LoraAttentionWeights::new(
        base.w_k,
        base.w_v,
        (a_k, base.b_k),
        (a_v, base.b_v),
        base.scale,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoraHeader {
    pub kind: String,
    pub d: usize,
    pub d_attn: usize,
    pub r: usize,
    pub scale: f64,
    pub factor_order: Vec<String>,
    pub convention: String,
}

pub fn save_lora<T: Scalar>(
    w: &LoraAttentionWeights<T>,
    path: &Path,
    header_path: &Path,
) -> Result<()> {
    let header = LoraHeader {
        kind: "lora".into(),
        d: w.d(),
        d_attn: w.d_attn(),
        r: w.rank(),
        scale: w.scale.to_f64_lossy(),
        factor_order: FACTOR_ORDER.iter().map(|s| s.to_string()).collect(),
        convention: CONVENTION.into(),
    };
    format::write_payload(path, &[&w.w_k, &w.w_v, &w.a_k, &w.b_k, &w.a_v, &w.b_v])?;
    format::write_header(header_path, &header)
}

pub fn load_lora<T: Scalar>(path: &Path, header_path: &Path) -> Result<LoraAttentionWeights<T>> {
    let h: LoraHeader = format::read_header(header_path)?;
    let bad = |msg: String| DecorError::Format {
        path: header_path.to_path_buf(),
        msg,
    };
    if h.kind != "lora" {
        return Err(bad(format!("expected kind \"lora\", got {:?}", h.kind)));
    }
    if h.factor_order != FACTOR_ORDER {
        return Err(bad(format!(
            "unsupported factor order {:?}",
            h.factor_order
        )));
    }
    check_rank(h.d, h.d_attn, h.r)?;
    let shapes = [
        (h.d, h.d_attn),
        (h.d, h.d_attn),
        (h.d, h.r),
        (h.r, h.d_attn),
        (h.d, h.r),
        (h.r, h.d_attn),
    ];
    let count = shapes.iter().map(|(a, b)| a * b).sum();
    let values = format::read_payload(path, count)?;
    let mut blocks = format::payload_blocks::<T>(path, &values, &shapes)?.into_iter();
    let mut next = || blocks.next().expect("six blocks");
    let (w_k, w_v, a_k, b_k, a_v, b_v) = (next(), next(), next(), next(), next(), next());
    LoraAttentionWeights::new(w_k, w_v, (a_k, b_k), (a_v, b_v), T::lit(h.scale))
}
