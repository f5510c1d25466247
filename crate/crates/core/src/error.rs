// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DecorError {
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("data length {len} does not match shape {rows}x{cols}")]
    BadLength {
        rows: usize,
        cols: usize,
        len: usize,
    },

    #[error("{op}: shape mismatch {}x{} vs {}x{}", left.0, left.1, right.0, right.1)]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("{0}: empty input")]
    Empty(&'static str),

    #[error("word count n={n} must satisfy 1 <= n < l={l}")]
    InvalidWordCount { n: usize, l: usize },

    #[error("expected {expected} token labels, got {got}")]
    LabelCount { expected: usize, got: usize },

    #[error("component index {index} out of range for rank count k={k}")]
    ComponentOutOfRange { index: usize, k: usize },

    #[error("invalid rank range {lo}..={hi} for k={k} (1-based, need 1 <= lo <= hi <= k)")]
    InvalidRankRange { lo: usize, hi: usize, k: usize },

    #[error("requested top={top} singular values but only {available} exist")]
    TopOutOfRange { top: usize, available: usize },

    #[error("alpha={0} outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("{0}: zero norm, scale undefined")]
    ZeroNorm(&'static str),

    #[error("{0}: matrix has rank zero")]
    RankZero(&'static str),

    #[error("subspace is empty (all rows below tolerance)")]
    EmptySubspace,

    #[error("LoRA rank r={r} must satisfy 1 <= r <= {max}")]
    InvalidLoraRank { r: usize, max: usize },

    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),

    #[error("Jacobi SVD did not converge within {sweeps} sweeps")]
    NotConverged { sweeps: usize },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: bad header: {source}", path.display())]
    Header {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{}: {msg}", path.display())]
    Format { path: PathBuf, msg: String },

    #[error("{}: payload has {got} bytes, header implies {expected}", path.display())]
    PayloadSize {
        path: PathBuf,
        expected: usize,
        got: usize,
    },
}

pub type Result<T> = std::result::Result<T, DecorError>;
