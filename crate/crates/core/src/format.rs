// SPDX-License-Identifier: MIT OR Apache-2.0
//! On-disk layout shared by embeddings, projectors and LoRA weights: a raw
//! little-endian `f32` row-major payload plus a JSON header sidecar.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{DecorError, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// `foo.bin` -> `foo.json`
pub fn default_header_path(payload: &Path) -> PathBuf {
    payload.with_extension("json")
}

pub fn write_header<H: Serialize>(path: &Path, header: &H) -> Result<()> {
    let mut text = serde_json::to_string_pretty(header).map_err(|source| DecorError::Header {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|source| DecorError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_header<H: DeserializeOwned>(path: &Path) -> Result<H> {
    let text = fs::read_to_string(path).map_err(|source| DecorError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| DecorError::Header {
        path: path.to_path_buf(),
        source,
    })
}

/// Serializes matrices back to back as `f32` little-endian.
pub fn write_payload<T: Scalar>(path: &Path, blocks: &[&Matrix<T>]) -> Result<()> {
    let total: usize = blocks.iter().map(|m| m.as_slice().len()).sum();
    let mut bytes = Vec::with_capacity(total * 4);
    for m in blocks {
        for v in m.as_slice() {
            bytes.extend_from_slice(&v.to_f32_lossy().to_le_bytes());
        }
    }
    fs::write(path, bytes).map_err(|source| DecorError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads exactly `count` little-endian `f32` values.
pub fn read_payload(path: &Path, count: usize) -> Result<Vec<f32>> {
    let bytes = fs::read(path).map_err(|source| DecorError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if bytes.len() != count * 4 {
        return Err(DecorError::PayloadSize {
            path: path.to_path_buf(),
            expected: count * 4,
            got: bytes.len(),
        });
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect())
}

/// Splits a flat payload into consecutive `rows x cols` blocks.
pub fn payload_blocks<T: Scalar>(
    path: &Path,
    values: &[f32],
    shapes: &[(usize, usize)],
) -> Result<Vec<Matrix<T>>> {
    let mut offset = 0;
    let mut out = Vec::with_capacity(shapes.len());
    for &(rows, cols) in shapes {
        let n = rows * cols;
        let data = values[offset..offset + n]
            .iter()
            .map(|&v| T::from_f32(v).unwrap_or_else(T::nan))
            .collect();
        let m = Matrix::new(rows, cols, data).map_err(|e| DecorError::Format {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        out.push(m);
        offset += n;
    }
    Ok(out)
}
