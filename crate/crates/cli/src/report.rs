// SPDX-License-Identifier: MIT OR Apache-2.0
//! CSV/JSON writers and shared argument parsing.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use decor_core::format::default_header_path;
use decor_core::{load_embedding, save_embedding, Embedding64};
use serde::Serialize;

/// Bad invocation; the binary exits with status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "usage: {}", self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn parse_alpha(s: &str) -> std::result::Result<f64, String> {
    let a: f64 = s
        .trim()
        .parse()
        .map_err(|e| format!("bad alpha `{s}`: {e}"))?;
    if (0.0..=1.0).contains(&a) {
        Ok(a)
    } else {
        Err(format!("alpha {a} outside [0, 1]"))
    }
}

/// `lo-hi` (1-based, inclusive).
pub fn parse_rank_range(s: &str) -> std::result::Result<(usize, usize), String> {
    let (lo, hi) = s
        .split_once(['-', ':'])
        .ok_or_else(|| format!("rank range `{s}` must look like LO-HI"))?;
    let lo: usize = lo
        .trim()
        .parse()
        .map_err(|e| format!("bad rank `{lo}`: {e}"))?;
    let hi: usize = hi
        .trim()
        .parse()
        .map_err(|e| format!("bad rank `{hi}`: {e}"))?;
    if lo < 1 || lo > hi {
        return Err(format!("rank range {lo}-{hi} needs 1 <= LO <= HI"));
    }
    Ok((lo, hi))
}

pub fn load(path: &Path) -> Result<Embedding64> {
    load_embedding(path, &default_header_path(path))
        .with_context(|| format!("loading embedding {}", path.display()))
}

pub fn save(e: &Embedding64, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    save_embedding(e, path, &default_header_path(path))
        .with_context(|| format!("writing embedding {}", path.display()))
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Writes a CSV file from a header row and string records.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

/// Shortest representation that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// Seconds since the epoch, or `None` in deterministic mode.
pub fn timestamp(deterministic: bool) -> Option<u64> {
    if deterministic {
        return None;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs())
}

pub fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}

pub fn display(path: &Path) -> String {
    path.display().to_string()
}

pub fn join(dir: &Path, name: impl AsRef<Path>) -> PathBuf {
    dir.join(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_parser_bounds() {
        assert_eq!(parse_alpha("0.8"), Ok(0.8));
        assert!(parse_alpha("1.2").is_err());
        assert!(parse_alpha("-0.1").is_err());
        assert!(parse_alpha("x").is_err());
    }

    #[test]
    fn rank_range_parser() {
        assert_eq!(parse_rank_range("2-9"), Ok((2, 9)));
        assert_eq!(parse_rank_range("20:54"), Ok((20, 54)));
        assert!(parse_rank_range("0-3").is_err());
        assert!(parse_rank_range("5-3").is_err());
        assert!(parse_rank_range("7").is_err());
    }

    #[test]
    fn numbers_round_trip() {
        for v in [
            0.0,
            0.1,
            1.0 / 3.0,
            6.02214076e23,
            -2.5e-300,
            2.4136787837045913e-13,
        ] {
            assert_eq!(num(v).parse::<f64>().unwrap(), v);
        }
    }
}
