// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use decor_core::format::default_header_path;
use decor_core::linalg::{norm, Matrix};
use decor_core::{forward_decor, forward_standard, load_lora, Embedding64, LoraWeights64};
use serde::Serialize;

use crate::report::{self, num, usage};

#[derive(Debug, Args)]
pub struct AttnArgs {
    /// Original embedding (feeds the base path).
    pub embedding: PathBuf,
    /// Projected embedding (feeds the LoRA path in the dual-path forward).
    pub projected: PathBuf,
    #[arg(long)]
    pub lora: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct BlockNorms {
    word: f64,
    pad: f64,
}

#[derive(Debug, Serialize)]
struct AttnSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_unix: Option<u64>,
    embedding: String,
    projected: String,
    lora: String,
    l: usize,
    d: usize,
    d_attn: usize,
    rank: usize,
    scale: f64,
    key_delta: f64,
    value_delta: f64,
    lora_key_standard: BlockNorms,
    lora_key_decor: BlockNorms,
    lora_value_standard: BlockNorms,
    lora_value_decor: BlockNorms,
    /// decor / standard LoRA-path key norm over word tokens.
    word_key_suppression: Option<f64>,
    word_value_suppression: Option<f64>,
}

fn block_norms(m: &Matrix<f64>, n: usize) -> BlockNorms {
    BlockNorms {
        word: m.slice_rows(0, n).frobenius_norm(),
        pad: m.slice_rows(n, m.rows()).frobenius_norm(),
    }
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    (b > 0.0).then(|| a / b)
}

pub fn run(args: &AttnArgs, deterministic: bool) -> Result<()> {
    let e = report::load(&args.embedding)?;
    let p = report::load(&args.projected)?;
    let w: LoraWeights64 = load_lora(&args.lora, &default_header_path(&args.lora))
        .with_context(|| format!("loading LoRA {}", args.lora.display()))?;
    if e.x().shape() != p.x().shape() {
        return Err(usage(format!(
            "embedding is {}x{} but projected embedding is {}x{}",
            e.l(),
            e.d(),
            p.l(),
            p.d()
        )));
    }
    if w.d() != e.d() {
        return Err(usage(format!(
            "LoRA expects d={} but embeddings have d={}",
            w.d(),
            e.d()
        )));
    }

    let standard = forward_standard(e.x(), &w)?;
    let decor = forward_decor(e.x(), p.x(), &w)?;
    let delta = decor.sub(&standard)?;
    let lora_std = w.lora_path(e.x())?;
    let lora_dec = w.lora_path(p.x())?;

    report::ensure_dir(&args.out)?;
    let save = |m: &Matrix<f64>, name: &str| -> Result<()> {
        let out: Embedding64 = e.with_same_tokens(m.clone())?.with_name(name);
        report::save(&out, &args.out.join(format!("{name}.bin")))
    };
    save(&standard.keys, "standard_keys")?;
    save(&standard.values, "standard_values")?;
    save(&decor.keys, "decor_keys")?;
    save(&decor.values, "decor_values")?;

    let rows: Vec<Vec<String>> = (0..e.l())
        .map(|i| {
            vec![
                (i + 1).to_string(),
                e.label(i),
                num(norm(delta.keys.row(i))),
                num(norm(delta.values.row(i))),
                num(norm(lora_std.keys.row(i))),
                num(norm(lora_dec.keys.row(i))),
                num(norm(lora_std.values.row(i))),
                num(norm(lora_dec.values.row(i))),
            ]
        })
        .collect();
    report::write_csv(
        &args.out.join("attn.csv"),
        &[
            "index",
            "label",
            "key_delta",
            "value_delta",
            "lora_key_standard",
            "lora_key_decor",
            "lora_value_standard",
            "lora_value_decor",
        ],
        &rows,
    )?;

    let n = e.n();
    let (ks, kd) = (
        block_norms(&lora_std.keys, n),
        block_norms(&lora_dec.keys, n),
    );
    let (vs, vd) = (
        block_norms(&lora_std.values, n),
        block_norms(&lora_dec.values, n),
    );
    let summary = AttnSummary {
        generated_unix: report::timestamp(deterministic),
        embedding: report::display(&args.embedding),
        projected: report::display(&args.projected),
        lora: report::display(&args.lora),
        l: e.l(),
        d: e.d(),
        d_attn: w.d_attn(),
        rank: w.rank(),
        scale: w.scale,
        key_delta: delta.keys.frobenius_norm(),
        value_delta: delta.values.frobenius_norm(),
        word_key_suppression: ratio(kd.word, ks.word),
        word_value_suppression: ratio(vd.word, vs.word),
        lora_key_standard: ks,
        lora_key_decor: kd,
        lora_value_standard: vs,
        lora_value_decor: vd,
    };
    report::write_json(&args.out.join("attn.json"), &summary)?;
    println!("{}", args.out.join("attn.json").display());
    Ok(())
}
