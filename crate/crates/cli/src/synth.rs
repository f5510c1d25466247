// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use decor_core::format::default_header_path;
use decor_core::{
    random_lora, random_lora_in_span, save_lora, synthesize, Embedding64, LoraInit, SyntheticSpec,
};

use crate::report::{self, usage};

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 77)]
    pub l: usize,
    #[arg(long, default_value_t = 768)]
    pub d: usize,
    /// Number of word tokens.
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 0.95)]
    pub pad_coherence: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of embeddings, with seeds `seed, seed+1, ...`.
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    /// Output directory; files are named `seed<N>.bin` / `seed<N>.json`.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &SynthArgs) -> Result<()> {
    if args.count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    report::ensure_dir(&args.out)?;
    for seed in args.seed..args.seed + args.count {
        let spec = SyntheticSpec {
            l: args.l,
            d: args.d,
            n: args.n,
            pad_coherence: args.pad_coherence,
            seed,
        };
        let e: Embedding64 = synthesize(&spec).map_err(|e| usage(e.to_string()))?;
        let path = args.out.join(format!("seed{seed}.bin"));
        report::save(&e, &path)?;
        println!("{}", path.display());
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BInit {
    Zero,
    Spherical,
}

#[derive(Debug, Args)]
pub struct SynthLoraArgs {
    /// Embedding dimension; taken from --span when given.
    #[arg(long, default_value_t = 768)]
    pub d: usize,
    #[arg(long, default_value_t = 64)]
    pub d_attn: usize,
    #[arg(long, default_value_t = 4)]
    pub rank: usize,
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = BInit::Spherical)]
    pub init: BInit,
    /// Draw the `a` factors from the span of this embedding's word rows.
    #[arg(long)]
    pub span: Option<PathBuf>,
    /// Output payload path (header written next to it as .json).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_lora(args: &SynthLoraArgs) -> Result<()> {
    let w = match &args.span {
        Some(p) => {
            let e = report::load(p)?;
            random_lora_in_span(args.seed, &e.words(), args.d_attn, args.rank, args.scale)
        }
        None => {
            let init = match args.init {
                BInit::Zero => LoraInit::ZeroB,
                BInit::Spherical => LoraInit::Spherical,
            };
            random_lora(args.seed, args.d, args.d_attn, args.rank, args.scale, init)
        }
    }
    .map_err(|e| usage(e.to_string()))?;
    if let Some(dir) = args.out.parent().filter(|p| !p.as_os_str().is_empty()) {
        report::ensure_dir(dir)?;
    }
    save_lora(&w, &args.out, &default_header_path(&args.out))
        .with_context(|| format!("writing LoRA {}", args.out.display()))?;
    println!("{}", args.out.display());
    Ok(())
}
