// SPDX-License-Identifier: MIT OR Apache-2.0
//! Command-line front end: analysis reports, projection, sweeps and dual-path
//! attention evaluation over embedding files.

use clap::{Parser, Subcommand};

pub mod analyze;
pub mod attn;
pub mod project;
pub mod report;
pub mod sweep;
pub mod synth;

pub use report::UsageError;

#[derive(Debug, Parser)]
#[command(
    name = "decor",
    version,
    about = "Text-embedding decomposition and subspace separation"
)]
pub struct Cli {
    /// Omit timestamps so reruns produce byte-identical reports.
    #[arg(long, global = true)]
    pub deterministic: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Singular spectra and component-group similarity profiles.
    Analyze(analyze::AnalyzeArgs),
    /// Apply X' = X - αXP and write the projected embedding.
    Project(project::ProjectArgs),
    /// Sweep separation strengths and suppression baselines.
    Sweep(sweep::SweepArgs),
    /// Evaluate standard vs dual-path LoRA keys and values.
    Attn(attn::AttnArgs),
    /// Generate synthetic pad-coherent embeddings.
    Synth(synth::SynthArgs),
    /// Generate random LoRA attention weights.
    SynthLora(synth::SynthLoraArgs),
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    let det = cli.deterministic;
    match cli.command {
        Command::Analyze(a) => analyze::run(&a, det),
        Command::Project(a) => project::run(&a),
        Command::Sweep(a) => sweep::run(&a, det),
        Command::Attn(a) => attn::run(&a, det),
        Command::Synth(a) => synth::run(&a),
        Command::SynthLora(a) => synth::run_lora(&a),
    }
}
