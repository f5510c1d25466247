// SPDX-License-Identifier: MIT OR Apache-2.0

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Result};
use clap::Args;
use decor_core::{
    component_groups_with, mean_spectrum, reconstruct, similarity_profile, spectrum_of, thin_svd,
    Embedding64, GroupRanges, SpectrumReport,
};
use serde::Serialize;

use crate::report::{self, num, parse_rank_range, usage};

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Number of leading singular values reported (clipped to the rank count).
    #[arg(long, default_value_t = 30)]
    pub top: usize,
    #[arg(long, value_parser = parse_rank_range, default_value = "2-9")]
    pub subsequent: (usize, usize),
    #[arg(long, value_parser = parse_rank_range, default_value = "20-54")]
    pub residual: (usize, usize),
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Serialize)]
struct GroupSummary {
    ranks: Vec<usize>,
    word_mean: f64,
    pad_mean: f64,
}

#[derive(Debug, Serialize)]
struct InputSummary {
    input: String,
    name: Option<String>,
    l: usize,
    d: usize,
    n: usize,
    top: usize,
    spectrum: SpectrumReport,
    groups: BTreeMap<&'static str, GroupSummary>,
    spectrum_csv: String,
    profiles_csv: String,
}

#[derive(Debug, Serialize)]
struct Summary {
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_unix: Option<u64>,
    ranges: GroupRanges,
    inputs: Vec<InputSummary>,
    failures: Vec<Failure>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_spectrum: Option<SpectrumReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_dominance_ratio: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Failure {
    input: String,
    error: String,
}

pub fn run(args: &AnalyzeArgs, deterministic: bool) -> Result<()> {
    if args.top == 0 {
        return Err(usage("--top must be at least 1"));
    }
    let ranges = GroupRanges {
        primary: (1, 1),
        subsequent: args.subsequent,
        residual: args.residual,
    };
    report::ensure_dir(&args.out)?;

    let mut used = BTreeMap::new();
    let mut inputs = Vec::new();
    let mut failures = Vec::new();
    for path in &args.inputs {
        let base = report::stem(path);
        let count = used.entry(base.clone()).or_insert(0usize);
        let stem = if *count == 0 {
            base
        } else {
            format!("{base}_{count}")
        };
        *count += 1;
        match analyze_one(path, &stem, args, &ranges) {
            Ok(s) => inputs.push(s),
            Err(e) => {
                eprintln!("error: {}: {e:#}", path.display());
                failures.push(Failure {
                    input: report::display(path),
                    error: format!("{e:#}"),
                });
            }
        }
    }

    let spectra: Vec<SpectrumReport> = inputs.iter().map(|s| s.spectrum.clone()).collect();
    let mean = if spectra.len() > 1 {
        mean_spectrum(&spectra)
    } else {
        None
    };
    if let Some(m) = &mean {
        write_spectrum_csv(&args.out.join("mean_spectrum.csv"), m)?;
    }
    let summary = Summary {
        generated_unix: report::timestamp(deterministic),
        ranges,
        mean_dominance_ratio: mean.as_ref().map(|m| m.dominance_ratio),
        mean_spectrum: mean,
        inputs,
        failures,
    };
    report::write_json(&args.out.join("summary.json"), &summary)?;
    println!("{}", args.out.join("summary.json").display());

    match summary.failures.len() {
        0 => Ok(()),
        n if n == args.inputs.len() => Err(anyhow!("all {n} inputs failed")),
        n => Err(anyhow!("{n} of {} inputs failed", args.inputs.len())),
    }
}

fn analyze_one(
    path: &Path,
    stem: &str,
    args: &AnalyzeArgs,
    ranges: &GroupRanges,
) -> Result<InputSummary> {
    let e: Embedding64 = report::load(path)?;
    let f = thin_svd(e.x())?;
    let top = args.top.min(f.k());
    let spectrum = spectrum_of(&f, top)?;
    let groups = component_groups_with(&f, e.l(), ranges);

    let mut rows = Vec::new();
    let mut summaries = BTreeMap::new();
    for (name, sel) in groups.iter() {
        let prof = similarity_profile(&e, &reconstruct(&f, sel)?)?;
        for (i, c) in prof.per_token.iter().enumerate() {
            rows.push(vec![
                name.to_string(),
                (i + 1).to_string(),
                e.label(i),
                num(*c),
            ]);
        }
        summaries.insert(
            name,
            GroupSummary {
                ranks: sel.ranks(),
                word_mean: prof.word_mean,
                pad_mean: prof.pad_mean,
            },
        );
    }

    let spectrum_csv = format!("{stem}.spectrum.csv");
    let profiles_csv = format!("{stem}.profiles.csv");
    write_spectrum_csv(&args.out.join(&spectrum_csv), &spectrum)?;
    report::write_csv(
        &args.out.join(&profiles_csv),
        &["group", "index", "label", "cosine"],
        &rows,
    )?;

    Ok(InputSummary {
        input: report::display(path),
        name: e.name().map(str::to_string),
        l: e.l(),
        d: e.d(),
        n: e.n(),
        top,
        spectrum,
        groups: summaries,
        spectrum_csv,
        profiles_csv,
    })
}

fn write_spectrum_csv(path: &Path, s: &SpectrumReport) -> Result<()> {
    let rows: Vec<Vec<String>> = s
        .sigmas
        .iter()
        .zip(&s.normalized)
        .enumerate()
        .map(|(i, (sig, nor))| vec![(i + 1).to_string(), num(*sig), num(*nor)])
        .collect();
    report::write_csv(path, &["rank", "sigma", "normalized"], &rows)
}
