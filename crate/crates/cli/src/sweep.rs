// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use decor_core::format::default_header_path;
use decor_core::linalg::Matrix;
use decor_core::projection::Projector;
use decor_core::{
    build_projector, decor_with_projector, forward_decor, forward_standard, load_lora,
    similarity_profile, suppress_exclude_components, suppress_zero_words, Attention64,
    DualPathConfig, Embedding64, LoraWeights64, ProjectionMethod, SimilarityProfile,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::report::{self, num, opt_num, parse_alpha, parse_rank_range, usage};

pub const DEFAULT_ALPHAS: [f64; 6] = [0.0, 0.25, 0.5, 0.75, 0.8, 1.0];
pub const DEFAULT_RANGES: [(usize, usize); 3] = [(2, 9), (2, 19), (2, 54)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMethod {
    Projection,
    #[value(name = "zero_words", alias = "zero-words")]
    ZeroWords,
    #[value(name = "exclude_components", alias = "exclude-components")]
    ExcludeComponents,
}

impl SweepMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Projection => "projection",
            Self::ZeroWords => "zero_words",
            Self::ExcludeComponents => "exclude_components",
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub input: PathBuf,
    /// Comma-separated separation strengths [default: 0,0.25,0.5,0.75,0.8,1].
    #[arg(long, value_delimiter = ',', value_parser = parse_alpha)]
    pub alphas: Option<Vec<f64>>,
    /// Methods to run; repeatable or comma-separated [default: all].
    #[arg(long = "method", value_enum, value_delimiter = ',')]
    pub methods: Vec<SweepMethod>,
    /// Excluded rank range `LO-HI` (1-based, inclusive); repeatable [default: 2-9, 2-19, 2-54].
    #[arg(long = "exclude-range", value_parser = parse_rank_range)]
    pub exclude_ranges: Vec<(usize, usize)>,
    /// LoRA weights for dual-path key/value deltas.
    #[arg(long)]
    pub lora: Option<PathBuf>,
    #[arg(long)]
    pub no_resize: bool,
    #[arg(long)]
    pub out: PathBuf,
}

/// Validated sweep grid: alphas ascending and unique, ranges 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub alphas: Vec<f64>,
    pub methods: Vec<SweepMethod>,
    pub exclusion_ranges: Vec<(usize, usize)>,
}

impl SweepConfig {
    pub fn new(
        mut alphas: Vec<f64>,
        mut methods: Vec<SweepMethod>,
        exclusion_ranges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        if let Some(a) = alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(usage(format!("alpha {a} outside [0, 1]")));
        }
        if let Some(r) = exclusion_ranges.iter().find(|(lo, hi)| *lo < 1 || lo > hi) {
            return Err(usage(format!("invalid exclusion range {}-{}", r.0, r.1)));
        }
        alphas.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        alphas.dedup();
        methods.sort();
        methods.dedup();
        let cfg = Self {
            alphas,
            methods,
            exclusion_ranges,
        };
        if cfg.points().is_empty() {
            return Err(usage("sweep has no points"));
        }
        Ok(cfg)
    }

    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for m in &self.methods {
            match m {
                SweepMethod::Projection => {
                    out.extend(self.alphas.iter().map(|&a| SweepPoint::Projection(a)))
                }
                SweepMethod::ZeroWords => out.push(SweepPoint::ZeroWords),
                SweepMethod::ExcludeComponents => out.extend(
                    self.exclusion_ranges
                        .iter()
                        .map(|&(lo, hi)| SweepPoint::Exclude(lo, hi)),
                ),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SweepPoint {
    Projection(f64),
    ZeroWords,
    Exclude(usize, usize),
}

impl SweepPoint {
    pub fn id(&self) -> String {
        match self {
            Self::Projection(a) => format!("projection_a{a}"),
            Self::ZeroWords => "zero_words".into(),
            Self::Exclude(lo, hi) => format!("exclude_{lo}-{hi}"),
        }
    }

    fn method(&self) -> SweepMethod {
        match self {
            Self::Projection(_) => SweepMethod::Projection,
            Self::ZeroWords => SweepMethod::ZeroWords,
            Self::Exclude(..) => SweepMethod::ExcludeComponents,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct PointRow {
    pub point: String,
    pub method: SweepMethod,
    pub alpha: Option<f64>,
    pub lo_rank: Option<usize>,
    pub hi_rank: Option<usize>,
    pub word_mean: f64,
    pub pad_mean: f64,
    pub residual: f64,
    pub norm: f64,
    pub key_delta: Option<f64>,
    pub value_delta: Option<f64>,
    pub word_key_delta: Option<f64>,
    pub embedding: String,
    pub profile_csv: String,
}

#[derive(Debug, Serialize)]
struct SweepSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    generated_unix: Option<u64>,
    input: String,
    lora: Option<String>,
    resize: bool,
    config: SweepConfig,
    points: Vec<PointRow>,
}

struct Evaluated {
    point: SweepPoint,
    output: Matrix<f64>,
    profile: SimilarityProfile,
    residual: f64,
    deltas: Option<(f64, f64, f64)>,
}

/// Thread count from `DECOR_THREADS`; 0 or unset lets rayon decide.
pub fn thread_count() -> usize {
    std::env::var("DECOR_THREADS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

pub fn run(args: &SweepArgs, deterministic: bool) -> Result<()> {
    let methods = if args.methods.is_empty() {
        vec![
            SweepMethod::Projection,
            SweepMethod::ZeroWords,
            SweepMethod::ExcludeComponents,
        ]
    } else {
        args.methods.clone()
    };
    let alphas = args
        .alphas
        .clone()
        .unwrap_or_else(|| DEFAULT_ALPHAS.to_vec());
    let ranges = if args.exclude_ranges.is_empty() {
        DEFAULT_RANGES.to_vec()
    } else {
        args.exclude_ranges.clone()
    };
    let cfg = SweepConfig::new(alphas, methods, ranges)?;

    let e = report::load(&args.input)?;
    let lora = match &args.lora {
        Some(p) => {
            let w: LoraWeights64 = load_lora(p, &default_header_path(p))
                .with_context(|| format!("loading LoRA {}", p.display()))?;
            if w.d() != e.d() {
                return Err(usage(format!(
                    "LoRA input dimension {} does not match embedding dimension {}",
                    w.d(),
                    e.d()
                )));
            }
            Some(w)
        }
        None => None,
    };
    let proj =
        build_projector(&e.words(), ProjectionMethod::Svd).context("building word projector")?;
    let baseline = lora
        .as_ref()
        .map(|w| forward_standard(e.x(), w))
        .transpose()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count())
        .build()
        .context("building thread pool")?;
    let points = cfg.points();
    let resize = !args.no_resize;
    let evaluated: Vec<Evaluated> = pool.install(|| {
        points
            .par_iter()
            .map(|p| evaluate(*p, &e, &proj, resize, lora.as_ref().zip(baseline.as_ref())))
            .collect::<Result<Vec<_>>>()
    })?;

    let points_dir = args.out.join("points");
    report::ensure_dir(&points_dir)?;
    let mut rows = Vec::with_capacity(evaluated.len());
    for ev in evaluated {
        let id = ev.point.id();
        let emb_name = format!("points/{id}.bin");
        let profile_name = format!("points/{id}.profile.csv");
        let out_e = e.with_matrix(ev.output.clone())?.with_name(id.clone());
        report::save(&out_e, &args.out.join(&emb_name))?;
        let prof_rows: Vec<Vec<String>> = ev
            .profile
            .per_token
            .iter()
            .enumerate()
            .map(|(i, c)| vec![(i + 1).to_string(), e.label(i), num(*c)])
            .collect();
        report::write_csv(
            &args.out.join(&profile_name),
            &["index", "label", "cosine"],
            &prof_rows,
        )?;

        let (alpha, lo, hi) = match ev.point {
            SweepPoint::Projection(a) => (Some(a), None, None),
            SweepPoint::ZeroWords => (None, None, None),
            SweepPoint::Exclude(l, h) => (None, Some(l), Some(h)),
        };
        rows.push(PointRow {
            point: id,
            method: ev.point.method(),
            alpha,
            lo_rank: lo,
            hi_rank: hi,
            word_mean: ev.profile.word_mean,
            pad_mean: ev.profile.pad_mean,
            residual: ev.residual,
            norm: ev.output.frobenius_norm(),
            key_delta: ev.deltas.map(|d| d.0),
            value_delta: ev.deltas.map(|d| d.1),
            word_key_delta: ev.deltas.map(|d| d.2),
            embedding: emb_name,
            profile_csv: profile_name,
        });
    }

    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.point.clone(),
                r.method.as_str().to_string(),
                opt_num(r.alpha),
                r.lo_rank.map(|v| v.to_string()).unwrap_or_default(),
                r.hi_rank.map(|v| v.to_string()).unwrap_or_default(),
                num(r.word_mean),
                num(r.pad_mean),
                num(r.residual),
                num(r.norm),
                opt_num(r.key_delta),
                opt_num(r.value_delta),
                opt_num(r.word_key_delta),
            ]
        })
        .collect();
    report::write_csv(
        &args.out.join("sweep.csv"),
        &[
            "point",
            "method",
            "alpha",
            "lo_rank",
            "hi_rank",
            "word_mean",
            "pad_mean",
            "residual",
            "norm",
            "key_delta",
            "value_delta",
            "word_key_delta",
        ],
        &csv_rows,
    )?;
    let summary = SweepSummary {
        generated_unix: report::timestamp(deterministic),
        input: report::display(&args.input),
        lora: args.lora.as_deref().map(report::display),
        resize,
        config: cfg,
        points: rows,
    };
    report::write_json(&args.out.join("sweep.json"), &summary)?;
    println!("{}", args.out.join("sweep.csv").display());
    Ok(())
}

fn evaluate(
    point: SweepPoint,
    e: &Embedding64,
    proj: &Projector<f64>,
    resize: bool,
    lora: Option<(&LoraWeights64, &Attention64)>,
) -> Result<Evaluated> {
    let output = match point {
        SweepPoint::Projection(alpha) => {
            decor_with_projector(e.x(), proj, &DualPathConfig::new(alpha, resize)?)?
        }
        SweepPoint::ZeroWords => suppress_zero_words(e),
        SweepPoint::Exclude(lo, hi) => suppress_exclude_components(e, lo, hi)
            .map_err(|err| usage(format!("exclusion range {lo}-{hi}: {err}")))?,
    };
    let profile = similarity_profile(e, &output)?;
    let residual = proj.residual(&output, e.x())?;
    let deltas = match lora {
        Some((w, base)) => {
            let out = forward_decor(e.x(), &output, w)?;
            let diff = out.sub(base)?;
            let words = diff.keys.slice_rows(0, e.n()).frobenius_norm();
            Some((
                diff.keys.frobenius_norm(),
                diff.values.frobenius_norm(),
                words,
            ))
        }
        None => None,
    };
    Ok(Evaluated {
        point,
        output,
        profile,
        residual,
        deltas,
    })
}
