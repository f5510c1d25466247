// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use decor_core::format::default_header_path;
use decor_core::{
    build_projector, decor_with_projector, save_projector, DualPathConfig, ProjectionMethod,
};

use crate::report::{self, parse_alpha, usage};

#[derive(Debug, Args)]
pub struct ProjectArgs {
    pub input: PathBuf,
    /// Separation strength in [0, 1].
    #[arg(long, value_parser = parse_alpha, default_value_t = 0.8)]
    pub alpha: f64,
    /// Embedding whose subspace is removed; defaults to the input's own word rows.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Use every row of --target rather than only its word rows.
    #[arg(long, requires = "target")]
    pub target_include_pad: bool,
    /// Skip Frobenius norm matching against the input.
    #[arg(long)]
    pub no_resize: bool,
    /// Projector construction: `svd` or `gram_schmidt`.
    #[arg(long, default_value = "svd")]
    pub method: ProjectionMethod,
    /// Also write the projector (d x d) here.
    #[arg(long)]
    pub projector_out: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &ProjectArgs) -> Result<()> {
    let e = report::load(&args.input)?;
    let (source, desc) = match &args.target {
        Some(t) => {
            let te = report::load(t)?;
            let rows = if args.target_include_pad {
                te.x().clone()
            } else {
                te.words()
            };
            let scope = if args.target_include_pad {
                "all rows"
            } else {
                "word rows"
            };
            (rows, format!("{} ({scope})", t.display()))
        }
        None => (e.words(), format!("{} (word rows)", args.input.display())),
    };
    if source.cols() != e.d() {
        return Err(usage(format!(
            "target dimension {} does not match input dimension {}",
            source.cols(),
            e.d()
        )));
    }
    let proj = build_projector(&source, args.method).context("building projector")?;
    let cfg = DualPathConfig::new(args.alpha, !args.no_resize).map_err(|e| usage(e.to_string()))?;
    let out = decor_with_projector(e.x(), &proj, &cfg).context("projecting")?;
    let residual = proj.residual(&out, e.x())?;

    let mut projected = e.with_matrix(out)?;
    projected = projected.with_name(format!(
        "{} alpha={} method={}",
        desc, args.alpha, args.method
    ));
    report::save(&projected, &args.out)?;
    if let Some(p) = &args.projector_out {
        save_projector(&proj, Some(&desc), p, &default_header_path(p))
            .with_context(|| format!("writing projector {}", p.display()))?;
    }
    println!("rank {} projector from {}", proj.rank, desc);
    println!("residual ||X'P||_F/||X||_F = {}", report::num(residual));
    Ok(())
}
