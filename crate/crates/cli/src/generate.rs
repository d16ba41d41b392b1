//! The `generate` subcommand: write synthetic benchmark datasets (Gaussian
//! mixture or hierarchical) to CSV or HTSN binary, labels included.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, ValueEnum};
use hyptsne::synth;

use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    /// Mixture of isotropic Gaussians, one class per component.
    Gaussian,
    /// Random tree of nested clusters; labels are the top-level branch.
    Hierarchical,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    /// Number of points.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 50)]
    pub dims: usize,
    /// Mixture components (gaussian only).
    #[arg(long, default_value_t = 3)]
    pub classes: usize,
    /// Branching factor (hierarchical only).
    #[arg(long, default_value_t = 3)]
    pub branching: usize,
    /// Tree depth (hierarchical only).
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    /// Distance scale between cluster centers.
    #[arg(long, default_value_t = 10.0)]
    pub separation: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file; labels go into the CSV or a .labels sidecar.
    #[arg(long)]
    pub output: PathBuf,
    /// Output format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<io::FileFormat>,
}

pub fn execute(args: &GenerateArgs) -> Result<()> {
    if args.n == 0 {
        bail!("--n must be positive");
    }
    let format = io::resolve_format(&args.output, args.format)?;
    let (data, labels) = match args.kind {
        Kind::Gaussian => {
            synth::gaussian_mixture(args.n, args.classes, args.dims, args.separation, args.seed)
        }
        Kind::Hierarchical => synth::hierarchical(
            args.n,
            args.branching,
            args.depth,
            args.dims,
            args.separation,
            args.seed,
        ),
    };
    if let Some(dir) = args.output.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    io::save_dataset(&args.output, format, &data, Some(&labels))?;
    println!(
        "wrote {} points x {} dims ({} classes) to {}",
        data.n(),
        data.dims(),
        labels.iter().collect::<std::collections::BTreeSet<_>>().len(),
        args.output.display()
    );
    Ok(())
}
