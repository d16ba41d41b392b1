//! The `embed` subcommand: run the full pipeline on one dataset and write
//! `embedding.csv`, `report.json` and optionally `embedding.svg` into the
//! output directory.

use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use clap::Args;
use hyptsne::metrics::{one_nn_error, precision_recall, relative_cost_error};
use hyptsne::optimizer::{run, Instrumentation, OptimizerConfig};
use hyptsne::quadtree::SplitRule;

use crate::io;
use crate::svg;

#[derive(Debug, Args)]
pub struct EmbedArgs {
    /// Input dataset (CSV with header, or HTSN binary).
    #[arg(long)]
    pub input: PathBuf,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<io::FileFormat>,
    /// Directory receiving embedding.csv, report.json and embedding.svg.
    #[arg(long)]
    pub output_dir: PathBuf,
    #[arg(long, default_value_t = 30.0)]
    pub perplexity: f64,
    /// Far-field accuracy knob; 0 reproduces the exact gradient.
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    /// Radial split rule for the polar quadtree.
    #[arg(long, default_value = "equal-area")]
    pub split: SplitRule,
    /// Use the O(n^2) gradient instead of the quadtree.
    #[arg(long)]
    pub exact: bool,
    /// Also run the exact optimizer on the same seed and record the
    /// accelerated run's gradient and cost errors against it.
    #[arg(long, conflicts_with = "exact")]
    pub exact_baseline: bool,
    /// Early-exaggeration iterations.
    #[arg(long, default_value_t = 250)]
    pub ex_iters: usize,
    /// Main-phase iterations.
    #[arg(long, default_value_t = 750)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Override the default n/12000 learning rate.
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// Also write embedding.svg.
    #[arg(long)]
    pub svg: bool,
}

impl EmbedArgs {
    pub fn config(&self) -> OptimizerConfig {
        OptimizerConfig {
            perplexity: self.perplexity,
            theta: self.theta,
            exaggeration_iters: self.ex_iters,
            max_iters: self.max_iters,
            learning_rate: self.learning_rate,
            split_rule: self.split,
            exact_mode: self.exact,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }
}

pub fn execute(args: &EmbedArgs) -> Result<()> {
    let format = io::resolve_format(&args.input, args.format)?;
    let dataset = io::load_dataset(&args.input, format)?;
    let n = dataset.data.n();
    let config = args.config();

    log::info!("embedding {n} points from {}", args.input.display());
    let instr =
        Instrumentation { record_costs: true, gradient_error_schedule: args.exact_baseline };
    let mut out = run(&dataset.data, &config, &instr)?;

    if args.exact_baseline {
        log::info!("running the exact baseline on the same seed");
        let exact_config = OptimizerConfig { exact_mode: true, ..config.clone() };
        let exact_out = run(&dataset.data, &exact_config, &Instrumentation::default())?;
        let fm = &mut out.report.final_metrics;
        fm.final_cost_exact_run = exact_out.report.final_metrics.final_cost;
        if let (Some(exact), Some(accel)) = (fm.final_cost_exact_run, fm.final_cost) {
            fm.relative_cost_error = Some(relative_cost_error(exact, accel));
        }
    }

    if let Some(labels) = &dataset.labels {
        out.report.final_metrics.one_nn_error = Some(one_nn_error(&out.embedding, labels)?);
    }
    let k_max = 30.min(n - 1);
    if k_max >= 1 {
        out.report.final_metrics.precision_recall =
            Some(precision_recall(&out.reduced, &out.embedding, k_max)?);
    }
    out.report.validate().map_err(|m| anyhow!("invalid run report: {m}"))?;

    std::fs::create_dir_all(&args.output_dir)
        .with_context(|| format!("cannot create {}", args.output_dir.display()))?;
    io::write_embedding_csv(
        &args.output_dir.join("embedding.csv"),
        &out.embedding,
        dataset.labels.as_deref(),
    )?;
    io::write_report_json(&args.output_dir.join("report.json"), &out.report)?;
    if args.svg {
        svg::emit_svg(
            &args.output_dir.join("embedding.svg"),
            &out.embedding,
            dataset.labels.as_deref(),
        )?;
    }

    let fm = &out.report.final_metrics;
    println!(
        "embedded {n} points, {} iterations, stop reason {}",
        out.report.iterations.len(),
        out.report.stop_reason
    );
    if let Some(c) = fm.final_cost {
        println!("final KL cost {c:.6}");
    }
    if let Some(e) = fm.relative_cost_error {
        println!("relative cost error vs exact run {e:.3e}");
    }
    if let Some(e) = fm.mean_gradient_error {
        println!("mean gradient approximation error {e:.3e}");
    }
    if let Some(e) = fm.one_nn_error {
        println!("1-NN label error {:.2}%", e * 100.0);
    }
    println!("artifacts written to {}", args.output_dir.display());
    Ok(())
}
