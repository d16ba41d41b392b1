//! The `benchmark` subcommand: timed scaling sweeps over subsample sizes,
//! exact vs accelerated modes, split rules and θ values. Each cell runs in
//! isolation; failures are recorded in the artifact and the sweep continues.
//!
//! Artifacts: `scaling.csv` (one row per timed run), `alphas.csv` (empirical
//! order of convergence between consecutive sizes), `theta_sweep.csv`, and
//! `summary.json` with aggregated means and exact/accelerated speedup ratios.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use hyptsne::affinity::DataMatrix;
use hyptsne::metrics::estimate_alpha;
use hyptsne::optimizer::{run, Instrumentation, OptimizerConfig};
use hyptsne::quadtree::SplitRule;
use hyptsne::synth;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::generate::Kind;
use crate::io;

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// Dataset to benchmark on; a synthetic one is generated when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Input format; inferred from the extension when omitted.
    #[arg(long, value_enum)]
    pub format: Option<io::FileFormat>,
    /// Synthetic generator used when --input is omitted.
    #[arg(long, value_enum, default_value = "gaussian")]
    pub synthetic: Kind,
    #[arg(long, default_value_t = 2000)]
    pub synthetic_n: usize,
    #[arg(long, default_value_t = 50)]
    pub dims: usize,
    #[arg(long, default_value_t = 3)]
    pub classes: usize,
    #[arg(long, default_value_t = 3)]
    pub branching: usize,
    #[arg(long, default_value_t = 3)]
    pub depth: usize,
    #[arg(long, default_value_t = 10.0)]
    pub separation: f64,
    /// Subsample fractions, each in (0, 1].
    #[arg(long, value_delimiter = ',',
          default_values_t = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0])]
    pub fractions: Vec<f64>,
    /// Timed runs per cell.
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, default_value_t = 30.0)]
    pub perplexity: f64,
    /// θ used by the accelerated runs of the scaling sweep.
    #[arg(long, default_value_t = 0.5)]
    pub theta: f64,
    /// θ grid for the full-size sweep.
    #[arg(long, value_delimiter = ',',
          default_values_t = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0])]
    pub thetas: Vec<f64>,
    /// Split rules to compare, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "equal-area")]
    pub splits: Vec<SplitRule>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest size exact mode runs at.
    #[arg(long, default_value_t = 20_000)]
    pub exact_cap: usize,
    /// Skip exact-mode runs entirely.
    #[arg(long)]
    pub no_exact: bool,
    /// Skip the θ sweep.
    #[arg(long)]
    pub no_theta_sweep: bool,
    #[arg(long, default_value_t = 250)]
    pub ex_iters: usize,
    #[arg(long, default_value_t = 750)]
    pub max_iters: usize,
    #[arg(long)]
    pub output_dir: PathBuf,
}

/// Per-size mean iteration times for one (split rule, mode) series.
type SizedMeans = (Vec<usize>, Vec<f64>);

#[derive(Debug)]
struct Cell {
    split: SplitRule,
    size: usize,
    run: usize,
    mode: &'static str,
    iterations: usize,
    mean_iter_seconds: Option<f64>,
    status: String,
}

/// Mean per-iteration wall time of one optimization, P construction and
/// instrumentation excluded. Errors come back as strings so the sweep can
/// record and continue.
fn timed_run(data: &DataMatrix, config: &OptimizerConfig) -> (usize, Option<f64>, String) {
    let instr = Instrumentation { record_costs: false, gradient_error_schedule: false };
    match run(data, config, &instr) {
        Ok(out) => match out.report.timings.pooled {
            Some(t) => (out.report.iterations.len(), Some(t.mean), "ok".to_string()),
            None => (0, None, "no iterations recorded".to_string()),
        },
        Err(e) => (0, None, format!("error: {e}")),
    }
}

fn cell_seed(base: u64, size: usize, run: usize) -> u64 {
    base ^ (size as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ ((run as u64) << 48)
}

/// Status strings can carry error messages; quote them when they would
/// break the CSV row.
fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Exactly `size` distinct row indices, deterministic in the seed.
fn subsample_indices(n: usize, size: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx = rand::seq::index::sample(&mut rng, n, size).into_vec();
    idx.sort_unstable();
    idx
}

fn load_or_generate(args: &BenchmarkArgs) -> Result<DataMatrix> {
    if let Some(path) = &args.input {
        let format = io::resolve_format(path, args.format)?;
        return Ok(io::load_dataset(path, format)?.data);
    }
    let (data, _labels) = match args.synthetic {
        Kind::Gaussian => synth::gaussian_mixture(
            args.synthetic_n,
            args.classes,
            args.dims,
            args.separation,
            args.seed,
        ),
        Kind::Hierarchical => synth::hierarchical(
            args.synthetic_n,
            args.branching,
            args.depth,
            args.dims,
            args.separation,
            args.seed,
        ),
    };
    Ok(data)
}

pub fn execute(args: &BenchmarkArgs) -> Result<()> {
    if args.fractions.is_empty() {
        bail!("--fractions must not be empty");
    }
    if args.fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
        bail!("every fraction must lie in (0, 1]");
    }
    if args.repeats == 0 {
        bail!("--repeats must be at least 1");
    }
    if args.splits.is_empty() {
        bail!("--splits must not be empty");
    }

    let data = load_or_generate(args)?;
    let n = data.n();
    std::fs::create_dir_all(&args.output_dir)
        .with_context(|| format!("cannot create {}", args.output_dir.display()))?;

    let mut fractions = args.fractions.clone();
    fractions.sort_by(f64::total_cmp);
    let mut sizes: Vec<usize> = fractions
        .iter()
        .map(|f| ((f * n as f64).ceil() as usize).min(n))
        .collect();
    sizes.dedup();

    let base = OptimizerConfig {
        perplexity: args.perplexity,
        theta: args.theta,
        exaggeration_iters: args.ex_iters,
        max_iters: args.max_iters,
        ..OptimizerConfig::default()
    };

    let mut cells: Vec<Cell> = Vec::new();
    for (si, &split) in args.splits.iter().enumerate() {
        for &size in &sizes {
            for run_id in 0..args.repeats {
                let seed = cell_seed(args.seed, size, run_id);
                let sub = data.subsample(&subsample_indices(n, size, seed));

                log::info!("scaling: split {split}, size {size}, run {run_id}, accelerated");
                let config =
                    OptimizerConfig { split_rule: split, seed, ..base.clone() };
                let (iters, mean, status) = timed_run(&sub, &config);
                cells.push(Cell {
                    split,
                    size,
                    run: run_id,
                    mode: "accelerated",
                    iterations: iters,
                    mean_iter_seconds: mean,
                    status,
                });

                // Exact mode never touches the tree, so one split rule's
                // worth of runs covers it.
                if si == 0 && !args.no_exact && size <= args.exact_cap {
                    log::info!("scaling: size {size}, run {run_id}, exact");
                    let config = OptimizerConfig {
                        split_rule: split,
                        seed,
                        exact_mode: true,
                        ..base.clone()
                    };
                    let (iters, mean, status) = timed_run(&sub, &config);
                    cells.push(Cell {
                        split,
                        size,
                        run: run_id,
                        mode: "exact",
                        iterations: iters,
                        mean_iter_seconds: mean,
                        status,
                    });
                }
            }
        }
    }
    write_scaling_csv(&args.output_dir.join("scaling.csv"), &cells)?;

    // Per-size means over successful runs, keyed by (split, mode).
    let mut grouped: BTreeMap<(String, &'static str), BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for cell in &cells {
        if let Some(m) = cell.mean_iter_seconds {
            grouped
                .entry((cell.split.to_string(), cell.mode))
                .or_default()
                .entry(cell.size)
                .or_default()
                .push(m);
        }
    }
    let averaged: BTreeMap<(String, &'static str), SizedMeans> = grouped
        .iter()
        .map(|(key, per_size)| {
            let sizes: Vec<usize> = per_size.keys().copied().collect();
            let means: Vec<f64> = per_size
                .values()
                .map(|ts| ts.iter().sum::<f64>() / ts.len() as f64)
                .collect();
            (key.clone(), (sizes, means))
        })
        .collect();

    let mut alpha_rows = String::from("split_rule,mode,size_from,size_to,alpha\n");
    let mut alpha_summaries = Vec::new();
    for ((split, mode), (sizes, means)) in &averaged {
        if sizes.len() < 2 {
            continue;
        }
        match estimate_alpha(sizes, means) {
            Ok(est) => {
                for (w, &a) in sizes.windows(2).zip(&est.alphas) {
                    alpha_rows.push_str(&format!("{split},{mode},{},{},{a}\n", w[0], w[1]));
                }
                let mean_alpha = est.alphas.iter().sum::<f64>() / est.alphas.len() as f64;
                alpha_summaries.push(json!({
                    "split_rule": split,
                    "mode": mode,
                    "alphas": est.alphas,
                    "mean_alpha": mean_alpha,
                }));
            }
            Err(e) => log::warn!("alpha estimation failed for {split}/{mode}: {e}"),
        }
    }
    io::write_atomic(&args.output_dir.join("alphas.csv"), alpha_rows.as_bytes())?;

    let mut theta_cells: Vec<(f64, usize, usize, Option<f64>, String)> = Vec::new();
    if !args.no_theta_sweep {
        for &theta in &args.thetas {
            for run_id in 0..args.repeats {
                log::info!("theta sweep: theta {theta}, run {run_id}");
                let seed = cell_seed(args.seed, n, run_id);
                let config = OptimizerConfig {
                    theta,
                    split_rule: args.splits[0],
                    seed,
                    ..base.clone()
                };
                let (iters, mean, status) = timed_run(&data, &config);
                theta_cells.push((theta, run_id, iters, mean, status));
            }
        }
        let mut rows = String::from("theta,run,size,iterations,mean_iter_seconds,status\n");
        for (theta, run_id, iters, mean, status) in &theta_cells {
            let mean = mean.map_or(String::new(), |m| m.to_string());
            rows.push_str(&format!(
                "{theta},{run_id},{n},{iters},{mean},{}\n",
                csv_field(status)
            ));
        }
        io::write_atomic(&args.output_dir.join("theta_sweep.csv"), rows.as_bytes())?;
    }

    let scaling_summary: Vec<serde_json::Value> = averaged
        .iter()
        .flat_map(|((split, mode), (sizes, means))| {
            sizes.iter().zip(means).map(move |(&size, &mean)| {
                json!({
                    "split_rule": split,
                    "mode": mode,
                    "size": size,
                    "mean_iter_seconds": mean,
                })
            })
        })
        .collect();

    let mut speedups = Vec::new();
    if let Some((_, (ex_sizes, ex_means))) = averaged
        .iter()
        .find(|((_, mode), _)| *mode == "exact")
    {
        for ((split, mode), (acc_sizes, acc_means)) in &averaged {
            if *mode != "accelerated" {
                continue;
            }
            for (&size, &acc) in acc_sizes.iter().zip(acc_means) {
                if let Some(k) = ex_sizes.iter().position(|&s| s == size) {
                    speedups.push(json!({
                        "split_rule": split,
                        "size": size,
                        "exact_over_accelerated": ex_means[k] / acc,
                    }));
                }
            }
        }
    }

    let mut theta_summary = Vec::new();
    {
        let mut per_theta: BTreeMap<u64, (f64, Vec<f64>)> = BTreeMap::new();
        for (theta, _run, _iters, mean, _status) in &theta_cells {
            if let Some(m) = mean {
                per_theta.entry(theta.to_bits()).or_insert((*theta, Vec::new())).1.push(*m);
            }
        }
        for (_, (theta, ms)) in per_theta {
            theta_summary.push(json!({
                "theta": theta,
                "mean_iter_seconds": ms.iter().sum::<f64>() / ms.len() as f64,
                "runs_ok": ms.len(),
            }));
        }
    }

    let summary = json!({
        "n": n,
        "dims": data.dims(),
        "seed": args.seed,
        "perplexity": args.perplexity,
        "theta": args.theta,
        "iterations": { "exaggeration": args.ex_iters, "main": args.max_iters },
        "sizes": sizes,
        "repeats": args.repeats,
        "scaling": scaling_summary,
        "alphas": alpha_summaries,
        "speedups": speedups,
        "theta_sweep": theta_summary,
    });
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    io::write_atomic(&args.output_dir.join("summary.json"), text.as_bytes())?;

    let failed = cells.iter().filter(|c| c.status != "ok").count();
    println!(
        "benchmark complete: {} timed runs ({failed} failed), artifacts in {}",
        cells.len() + theta_cells.len(),
        args.output_dir.display()
    );
    Ok(())
}

fn write_scaling_csv(path: &std::path::Path, cells: &[Cell]) -> Result<()> {
    let mut rows = String::from("split_rule,size,run,mode,iterations,mean_iter_seconds,status\n");
    for c in cells {
        let mean = c.mean_iter_seconds.map_or(String::new(), |m| m.to_string());
        rows.push_str(&format!(
            "{},{},{},{},{},{mean},{}\n",
            c.split,
            c.size,
            c.run,
            c.mode,
            c.iterations,
            csv_field(&c.status)
        ));
    }
    io::write_atomic(path, rows.as_bytes())
}
