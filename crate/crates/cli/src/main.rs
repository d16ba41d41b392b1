//! hyptsne: t-SNE embeddings into the Poincaré disk, with a polar quadtree
//! acceleration of the repulsive forces and an exact baseline for
//! verification. Subcommands: `embed`, `benchmark`, `generate`.

mod benchmark;
mod embed;
mod generate;
mod io;
mod svg;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "hyptsne", version, about = "Hyperbolic t-SNE on the Poincaré disk")]
struct Cli {
    /// Worker threads; HYPTSNE_THREADS is the fallback, all cores the default.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Embed one dataset and write embedding.csv, report.json and optionally
    /// an SVG plot.
    Embed(embed::EmbedArgs),
    /// Run scaling, split-rule and theta sweeps; write CSV and JSON reports.
    Benchmark(benchmark::BenchmarkArgs),
    /// Write a synthetic labeled dataset.
    Generate(generate::GenerateArgs),
}

fn configure_threads(explicit: Option<usize>) -> Result<()> {
    let threads = match explicit {
        Some(t) => Some(t),
        None => match std::env::var("HYPTSNE_THREADS") {
            Ok(raw) => Some(
                raw.parse::<usize>()
                    .with_context(|| format!("HYPTSNE_THREADS must be an integer, got {raw:?}"))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(t) = threads {
        if t == 0 {
            anyhow::bail!("thread count must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("cannot configure the thread pool")?;
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::Embed(args) => embed::execute(args),
        Command::Benchmark(args) => benchmark::execute(args),
        Command::Generate(args) => generate::execute(args),
    }
}

fn main() {
    // Exit codes: 0 success, 1 usage error, 2 runtime failure.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    if let Err(e) = dispatch(&cli) {
        eprintln!("error: {e:#}");
        std::process::exit(2);
    }
}
