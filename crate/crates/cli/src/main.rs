//! `clump`: cluster micro-panel trajectories from the command line.

mod commands;
mod settings;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use chrono::{SecondsFormat, Utc};
use clap::{Args, Parser, Subcommand};
use clump_core::Scaling;
use serde::Serialize;

use crate::settings::{ScenarioSpec, Settings};

/// Environment variable holding the worker thread count.
const THREADS_VAR: &str = "CLUMP_THREADS";

#[derive(Parser)]
#[command(
    name = "clump",
    version,
    about = "Feature-based clustering of short panel trajectories"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// Seed for every random draw.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// JSON file of settings (or a previous run's manifest); flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for outputs and manifest.json.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Number of clusters to cut the dendrogram into.
    #[arg(long, global = true, value_parser = positive)]
    k: Option<usize>,
    /// Feature scaling before distances: none or zscore.
    #[arg(long, global = true)]
    scale: Option<Scaling>,
    /// Preset design: balanced-low, balanced-high, unbalanced-low, unbalanced-high.
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// Study replications, or timing repetitions for bench.
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Comma-separated panel sizes for bench.
    #[arg(long, global = true, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    /// Visits per simulated trajectory, at times 0, 1, ...
    #[arg(long, global = true)]
    t: Option<usize>,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(v),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute the seven trajectory features of a long CSV panel.
    Extract { input: Option<PathBuf> },
    /// Ward-cluster a long CSV panel and cut the tree into k groups.
    Cluster { input: Option<PathBuf> },
    /// Draw a synthetic panel with known clusters.
    Simulate,
    /// Score an assignment against true clusters.
    Evaluate {
        #[arg(long)]
        assignments: Option<PathBuf>,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        features: Option<PathBuf>,
    },
    /// Repeat simulate, cluster and evaluate, and summarise the indices.
    Study,
    /// Time feature extraction and clustering across panel sizes.
    Bench,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Extract { .. } => "extract",
            Command::Cluster { .. } => "cluster",
            Command::Simulate => "simulate",
            Command::Evaluate { .. } => "evaluate",
            Command::Study => "study",
            Command::Bench => "bench",
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    version: &'a str,
    seed: u64,
    config: &'a Settings,
    inputs: BTreeMap<String, PathBuf>,
    outputs: Vec<PathBuf>,
    started_at: String,
    finished_at: String,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .with_context(|| format!("{THREADS_VAR}={raw:?} is not a thread count"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring worker threads")
}

fn run(cli: Cli) -> Result<()> {
    let started_at = now();
    configure_threads()?;

    let g = cli.global;
    let mut flags = Settings {
        seed: g.seed,
        out_dir: g.out_dir,
        k: g.k,
        scale: g.scale,
        scenario: g.scenario.map(ScenarioSpec::Name),
        reps: g.reps,
        sizes: g.sizes,
        t: g.t,
        ..Settings::default()
    };
    match &cli.command {
        Command::Extract { input } | Command::Cluster { input } => flags.input = input.clone(),
        Command::Evaluate {
            assignments,
            truth,
            features,
        } => {
            flags.assignments = assignments.clone();
            flags.truth = truth.clone();
            flags.features = features.clone();
        }
        _ => {}
    }
    let file = match &g.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let settings = file.merged(flags).resolved(cli.command.name());

    let out_dir = settings.out_dir();
    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let outcome = match cli.command {
        Command::Extract { .. } => commands::extract(&settings),
        Command::Cluster { .. } => commands::cluster(&settings),
        Command::Simulate => commands::simulate(&settings),
        Command::Evaluate { .. } => commands::evaluate(&settings),
        Command::Study => commands::study(&settings),
        Command::Bench => commands::bench(&settings),
    }?;

    let manifest = Manifest {
        subcommand: cli.command.name(),
        version: env!("CARGO_PKG_VERSION"),
        seed: settings.seed(),
        config: &settings,
        inputs: outcome.inputs,
        outputs: outcome.outputs,
        started_at,
        finished_at: now(),
    };
    let path = out_dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest)? + "\n";
    std::fs::write(&path, json).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
