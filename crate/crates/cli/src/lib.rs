//! Command-line driver for the `gaitlevels` binary.
//!
//! Every run resolves its flags and config file into a [`config::RunConfig`],
//! computes all artifacts in memory, and then writes them together with a
//! `run_manifest.json` that is sufficient to repeat the run exactly.

pub mod artifacts;
pub mod commands;
pub mod config;
pub mod svg;

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

use artifacts::{RunManifest, MANIFEST_NAME};
use config::{apply_config_file, RunConfig, Scenario, SessionSelect, Task, DEFAULT_SEED};

#[derive(Debug, Parser)]
#[command(
    name = "gaitlevels",
    version,
    about = "Three-level analysis of gait under occlusal conditions"
)]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "GAITLEVELS_OUT")]
    pub out: Option<PathBuf>,
    /// Flat `section.key = value` config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for embedding and data generation. Overrides the config file.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Gait CSV with the canonical 13 columns.
    #[arg(long)]
    pub input: PathBuf,
    /// Sessions to analyse: M1, M2 or both.
    #[arg(long, default_value = "both")]
    pub session: SessionSelect,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a CSV and keep its linear-phase rows.
    Ingest(InputArgs),
    /// Level 1 scores and the per-condition session table.
    Score {
        #[command(flatten)]
        input: InputArgs,
        /// Score the cleaned but unscaled features.
        #[arg(long)]
        raw_scores: bool,
    },
    /// Level 2 dispersion per condition and session.
    Dynamics(InputArgs),
    /// Level 3 latent coordinates and a scatter plot.
    Embed {
        #[command(flatten)]
        input: InputArgs,
        /// Record the wall-clock time in the SVG (breaks byte-identical reruns).
        #[arg(long)]
        svg_timestamp: bool,
    },
    /// Flag condition pairs that score alike but separate in latent space.
    Dissociate {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        raw_scores: bool,
    },
    /// Compare embeddings across seeds.
    Stability {
        #[command(flatten)]
        input: InputArgs,
        /// Comma-separated embedding seeds.
        #[arg(long, value_delimiter = ',', default_values_t = config::DEFAULT_STABILITY_SEEDS)]
        seeds: Vec<u64>,
    },
    /// Generate a seeded synthetic dataset.
    Synth {
        #[arg(long, value_enum)]
        scenario: Scenario,
        /// Rows per cell.
        #[arg(long)]
        n: Option<usize>,
    },
    /// Run every analysis and write a combined summary document.
    Report {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        raw_scores: bool,
        #[arg(long, value_delimiter = ',', default_values_t = config::DEFAULT_STABILITY_SEEDS)]
        seeds: Vec<u64>,
    },
    /// Repeat a run from its manifest.
    Replay {
        /// Path to a `run_manifest.json`.
        #[arg(long)]
        manifest: PathBuf,
    },
}

fn base_config(task: Task, input: Option<&InputArgs>) -> RunConfig {
    let mut cfg = RunConfig::new(task);
    if let Some(i) = input {
        cfg.input = Some(i.input.clone());
        cfg.session = i.session;
    }
    cfg
}

/// Turns parsed arguments into a fully resolved configuration.
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.command {
        Command::Ingest(i) => base_config(Task::Ingest, Some(i)),
        Command::Score { input, raw_scores } => RunConfig {
            raw_scores: *raw_scores,
            ..base_config(Task::Score, Some(input))
        },
        Command::Dynamics(i) => base_config(Task::Dynamics, Some(i)),
        Command::Embed { input, svg_timestamp } => RunConfig {
            svg_timestamp: *svg_timestamp,
            ..base_config(Task::Embed, Some(input))
        },
        Command::Dissociate { input, raw_scores } => RunConfig {
            raw_scores: *raw_scores,
            ..base_config(Task::Dissociate, Some(input))
        },
        Command::Stability { input, seeds } => RunConfig {
            seeds: seeds.clone(),
            ..base_config(Task::Stability, Some(input))
        },
        Command::Synth { scenario, n } => RunConfig {
            scenario: Some(*scenario),
            n_per_cell: *n,
            ..base_config(Task::Synth, None)
        },
        Command::Report {
            input,
            raw_scores,
            seeds,
        } => RunConfig {
            raw_scores: *raw_scores,
            seeds: seeds.clone(),
            ..base_config(Task::Report, Some(input))
        },
        Command::Replay { manifest } => {
            if cli.config.is_some() || cli.seed.is_some() {
                bail!("replay takes its settings from the manifest; drop --config and --seed");
            }
            return Ok(RunManifest::read(manifest)?.config);
        }
    };
    let file_seed = match &cli.config {
        Some(path) => apply_config_file(&mut cfg, path)?,
        None => None,
    };
    cfg.seed = cli.seed.or(file_seed).unwrap_or(DEFAULT_SEED);
    if matches!(cfg.task, Task::Stability | Task::Report) && cfg.seeds.len() < 2 {
        bail!("--seeds needs at least two values, e.g. --seeds 1,2,3");
    }
    Ok(cfg)
}

/// Executes one invocation and returns the paths written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    let Some(out_dir) = cli.out.clone() else {
        bail!("no output directory; pass --out <dir> or set GAITLEVELS_OUT");
    };
    let cfg = resolve(cli)?;
    let mut artifacts = commands::execute(&cfg)?;
    let manifest = RunManifest::new(&cfg, artifacts.names());
    artifacts.add_json(MANIFEST_NAME, &serde_json::to_value(&manifest)?)?;
    artifacts.commit(&out_dir)
}
