//! Resolved run configuration and the flat `section.key = value` file format.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use gaitlevels_core::dissociation::ScoreGapThreshold;
use gaitlevels_core::preprocess::NormalizeScope;
use gaitlevels_core::{EmbedParams, PreprocessConfig, SessionLabel, Thresholds};
use serde::{Deserialize, Serialize};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_STABILITY_SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

/// Which recording sessions a subcommand operates on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SessionSelect {
    M1,
    M2,
    #[default]
    #[serde(rename = "both")]
    Both,
}

impl SessionSelect {
    pub fn includes(self, s: SessionLabel) -> bool {
        match self {
            SessionSelect::M1 => s == SessionLabel::M1,
            SessionSelect::M2 => s == SessionLabel::M2,
            SessionSelect::Both => true,
        }
    }
}

impl FromStr for SessionSelect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "M1" => Ok(SessionSelect::M1),
            "M2" => Ok(SessionSelect::M2),
            "both" => Ok(SessionSelect::Both),
            other => Err(format!("unknown session `{other}` (expected M1, M2 or both)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Twelve cells calibrated to the reference session means and SDs.
    Table1,
    /// Two score-matched but separated conditions plus a control.
    Dissociation,
    /// Two conditions drawn from one distribution.
    Iid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Ingest,
    Score,
    Dynamics,
    Embed,
    Dissociate,
    Stability,
    Synth,
    Report,
}

/// Everything a run depends on. Serialized verbatim into the run manifest,
/// so a manifest alone is enough to repeat the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub task: Task,
    pub input: Option<PathBuf>,
    pub session: SessionSelect,
    pub raw_scores: bool,
    pub seed: u64,
    pub seeds: Vec<u64>,
    pub scenario: Option<Scenario>,
    pub n_per_cell: Option<usize>,
    pub svg_timestamp: bool,
    pub preprocess: PreprocessConfig,
    pub embed: EmbedParams,
    pub thresholds: Thresholds,
}

impl RunConfig {
    pub fn new(task: Task) -> Self {
        RunConfig {
            task,
            input: None,
            session: SessionSelect::Both,
            raw_scores: false,
            seed: DEFAULT_SEED,
            seeds: DEFAULT_STABILITY_SEEDS.to_vec(),
            scenario: None,
            n_per_cell: None,
            svg_timestamp: false,
            preprocess: PreprocessConfig::default(),
            embed: EmbedParams::default(),
            thresholds: Thresholds::default(),
        }
    }
}

/// Keys accepted in a config file.
pub const CONFIG_KEYS: [&str; 16] = [
    "seed",
    "iqr.factor",
    "normalize.scope",
    "umap.n_neighbors",
    "umap.min_dist",
    "umap.spread",
    "umap.n_components",
    "umap.epochs",
    "umap.negative_samples",
    "umap.learning_rate",
    "umap.init",
    "umap.optimizer",
    "dissociation.score_gap",
    "dissociation.score_gap_sd_fraction",
    "dissociation.min_standardized_sep",
    "dissociation.min_silhouette",
];

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow::anyhow!("line {line}: invalid value `{value}` for `{key}`: {e}"))
}

/// Applies `key = value` lines to `cfg`. Blank lines and `#` comments are
/// ignored; unknown keys are errors.
pub fn apply_config_text(cfg: &mut RunConfig, text: &str) -> Result<Option<u64>> {
    let mut seed = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            bail!("line {line}: expected `section.key = value`, found `{content}`");
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "seed" => seed = Some(parse_value(key, value, line)?),
            "iqr.factor" => cfg.preprocess.iqr_factor = parse_value(key, value, line)?,
            "normalize.scope" => {
                if value != "global" {
                    bail!("line {line}: `normalize.scope` supports only `global`, found `{value}`");
                }
                cfg.preprocess.scope = NormalizeScope::Global;
            }
            "umap.n_neighbors" => cfg.embed.n_neighbors = parse_value(key, value, line)?,
            "umap.min_dist" => cfg.embed.min_dist = parse_value(key, value, line)?,
            "umap.spread" => cfg.embed.spread = parse_value(key, value, line)?,
            "umap.n_components" => cfg.embed.n_components = parse_value(key, value, line)?,
            "umap.epochs" => cfg.embed.epochs = parse_value(key, value, line)?,
            "umap.negative_samples" => cfg.embed.negative_samples = parse_value(key, value, line)?,
            "umap.learning_rate" => cfg.embed.learning_rate = parse_value(key, value, line)?,
            "umap.init" => cfg.embed.init = parse_value(key, value, line)?,
            "umap.optimizer" => {
                cfg.embed.optimizer = match value {
                    "sequential" => gaitlevels_core::OptimizerMode::Sequential,
                    "parallel" => gaitlevels_core::OptimizerMode::Parallel,
                    _ => bail!("line {line}: `umap.optimizer` must be sequential or parallel, found `{value}`"),
                }
            }
            "dissociation.score_gap" => {
                cfg.thresholds.score_gap = ScoreGapThreshold::Absolute(parse_value(key, value, line)?)
            }
            "dissociation.score_gap_sd_fraction" => {
                cfg.thresholds.score_gap = ScoreGapThreshold::PooledSdFraction(parse_value(key, value, line)?)
            }
            "dissociation.min_standardized_sep" => cfg.thresholds.min_standardized_sep = parse_value(key, value, line)?,
            "dissociation.min_silhouette" => cfg.thresholds.min_silhouette = parse_value(key, value, line)?,
            other => bail!(
                "line {line}: unknown key `{other}`; known keys are {}",
                CONFIG_KEYS.join(", ")
            ),
        }
    }
    Ok(seed)
}

/// Reads a config file into `cfg` and returns its `seed`, if any.
pub fn apply_config_file(cfg: &mut RunConfig, path: &Path) -> Result<Option<u64>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read config file `{}`", path.display()))?;
    apply_config_text(cfg, &text).with_context(|| format!("in config file `{}`", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_known_keys_and_comments() {
        let mut cfg = RunConfig::new(Task::Embed);
        let seed = apply_config_text(
            &mut cfg,
            "# comment\n\nseed = 9\niqr.factor = 3\numap.n_neighbors=10 # inline\numap.init = random\n\
             dissociation.score_gap = 0.2\n",
        )
        .unwrap();
        assert_eq!(seed, Some(9));
        assert_eq!(cfg.preprocess.iqr_factor, 3.0);
        assert_eq!(cfg.embed.n_neighbors, 10);
        assert_eq!(cfg.embed.init, gaitlevels_core::InitMode::Random);
        assert_eq!(cfg.thresholds.score_gap, ScoreGapThreshold::Absolute(0.2));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        let mut cfg = RunConfig::new(Task::Embed);
        let err = apply_config_text(&mut cfg, "umap.neighbours = 3")
            .unwrap_err()
            .to_string();
        assert!(err.contains("unknown key `umap.neighbours`"), "{err}");
        let err = apply_config_text(&mut cfg, "umap.epochs = many")
            .unwrap_err()
            .to_string();
        assert!(err.contains("line 1"), "{err}");
        assert!(apply_config_text(&mut cfg, "just text").is_err());
        assert!(apply_config_text(&mut cfg, "normalize.scope = per_condition").is_err());
    }

    #[test]
    fn session_selection() {
        assert_eq!("both".parse::<SessionSelect>().unwrap(), SessionSelect::Both);
        assert!("m1".parse::<SessionSelect>().is_err());
        assert!(SessionSelect::M2.includes(SessionLabel::M2));
        assert!(!SessionSelect::M2.includes(SessionLabel::M1));
    }
}
