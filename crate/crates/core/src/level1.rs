//! Level 1: the composite mechanical and global postural performance scores,
//! per-cell summaries and the between-session relative change.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ConditionLabel, SessionLabel, StateVector, FEATURE_COUNT};
use crate::preprocess::{FeatureMatrix, Preprocessed};
use crate::stats;

/// Linear weights of the global score over `(v, c, D, A, A_P, A_L, L, CoP, CAPA)`.
///
/// The first seven entries form the mechanical sub-score; CoP is weighted
/// 0.15 and CAPA enters unweighted.
pub const GPPS_WEIGHTS: [f64; FEATURE_COUNT] = [0.15, 0.15, -0.10, -0.10, -0.10, -0.05, 0.10, 0.15, 1.0];

/// Mechanical sub-score over the seven spatiotemporal features.
pub fn s_meca(x: &StateVector) -> f64 {
    0.15 * x.v() + 0.15 * x.c()
        - 0.10 * x.step_time()
        - 0.10 * x.asymmetry()
        - 0.10 * x.support_asymmetry()
        - 0.05 * x.length_asymmetry()
        + 0.10 * x.step_length()
}

/// Global postural performance score.
pub fn gpps(x: &StateVector) -> f64 {
    gpps_from_parts(s_meca(x), x.cop(), x.capa())
}

pub fn gpps_from_parts(s_meca: f64, cop: f64, capa: f64) -> f64 {
    s_meca + 0.15 * cop + capa
}

/// User-supplied weight vector, kept apart from the canonical score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CustomWeights(pub [f64; FEATURE_COUNT]);

impl CustomWeights {
    /// Weighted sum of all nine features.
    pub fn score(&self, x: &StateVector) -> f64 {
        self.0.iter().zip(x.0).map(|(w, v)| w * v).sum()
    }
}

/// Which feature values the scores are computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreMode {
    /// Outlier-replaced and min–max normalized features.
    #[default]
    Normalized,
    /// Outlier-replaced features in their original units.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub obs_id: u64,
    pub session: SessionLabel,
    pub condition: ConditionLabel,
    pub s_meca: f64,
    pub gpps: f64,
}

/// Scores every row of a feature matrix.
pub fn score_matrix(m: &FeatureMatrix) -> Vec<ScoreRecord> {
    (0..m.nrows())
        .map(|i| {
            let x = StateVector(m.row_array(i));
            let label = m.labels[i];
            ScoreRecord {
                obs_id: label.obs_id,
                session: label.session,
                condition: label.condition,
                s_meca: s_meca(&x),
                gpps: gpps(&x),
            }
        })
        .collect()
}

pub fn compute_scores(pre: &Preprocessed, mode: ScoreMode) -> Vec<ScoreRecord> {
    match mode {
        ScoreMode::Normalized => score_matrix(&pre.normalized),
        ScoreMode::Raw => score_matrix(&pre.cleaned),
    }
}

/// GPPS distribution of one (condition, session) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreSummary {
    pub condition: ConditionLabel,
    pub session: SessionLabel,
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
}

impl ScoreSummary {
    pub fn from_values(condition: ConditionLabel, session: SessionLabel, values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let (q1, median, q3) = stats::quartiles(values);
        Some(ScoreSummary {
            condition,
            session,
            n: values.len(),
            mean: stats::mean(values),
            sd: stats::sample_sd(values),
            median,
            q1,
            q3,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Summaries {
    pub cells: Vec<ScoreSummary>,
    /// Requested cells with no records. Reported, not fatal.
    pub empty_cells: Vec<(ConditionLabel, SessionLabel)>,
}

impl Summaries {
    pub fn get(&self, condition: ConditionLabel, session: SessionLabel) -> Option<&ScoreSummary> {
        self.cells
            .iter()
            .find(|s| s.condition == condition && s.session == session)
    }
}

/// Summarizes GPPS per cell, in table order (condition, then session).
///
/// Every cell in `requested` that has no records lands in `empty_cells`.
pub fn summarize_scores(scores: &[ScoreRecord], requested: &[(ConditionLabel, SessionLabel)]) -> Summaries {
    let mut groups: BTreeMap<(ConditionLabel, SessionLabel), Vec<f64>> = BTreeMap::new();
    for s in scores {
        groups.entry((s.condition, s.session)).or_default().push(s.gpps);
    }
    let cells = groups
        .iter()
        .filter_map(|(&(c, s), v)| ScoreSummary::from_values(c, s, v))
        .collect();
    let empty_cells = requested
        .iter()
        .copied()
        .filter(|key| !groups.contains_key(key))
        .collect();
    Summaries { cells, empty_cells }
}

/// Relative change in percent from the M1 mean to the M2 mean.
pub fn delta_percent(m1_mean: f64, m2_mean: f64) -> Result<f64> {
    if m1_mean == 0.0 {
        return Err(Error::DivisionByZero);
    }
    Ok((m2_mean - m1_mean) / m1_mean * 100.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaRecord {
    pub condition: ConditionLabel,
    pub gpps_m1_mean: f64,
    pub gpps_m2_mean: f64,
    /// `None` when the M1 mean is zero.
    pub delta_percent: Option<f64>,
}

/// One line of the session comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub condition: ConditionLabel,
    pub m1: Option<ScoreSummary>,
    pub m2: Option<ScoreSummary>,
    pub delta: Option<DeltaRecord>,
}

/// Builds the per-condition M1/M2 table. Conditions absent from both
/// sessions are skipped.
pub fn summary_table(summaries: &Summaries) -> Vec<SummaryRow> {
    ConditionLabel::ALL
        .into_iter()
        .filter_map(|condition| {
            let m1 = summaries.get(condition, SessionLabel::M1).cloned();
            let m2 = summaries.get(condition, SessionLabel::M2).cloned();
            if m1.is_none() && m2.is_none() {
                return None;
            }
            let delta = match (&m1, &m2) {
                (Some(a), Some(b)) => Some(DeltaRecord {
                    condition,
                    gpps_m1_mean: a.mean,
                    gpps_m2_mean: b.mean,
                    delta_percent: delta_percent(a.mean, b.mean).ok(),
                }),
                _ => None,
            };
            Some(SummaryRow {
                condition,
                m1,
                m2,
                delta,
            })
        })
        .collect()
}
