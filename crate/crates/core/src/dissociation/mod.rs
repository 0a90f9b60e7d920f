//! Detection of condition pairs whose aggregate scores agree while their
//! latent representations occupy separate regions, plus cross-seed
//! stability diagnostics for the embedding.
//!
//! A pair is flagged exactly when both predicates hold:
//!
//! * score similarity: `|mean_i − mean_j| ≤ τ_score` and the `[q1, q3]`
//!   intervals overlap;
//! * latent separation: standardized centroid separation `≥ τ_sep` and the
//!   two-group silhouette `≥ τ_sil`.
//!
//! The report is descriptive. It makes no statement about causes or about
//! which condition is preferable.

pub mod cluster;
pub mod procrustes;
pub mod stability;
pub mod trust;

use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{ConditionLabel, SessionLabel};
use crate::level1::{ScoreSummary, Summaries};
use crate::preprocess::RowLabel;
use crate::stats::squared_euclidean;

pub use cluster::{adjusted_rand_index, kmeans, silhouette_score, KMeansResult};
pub use procrustes::procrustes_disparity;
pub use stability::{stability_assess, stability_from_embeddings, StabilityReport, KMEANS_RESTARTS, KMEANS_SEED};
pub use trust::trustworthiness;

/// Score-gap threshold: a fixed value or a multiple of the pair's pooled SD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreGapThreshold {
    Absolute(f64),
    PooledSdFraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub score_gap: ScoreGapThreshold,
    pub min_standardized_sep: f64,
    pub min_silhouette: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            score_gap: ScoreGapThreshold::PooledSdFraction(0.5),
            min_standardized_sep: 2.0,
            min_silhouette: 0.25,
        }
    }
}

/// Geometry of two labelled groups in the latent space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationStats {
    pub centroid_dist: f64,
    /// Pooled RMS distance of the points to their own group centroid.
    pub pooled_spread: f64,
    pub standardized_sep: f64,
    /// Mean silhouette over both groups, using only these two groups.
    pub silhouette: f64,
}

/// Separation of two point groups (rows are points). Both groups must be
/// nonempty.
pub fn separation_stats(first: ArrayView2<'_, f64>, second: ArrayView2<'_, f64>) -> SeparationStats {
    let ca = first.mean_axis(Axis(0)).expect("nonempty group").to_vec();
    let cb = second.mean_axis(Axis(0)).expect("nonempty group").to_vec();
    let centroid_dist = squared_euclidean(&ca, &cb).sqrt();
    let ss = |g: ArrayView2<'_, f64>, c: &[f64]| -> f64 {
        g.rows().into_iter().map(|r| squared_euclidean(&r.to_vec(), c)).sum()
    };
    let n = (first.nrows() + second.nrows()) as f64;
    let pooled_spread = ((ss(first, &ca) + ss(second, &cb)) / n).sqrt();
    let standardized_sep = if pooled_spread > 0.0 {
        centroid_dist / pooled_spread
    } else if centroid_dist > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };

    let joined = ndarray::concatenate(Axis(0), &[first, second]).expect("equal widths");
    let labels: Vec<usize> = (0..first.nrows())
        .map(|_| 0)
        .chain((0..second.nrows()).map(|_| 1))
        .collect();
    let silhouette = silhouette_score(joined.view(), &labels);
    SeparationStats {
        centroid_dist,
        pooled_spread,
        standardized_sep,
        silhouette,
    }
}

/// Evidence for one condition pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEvidence {
    pub cond_i: ConditionLabel,
    pub cond_j: ConditionLabel,
    pub gpps_gap: f64,
    /// Score-gap threshold in effect for this pair.
    pub score_gap_threshold: f64,
    pub iqr_overlap: bool,
    pub score_similar: bool,
    pub separation: SeparationStats,
    pub latent_separated: bool,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissociationReport {
    pub session: SessionLabel,
    pub thresholds: Thresholds,
    /// All pairs, flagged or not, in table order.
    pub pairs: Vec<PairEvidence>,
}

impl DissociationReport {
    pub fn flagged(&self) -> impl Iterator<Item = &PairEvidence> {
        self.pairs.iter().filter(|p| p.flagged)
    }

    pub fn pair(&self, a: ConditionLabel, b: ConditionLabel) -> Option<&PairEvidence> {
        self.pairs
            .iter()
            .find(|p| (p.cond_i == a && p.cond_j == b) || (p.cond_i == b && p.cond_j == a))
    }
}

pub fn pooled_sd(a: &ScoreSummary, b: &ScoreSummary) -> f64 {
    let dof = a.n + b.n;
    if dof <= 2 {
        return 0.0;
    }
    let var = ((a.n - 1) as f64 * a.sd * a.sd + (b.n - 1) as f64 * b.sd * b.sd) / (dof - 2) as f64;
    var.sqrt()
}

/// `(gap, threshold, iqr_overlap, similar)` for a pair of cell summaries.
pub fn score_similarity(a: &ScoreSummary, b: &ScoreSummary, threshold: ScoreGapThreshold) -> (f64, f64, bool, bool) {
    let gap = (a.mean - b.mean).abs();
    let tau = match threshold {
        ScoreGapThreshold::Absolute(t) => t,
        ScoreGapThreshold::PooledSdFraction(f) => f * pooled_sd(a, b),
    };
    let overlap = a.q1 <= b.q3 && b.q1 <= a.q3;
    (gap, tau, overlap, gap <= tau && overlap)
}

pub fn latent_separated(s: &SeparationStats, t: &Thresholds) -> bool {
    s.standardized_sep >= t.min_standardized_sep && s.silhouette >= t.min_silhouette
}

/// The flag is the conjunction of the two predicates, nothing else.
pub fn flag(score_similar: bool, latent_separated: bool) -> bool {
    score_similar && latent_separated
}

/// Evaluates one pair. Symmetric in `(a, b)` apart from label order.
pub fn evaluate_pair(
    a: &ScoreSummary,
    b: &ScoreSummary,
    za: ArrayView2<'_, f64>,
    zb: ArrayView2<'_, f64>,
    thresholds: &Thresholds,
) -> PairEvidence {
    let (gpps_gap, score_gap_threshold, iqr_overlap, score_similar) = score_similarity(a, b, thresholds.score_gap);
    let separation = separation_stats(za, zb);
    let latent = latent_separated(&separation, thresholds);
    PairEvidence {
        cond_i: a.condition,
        cond_j: b.condition,
        gpps_gap,
        score_gap_threshold,
        iqr_overlap,
        score_similar,
        separation,
        latent_separated: latent,
        flagged: flag(score_similar, latent),
    }
}

/// Checks every pair of conditions present in the embedding.
///
/// `labels` are row-aligned with `coords`; all rows must belong to one
/// session, and that session's summary must exist for every condition.
pub fn detect_dissociation(
    summaries: &Summaries,
    coords: &Array2<f64>,
    labels: &[RowLabel],
    thresholds: &Thresholds,
) -> Result<DissociationReport> {
    if labels.len() != coords.nrows() {
        return Err(Error::ShapeMismatch(format!(
            "{} labels for {} embedded rows",
            labels.len(),
            coords.nrows()
        )));
    }
    let session = labels
        .first()
        .map(|l| l.session)
        .ok_or_else(|| Error::ShapeMismatch("empty embedding".into()))?;
    if let Some(other) = labels.iter().find(|l| l.session != session) {
        return Err(Error::SessionMismatch(format!(
            "embedding mixes sessions {session} and {}",
            other.session
        )));
    }

    let present: Vec<ConditionLabel> = ConditionLabel::ALL
        .into_iter()
        .filter(|c| labels.iter().any(|l| l.condition == *c))
        .collect();
    let mut cells = Vec::with_capacity(present.len());
    for &c in &present {
        let summary = summaries.get(c, session).ok_or_else(|| {
            if summaries.cells.iter().any(|s| s.condition == c) {
                Error::SessionMismatch(format!("no {session} summary for {c}"))
            } else {
                Error::MissingCondition(c.to_string())
            }
        })?;
        let rows: Vec<usize> = (0..labels.len()).filter(|&i| labels[i].condition == c).collect();
        cells.push((summary, coords.select(Axis(0), &rows)));
    }

    let mut pairs = Vec::new();
    for i in 0..cells.len() {
        for j in (i + 1)..cells.len() {
            let (sa, za) = &cells[i];
            let (sb, zb) = &cells[j];
            pairs.push(evaluate_pair(sa, sb, za.view(), zb.view(), thresholds));
        }
    }
    Ok(DissociationReport {
        session,
        thresholds: *thresholds,
        pairs,
    })
}
