//! Tabular and JSON artifacts with fixed numeric formatting: two decimals
//! for scores and relative changes, four for latent coordinates and
//! diagnostics.

use std::io::Write;

use ndarray::Array2;
use serde_json::{json, Value};

use crate::dissociation::{DissociationReport, ScoreGapThreshold, StabilityReport};
use crate::error::Result;
use crate::level1::{ScoreRecord, ScoreSummary, SummaryRow};
use crate::level2::DynamicsRow;
use crate::preprocess::RowLabel;

pub const SCORE_DECIMALS: usize = 2;
pub const DIAGNOSTIC_DECIMALS: usize = 4;

/// Fixed-point text without a negative sign on zero.
pub fn fmt_fixed(x: f64, decimals: usize) -> String {
    let s = format!("{x:.decimals$}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// Rounds for JSON output; non-finite values become `null`.
pub fn round_json(x: f64, decimals: usize) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let p = 10f64.powi(decimals as i32);
    let r = (x * p).round() / p;
    json!(if r == 0.0 { 0.0 } else { r })
}

pub fn write_scores_csv<W: Write>(w: W, scores: &[ScoreRecord]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["obs_id", "session", "condition", "s_meca", "gpps"])?;
    for s in scores {
        out.write_record([
            s.obs_id.to_string(),
            s.session.to_string(),
            s.condition.to_string(),
            fmt_fixed(s.s_meca, SCORE_DECIMALS),
            fmt_fixed(s.gpps, SCORE_DECIMALS),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn summary_fields(s: Option<&ScoreSummary>) -> [String; 5] {
    match s {
        Some(s) => [s.mean, s.sd, s.median, s.q1, s.q3].map(|x| fmt_fixed(x, SCORE_DECIMALS)),
        None => Default::default(),
    }
}

pub fn write_summary_csv<W: Write>(w: W, rows: &[SummaryRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "condition",
        "m1_mean",
        "m1_sd",
        "m1_median",
        "m1_q1",
        "m1_q3",
        "m2_mean",
        "m2_sd",
        "m2_median",
        "m2_q1",
        "m2_q3",
        "delta_percent",
    ])?;
    for r in rows {
        let mut rec = vec![r.condition.to_string()];
        rec.extend(summary_fields(r.m1.as_ref()));
        rec.extend(summary_fields(r.m2.as_ref()));
        rec.push(
            r.delta
                .as_ref()
                .and_then(|d| d.delta_percent)
                .map(|d| fmt_fixed(d, SCORE_DECIMALS))
                .unwrap_or_default(),
        );
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_dynamics_csv<W: Write>(w: W, rows: &[DynamicsRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "condition",
        "session",
        "n_points",
        "mean_pairwise_dist",
        "rms_centroid_dist",
        "path_length",
    ])?;
    for r in rows {
        out.write_record([
            r.condition.to_string(),
            r.session.to_string(),
            r.stats.n_points.to_string(),
            fmt_fixed(r.stats.mean_pairwise_dist, DIAGNOSTIC_DECIMALS),
            fmt_fixed(r.stats.rms_centroid_dist, DIAGNOSTIC_DECIMALS),
            fmt_fixed(r.stats.path_length, DIAGNOSTIC_DECIMALS),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_embedding_csv<W: Write>(w: W, coords: &Array2<f64>, labels: &[RowLabel]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["obs_id".to_string(), "session".into(), "condition".into()];
    header.extend((1..=coords.ncols()).map(|t| format!("z{t}")));
    out.write_record(&header)?;
    for (row, l) in coords.rows().into_iter().zip(labels) {
        let mut rec = vec![l.obs_id.to_string(), l.session.to_string(), l.condition.to_string()];
        rec.extend(row.iter().map(|&x| fmt_fixed(x, DIAGNOSTIC_DECIMALS)));
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

pub fn dissociation_json(report: &DissociationReport) -> Value {
    let d = DIAGNOSTIC_DECIMALS;
    let rule = match report.thresholds.score_gap {
        ScoreGapThreshold::Absolute(t) => json!({ "absolute": round_json(t, d) }),
        ScoreGapThreshold::PooledSdFraction(f) => json!({ "pooled_sd_fraction": round_json(f, d) }),
    };
    Value::Array(
        report
            .pairs
            .iter()
            .map(|p| {
                json!({
                    "cond_i": p.cond_i.as_str(),
                    "cond_j": p.cond_j.as_str(),
                    "session": report.session.as_str(),
                    "gpps_gap": round_json(p.gpps_gap, SCORE_DECIMALS),
                    "iqr_overlap": p.iqr_overlap,
                    "score_similar": p.score_similar,
                    "centroid_dist": round_json(p.separation.centroid_dist, d),
                    "pooled_spread": round_json(p.separation.pooled_spread, d),
                    "standardized_sep": round_json(p.separation.standardized_sep, d),
                    "silhouette": round_json(p.separation.silhouette, d),
                    "latent_separated": p.latent_separated,
                    "flagged": p.flagged,
                    "thresholds": {
                        "score_gap": round_json(p.score_gap_threshold, d),
                        "score_gap_rule": rule,
                        "min_standardized_sep": round_json(report.thresholds.min_standardized_sep, d),
                        "min_silhouette": round_json(report.thresholds.min_silhouette, d),
                    },
                })
            })
            .collect(),
    )
}

pub fn stability_json(report: &StabilityReport) -> Value {
    let d = DIAGNOSTIC_DECIMALS;
    json!({
        "seeds": report.seeds,
        "n_clusters": report.n_clusters,
        "mean_ari": round_json(report.mean_ari, d),
        "mean_disparity": round_json(report.mean_disparity, d),
        "per_pair": report.per_pair.iter().map(|p| json!({
            "seed_a": p.seed_a,
            "seed_b": p.seed_b,
            "ari": round_json(p.ari, d),
            "disparity": round_json(p.disparity, d),
        })).collect::<Vec<_>>(),
        "grouping_consistency": report.grouping_consistency.iter().map(|g| json!({
            "condition": g.condition.as_str(),
            "mean_purity": round_json(g.mean_purity, d),
        })).collect::<Vec<_>>(),
    })
}

/// Pretty JSON with a trailing newline.
pub fn write_json<W: Write>(mut w: W, value: &Value) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    Ok(())
}
