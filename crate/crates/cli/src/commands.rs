//! Subcommand bodies. Each one turns a [`RunConfig`] into staged artifacts
//! and never touches the output directory itself.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use gaitlevels_core::dissociation::{detect_dissociation, stability_assess, DissociationReport, StabilityReport};
use gaitlevels_core::level1::{compute_scores, summarize_scores, summary_table, ScoreRecord, Summaries, SummaryRow};
use gaitlevels_core::level2::{dynamics_table, DynamicsRow};
use gaitlevels_core::report::{
    dissociation_json, fmt_fixed, round_json, stability_json, write_dynamics_csv, write_embedding_csv,
    write_scores_csv, write_summary_csv, DIAGNOSTIC_DECIMALS, SCORE_DECIMALS,
};
use gaitlevels_core::synth::{dissociation_scenario, generate_calibrated, iid_pair_scenario, table1_spec, SCENARIO_N};
use gaitlevels_core::{
    embed, filter_linear_phases, parse_dataset, preprocess_pipeline, ConditionLabel, EmbeddingResult, GaitDataset,
    Preprocessed, ScoreMode, SessionLabel,
};
use serde_json::json;

use crate::artifacts::Artifacts;
use crate::config::{RunConfig, Scenario, Task};
use crate::svg::scatter_svg;

/// Default rows per cell for generated datasets.
pub const DEFAULT_SYNTH_N: usize = 100;

fn load_input(cfg: &RunConfig) -> Result<GaitDataset> {
    let Some(path) = &cfg.input else {
        bail!("this subcommand needs an input file; pass --input <csv>");
    };
    let file = std::fs::File::open(path).with_context(|| format!("cannot open input file `{}`", path.display()))?;
    let ds = parse_dataset(std::io::BufReader::new(file), &path.display().to_string())
        .with_context(|| format!("cannot parse `{}`", path.display()))?;
    let ds = filter_linear_phases(ds).with_context(|| format!("`{}` has no linear-phase rows", path.display()))?;
    let observations: Vec<_> = ds
        .observations
        .into_iter()
        .filter(|o| cfg.session.includes(o.session))
        .collect();
    if observations.is_empty() {
        bail!(
            "`{}` has no rows for session selection {:?}",
            path.display(),
            cfg.session
        );
    }
    Ok(GaitDataset {
        observations,
        provenance: ds.provenance,
    })
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> gaitlevels_core::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

struct Level1 {
    pre: Preprocessed,
    scores: Vec<ScoreRecord>,
    summaries: Summaries,
    table: Vec<SummaryRow>,
}

fn level1(ds: &GaitDataset, cfg: &RunConfig) -> Result<Level1> {
    let pre = preprocess_pipeline(ds, &cfg.preprocess).context("preprocessing failed")?;
    let mode = if cfg.raw_scores {
        ScoreMode::Raw
    } else {
        ScoreMode::Normalized
    };
    let scores = compute_scores(&pre, mode);
    let present: Vec<ConditionLabel> = ConditionLabel::ALL
        .into_iter()
        .filter(|c| ds.observations.iter().any(|o| o.condition == *c))
        .collect();
    let requested: Vec<(ConditionLabel, SessionLabel)> = present
        .iter()
        .flat_map(|&c| {
            SessionLabel::ALL
                .into_iter()
                .filter(|&s| cfg.session.includes(s))
                .map(move |s| (c, s))
        })
        .collect();
    let summaries = summarize_scores(&scores, &requested);
    for (c, s) in &summaries.empty_cells {
        eprintln!("note: no rows for {c} in session {s}");
    }
    let table = summary_table(&summaries);
    Ok(Level1 {
        pre,
        scores,
        summaries,
        table,
    })
}

fn preprocess_json(pre: &Preprocessed, cfg: &RunConfig) -> serde_json::Value {
    let d = DIAGNOSTIC_DECIMALS;
    json!({
        "iqr_factor": round_json(pre.audit.iqr_factor, d),
        "scope": "global",
        "score_mode": if cfg.raw_scores { "raw" } else { "normalized" },
        "rows": pre.cleaned.nrows(),
        "replaced": pre.audit.columns.iter().map(|c| json!({ "column": c.column, "count": c.replaced })).collect::<Vec<_>>(),
        "total_replaced": pre.audit.total_replaced(),
        "scaler_min": pre.scaler.min.iter().map(|&x| round_json(x, d)).collect::<Vec<_>>(),
        "scaler_max": pre.scaler.max.iter().map(|&x| round_json(x, d)).collect::<Vec<_>>(),
    })
}

fn stage_level1(out: &mut Artifacts, l1: &Level1, cfg: &RunConfig) -> Result<()> {
    out.add("scores.csv", csv_bytes(|b| write_scores_csv(b, &l1.scores))?);
    out.add("summary.csv", csv_bytes(|b| write_summary_csv(b, &l1.table))?);
    out.add_json("preprocess.json", &preprocess_json(&l1.pre, cfg))
}

fn run_dynamics(l1: &Level1) -> Vec<DynamicsRow> {
    let (rows, skipped) = dynamics_table(&l1.pre.normalized);
    for (c, s) in skipped {
        eprintln!("note: {c} {s} has fewer than two rows; no dispersion computed");
    }
    rows
}

fn run_embedding(l1: &Level1, cfg: &RunConfig) -> Result<EmbeddingResult> {
    embed(l1.pre.normalized.values.view(), &cfg.embed, cfg.seed).context("embedding failed")
}

fn embedding_json(r: &EmbeddingResult) -> serde_json::Value {
    let d = DIAGNOSTIC_DECIMALS;
    json!({
        "seed": r.seed,
        "a": round_json(r.a, d),
        "b": round_json(r.b, d),
        "init_used": r.init_used,
        "n_points": r.coords.nrows(),
        "n_components": r.coords.ncols(),
        "params": r.params,
    })
}

fn stage_embedding(out: &mut Artifacts, l1: &Level1, r: &EmbeddingResult, cfg: &RunConfig) -> Result<()> {
    let labels = &l1.pre.normalized.labels;
    out.add(
        "embedding.csv",
        csv_bytes(|b| write_embedding_csv(b, &r.coords, labels))?,
    );
    out.add_json("embedding.json", &embedding_json(r))?;
    if r.coords.ncols() >= 2 {
        let ts = cfg.svg_timestamp.then(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        out.add("embedding.svg", scatter_svg(&r.coords, labels, ts).into_bytes());
    }
    Ok(())
}

/// One embedding and one report per selected session present in the data.
fn run_dissociation(l1: &Level1, cfg: &RunConfig) -> Result<Vec<DissociationReport>> {
    let mut reports = Vec::new();
    for session in SessionLabel::ALL {
        let m = l1.pre.normalized.select(|l| l.session == session);
        if m.nrows() == 0 {
            continue;
        }
        let z = embed(m.values.view(), &cfg.embed, cfg.seed)
            .with_context(|| format!("embedding session {session} failed"))?
            .coords;
        reports.push(
            detect_dissociation(&l1.summaries, &z, &m.labels, &cfg.thresholds)
                .with_context(|| format!("dissociation analysis for session {session} failed"))?,
        );
    }
    Ok(reports)
}

fn dissociation_value(reports: &[DissociationReport]) -> serde_json::Value {
    serde_json::Value::Array(
        reports
            .iter()
            .flat_map(|r| match dissociation_json(r) {
                serde_json::Value::Array(v) => v,
                other => vec![other],
            })
            .collect(),
    )
}

fn run_stability(l1: &Level1, cfg: &RunConfig) -> Result<StabilityReport> {
    stability_assess(&l1.pre.normalized, &cfg.embed, &cfg.seeds).context("stability analysis failed")
}

fn synthesize(cfg: &RunConfig) -> Result<GaitDataset> {
    let Some(scenario) = cfg.scenario else {
        bail!("synth needs --scenario (table1, dissociation or iid)");
    };
    Ok(match scenario {
        Scenario::Table1 => generate_calibrated(&table1_spec(cfg.n_per_cell.unwrap_or(DEFAULT_SYNTH_N), cfg.seed))?,
        Scenario::Dissociation => {
            if cfg.n_per_cell.is_some_and(|n| n != SCENARIO_N) {
                bail!("the dissociation scenario has a fixed size of {SCENARIO_N} rows per condition; drop --n");
            }
            dissociation_scenario(cfg.seed)
        }
        Scenario::Iid => iid_pair_scenario(cfg.seed, cfg.n_per_cell.unwrap_or(DEFAULT_SYNTH_N)),
    })
}

fn summary_markdown(table: &[SummaryRow]) -> String {
    let f = |x: Option<f64>| x.map(|v| fmt_fixed(v, SCORE_DECIMALS)).unwrap_or_else(|| "n/a".into());
    let mut s = String::from("| Condition | M1 mean | M1 SD | M2 mean | M2 SD | Δ% |\n|---|---|---|---|---|---|\n");
    for r in table {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} |",
            r.condition,
            f(r.m1.as_ref().map(|x| x.mean)),
            f(r.m1.as_ref().map(|x| x.sd)),
            f(r.m2.as_ref().map(|x| x.mean)),
            f(r.m2.as_ref().map(|x| x.sd)),
            f(r.delta.as_ref().and_then(|d| d.delta_percent)),
        );
    }
    s
}

fn report_markdown(
    ds: &GaitDataset,
    l1: &Level1,
    cfg: &RunConfig,
    dynamics: &[DynamicsRow],
    emb: &EmbeddingResult,
    diss: &[DissociationReport],
    stab: &StabilityReport,
) -> String {
    let d4 = |x: f64| fmt_fixed(x, DIAGNOSTIC_DECIMALS);
    let mut s = String::from("# Gait analysis report\n\n");
    let _ = writeln!(s, "Input: `{}` ({} linear-phase rows).", ds.provenance, ds.len());
    let _ = writeln!(s, "Seed: {}. Stability seeds: {:?}.\n", cfg.seed, cfg.seeds);

    s.push_str("## Preprocessing\n\n");
    let _ = writeln!(
        s,
        "Outliers outside Q1 − {k}·IQR and Q3 + {k}·IQR were replaced by the column median: {} values in total.",
        l1.pre.audit.total_replaced(),
        k = fmt_fixed(l1.pre.audit.iqr_factor, 2),
    );
    for c in l1.pre.audit.columns.iter().filter(|c| c.replaced > 0) {
        let _ = writeln!(s, "- {}: {}", c.column, c.replaced);
    }
    s.push('\n');

    let mode = if cfg.raw_scores {
        "raw features"
    } else {
        "normalized features"
    };
    let _ = writeln!(s, "## Level 1: composite score\n\nScores computed on {mode}.\n");
    s.push_str(&summary_markdown(&l1.table));
    s.push('\n');

    s.push_str("## Level 2: trajectory dispersion\n\n");
    s.push_str("| Condition | Session | N | Mean pairwise dist | RMS centroid dist | Path length |\n|---|---|---|---|---|---|\n");
    for r in dynamics {
        let _ = writeln!(
            s,
            "| {} | {} | {} | {} | {} | {} |",
            r.condition,
            r.session,
            r.stats.n_points,
            d4(r.stats.mean_pairwise_dist),
            d4(r.stats.rms_centroid_dist),
            d4(r.stats.path_length)
        );
    }
    s.push('\n');

    s.push_str("## Level 3: latent embedding\n\n");
    let _ = writeln!(
        s,
        "{} points embedded into {} dimensions (k = {}, min_dist = {}, a = {}, b = {}, init = {:?}). \
         Latent coordinates are in arbitrary units. See `embedding.svg`.\n",
        emb.coords.nrows(),
        emb.coords.ncols(),
        emb.params.n_neighbors,
        fmt_fixed(emb.params.min_dist, 2),
        d4(emb.a),
        d4(emb.b),
        emb.init_used,
    );

    s.push_str("## Score-similar, latent-separated pairs\n\n");
    s.push_str("Each flag is descriptive. It states that two conditions score alike while occupying separate latent regions.\n\n");
    s.push_str("| Session | Pair | GPPS gap | Std. separation | Silhouette | Flagged |\n|---|---|---|---|---|---|\n");
    for r in diss {
        for p in &r.pairs {
            let _ = writeln!(
                s,
                "| {} | {} / {} | {} | {} | {} | {} |",
                r.session,
                p.cond_i,
                p.cond_j,
                fmt_fixed(p.gpps_gap, SCORE_DECIMALS),
                d4(p.separation.standardized_sep),
                d4(p.separation.silhouette),
                if p.flagged { "yes" } else { "no" }
            );
        }
    }
    let flagged: usize = diss.iter().map(|r| r.flagged().count()).sum();
    let _ = writeln!(s, "\nFlagged pairs: {flagged}.\n");

    s.push_str("## Cross-seed stability\n\n");
    let _ = writeln!(
        s,
        "Mean ARI {} and mean Procrustes disparity {} over {} seed pairs.\n",
        d4(stab.mean_ari),
        d4(stab.mean_disparity),
        stab.per_pair.len()
    );
    for g in &stab.grouping_consistency {
        let _ = writeln!(s, "- {}: mean purity {}", g.condition, d4(g.mean_purity));
    }
    s
}

/// Runs the configured task and returns its artifacts, manifest excluded.
pub fn execute(cfg: &RunConfig) -> Result<Artifacts> {
    let mut out = Artifacts::default();
    match cfg.task {
        Task::Synth => {
            let ds = synthesize(cfg)?;
            out.add("synthetic.csv", csv_bytes(|b| ds.write_csv(b))?);
        }
        Task::Ingest => {
            let ds = load_input(cfg)?;
            out.add("observations.csv", csv_bytes(|b| ds.write_csv(b))?);
        }
        task => {
            let ds = load_input(cfg)?;
            let l1 = level1(&ds, cfg)?;
            match task {
                Task::Score => stage_level1(&mut out, &l1, cfg)?,
                Task::Dynamics => {
                    let rows = run_dynamics(&l1);
                    out.add("dynamics.csv", csv_bytes(|b| write_dynamics_csv(b, &rows))?);
                }
                Task::Embed => {
                    let r = run_embedding(&l1, cfg)?;
                    stage_embedding(&mut out, &l1, &r, cfg)?;
                }
                Task::Dissociate => {
                    let reports = run_dissociation(&l1, cfg)?;
                    out.add_json("dissociation.json", &dissociation_value(&reports))?;
                }
                Task::Stability => {
                    let report = run_stability(&l1, cfg)?;
                    out.add_json("stability.json", &stability_json(&report))?;
                }
                Task::Report => {
                    stage_level1(&mut out, &l1, cfg)?;
                    let dynamics = run_dynamics(&l1);
                    out.add("dynamics.csv", csv_bytes(|b| write_dynamics_csv(b, &dynamics))?);
                    let emb = run_embedding(&l1, cfg)?;
                    stage_embedding(&mut out, &l1, &emb, cfg)?;
                    let diss = run_dissociation(&l1, cfg)?;
                    out.add_json("dissociation.json", &dissociation_value(&diss))?;
                    let stab = run_stability(&l1, cfg)?;
                    out.add_json("stability.json", &stability_json(&stab))?;
                    let md = report_markdown(&ds, &l1, cfg, &dynamics, &emb, &diss, &stab);
                    out.add("report.md", md.into_bytes());
                }
                Task::Synth | Task::Ingest => unreachable!("handled above"),
            }
        }
    }
    Ok(out)
}
