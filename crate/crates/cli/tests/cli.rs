use std::path::Path;
use std::process::{Command, Output};

use gaitlevels_core::ingest::GaitObservation;
use gaitlevels_core::synth::TABLE1;
use gaitlevels_core::{ConditionLabel, GaitDataset, Phase, SessionLabel, StateVector};

fn gaitlevels(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gaitlevels"))
        .args(args)
        .env_remove("GAITLEVELS_OUT")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Every row of a cell has all features zero except CAPA, which carries the
/// reference cell mean, so raw GPPS equals that mean exactly.
fn point_mass_table(path: &Path) {
    let mut observations = Vec::new();
    for row in TABLE1 {
        for (session, mean) in [(SessionLabel::M1, row.m1_mean), (SessionLabel::M2, row.m2_mean)] {
            for _ in 0..3 {
                let mut state = [0.0; 9];
                state[8] = mean;
                observations.push(GaitObservation {
                    obs_id: observations.len() as u64 + 1,
                    session,
                    condition: row.condition,
                    phase: Phase::Linear,
                    state: StateVector(state),
                });
            }
        }
    }
    let ds = GaitDataset {
        observations,
        provenance: "point masses".into(),
    };
    ds.write_csv(std::fs::File::create(path).unwrap()).unwrap();
}

#[test]
fn missing_input_fails_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = gaitlevels(&["score", "--input", p(&tmp.path().join("absent.csv")), "--out", p(&out)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("cannot open input file"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn missing_output_dir_is_an_error() {
    let o = gaitlevels(&["synth", "--scenario", "iid"]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("GAITLEVELS_OUT"));
}

#[test]
fn output_dir_from_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("env-out");
    let o = Command::new(env!("CARGO_BIN_EXE_gaitlevels"))
        .args(["synth", "--scenario", "iid", "--n", "5"])
        .env("GAITLEVELS_OUT", &out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("synthetic.csv").exists());
}

#[test]
fn bad_config_fails_cleanly() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "umap.n_neighbours = 4\n").unwrap();
    let out = tmp.path().join("out");
    let o = gaitlevels(&["synth", "--scenario", "iid", "--config", p(&cfg), "--out", p(&out)]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("unknown key `umap.n_neighbours`"), "{}", stderr(&o));
    assert!(!out.exists());
}

#[test]
fn failed_analysis_leaves_no_files() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("tiny.csv");
    point_mass_table(&input);
    let out = tmp.path().join("out");
    // 36 rows cannot support 50 neighbours.
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "umap.n_neighbors = 50\n").unwrap();
    let o = gaitlevels(&["embed", "--input", p(&input), "--config", p(&cfg), "--out", p(&out)]);
    assert!(!o.status.success());
    assert!(!out.exists());
}

#[test]
fn point_mass_table_reproduces_reference_deltas() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("table.csv");
    point_mass_table(&input);
    let out = tmp.path().join("out");
    let o = gaitlevels(&["score", "--input", p(&input), "--raw-scores", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let mut reader = csv::Reader::from_path(out.join("summary.csv")).unwrap();
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    for (rec, want) in rows.iter().zip(TABLE1) {
        assert_eq!(&rec[col("condition")], want.condition.as_str());
        let delta: f64 = rec[col("delta_percent")].parse().unwrap();
        assert!(
            (delta - want.delta_percent).abs() <= 0.01,
            "{}: {delta}",
            want.condition
        );
        assert_eq!(rec[col("m1_mean")], format!("{:.2}", want.m1_mean));
    }
}

#[test]
fn synthetic_scenario_flags_one_pair() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let o = gaitlevels(&["synth", "--scenario", "dissociation", "--seed", "7", "--out", p(&data)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = tmp.path().join("out");
    let input = data.join("synthetic.csv");
    let o = gaitlevels(&["dissociate", "--input", p(&input), "--seed", "7", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("dissociation.json")).unwrap()).unwrap();
    let flagged: Vec<&serde_json::Value> = report
        .as_array()
        .unwrap()
        .iter()
        .filter(|p| p["flagged"] == true)
        .collect();
    assert_eq!(flagged.len(), 1);
    assert_eq!(flagged[0]["cond_i"], ConditionLabel::Oc2_5.as_str());
    assert_eq!(flagged[0]["cond_j"], ConditionLabel::Oc3.as_str());
    assert_eq!(flagged[0]["session"], "M1");
}

#[test]
fn embed_writes_plot_and_replays_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    assert!(gaitlevels(&[
        "synth",
        "--scenario",
        "table1",
        "--n",
        "15",
        "--seed",
        "2",
        "--out",
        p(&data)
    ])
    .status
    .success());
    let input = data.join("synthetic.csv");
    let first = tmp.path().join("first");
    let o = gaitlevels(&[
        "embed",
        "--input",
        p(&input),
        "--session",
        "M2",
        "--seed",
        "4",
        "--out",
        p(&first),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));

    let svg = std::fs::read_to_string(first.join("embedding.svg")).unwrap();
    assert!(svg.contains("latent-1 (arbitrary units)"));
    assert!(
        svg.contains("<rect x=") && !svg.contains("<circle"),
        "M2 rows use square markers only"
    );
    let csv = std::fs::read_to_string(first.join("embedding.csv")).unwrap();
    assert!(csv.starts_with("obs_id,session,condition,z1,z2\n"));
    assert_eq!(csv.lines().count(), 1 + 6 * 15);
    let coord = csv.lines().nth(1).unwrap().rsplit(',').next().unwrap();
    assert_eq!(coord.split('.').nth(1).map(str::len), Some(4));

    let second = tmp.path().join("second");
    let manifest = first.join("run_manifest.json");
    assert!(gaitlevels(&["replay", "--manifest", p(&manifest), "--out", p(&second)])
        .status
        .success());
    for name in ["embedding.csv", "embedding.json", "embedding.svg", "run_manifest.json"] {
        assert_eq!(
            std::fs::read(first.join(name)).unwrap(),
            std::fs::read(second.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn ingest_drops_turns_and_other_sessions() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in.csv");
    std::fs::write(
        &input,
        "obs_id,session,condition,phase,v,c,D,A,A_P,A_L,L,CoP,CAPA\n\
         1,M1,ONL,linear,1,2,3,4,5,6,7,8,9\n\
         2,M1,ONL,turn,1,2,3,4,5,6,7,8,9\n\
         3,M2,OSL,linear,1,2,3,4,5,6,7,8,9\n",
    )
    .unwrap();
    let out = tmp.path().join("out");
    let o = gaitlevels(&["ingest", "--input", p(&input), "--session", "M1", "--out", p(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("observations.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().starts_with("1,M1,ONL,linear"));
}

#[test]
fn invalid_label_is_reported_with_row() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("in.csv");
    std::fs::write(
        &input,
        "obs_id,session,condition,phase,v,c,D,A,A_P,A_L,L,CoP,CAPA\n1,M1,OXL,linear,1,2,3,4,5,6,7,8,9\n",
    )
    .unwrap();
    let o = gaitlevels(&["ingest", "--input", p(&input), "--out", p(&tmp.path().join("out"))]);
    assert!(!o.status.success());
    let err = stderr(&o);
    assert!(err.contains("OXL") && err.contains('1'), "{err}");
}

#[test]
fn stability_needs_two_seeds() {
    let tmp = tempfile::tempdir().unwrap();
    let o = gaitlevels(&["stability", "--input", "x.csv", "--seeds", "3", "--out", p(tmp.path())]);
    assert!(!o.status.success());
    assert!(stderr(&o).contains("at least two"));
}
