//! End-to-end runs of the `artforge` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use artforge::commands::{cmd_sample_negatives, cmd_synth};
use artforge::config::{self, PipelineConfig};
use artforge::feature_table::read_table;
use artforge::labels::read_labels;
use artforge::model_file::MetricsReport;
use artforge::snapshot::{parse_snapshot, read_records, to_canonical_string};
use artforge_core::features::extract_features;
use artforge_core::ml::compute_metrics;
use tempfile::TempDir;

fn artforge(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_artforge"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = artforge(dir, args);
    assert!(o.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

/// synth + sample-negatives + features + train into a fresh directory.
fn full_run(seed: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for cmd in ["synth", "sample-negatives", "features", "train"] {
        ok(dir.path(), &[cmd, "--seed", seed, "--n-trees", "40"]);
    }
    dir
}

fn labels(path: &Path) -> Vec<artforge::labels::Label> {
    read_labels(fs::read(path).unwrap().as_slice()).unwrap()
}

fn write_config(dir: &Path, json: &str) -> PathBuf {
    let p = dir.join("cfg.json");
    fs::write(&p, json).unwrap();
    p
}

#[test]
fn synth_defaults_plant_nineteen_and_are_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let summary = ok(a.path(), &["synth"]);
    assert!(summary.contains("19 positives planted"), "{summary}");
    ok(b.path(), &["synth"]);
    let pos = labels(&a.path().join(config::POSITIVES_FILE));
    assert_eq!(pos.len(), 19);
    assert!(pos.iter().all(|l| l.label == 1));
    for f in [config::SNAPSHOT_FILE, config::TRUTH_FILE, config::POSITIVES_FILE, config::MANIFEST_FILE] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn snapshot_is_canonical() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "--seed", "3"]);
    let bytes = fs::read(dir.path().join(config::SNAPSHOT_FILE)).unwrap();
    let records = read_records(bytes.as_slice()).unwrap();
    assert_eq!(to_canonical_string(&records).as_bytes(), bytes.as_slice());
    let store = parse_snapshot(bytes.as_slice()).unwrap();
    assert_eq!(to_canonical_string(store.records()).as_bytes(), bytes.as_slice());
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let zero = write_config(dir.path(), r#"{"version":1,"synth":{"pattern":{"n_consolidating":0}}}"#);
    let o = artforge(dir.path(), &["synth", "--config", zero.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(!dir.path().join(config::SNAPSHOT_FILE).exists());

    let bad_version = write_config(dir.path(), r#"{"version":9}"#);
    assert_eq!(code(&artforge(dir.path(), &["synth", "--config", bad_version.to_str().unwrap()])), 2);
    let unknown_key = write_config(dir.path(), r#"{"version":1,"hops":2}"#);
    assert_eq!(code(&artforge(dir.path(), &["synth", "--config", unknown_key.to_str().unwrap()])), 2);
    // A stage whose input files are missing.
    assert_eq!(code(&artforge(dir.path(), &["features"])), 2);
}

#[test]
fn infeasible_generation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    // Far too few background transactions to host the planted window.
    let cfg = write_config(dir.path(), r#"{"version":1,"synth":{"generator":{"n_background_txs":20}}}"#);
    assert_eq!(code(&artforge(dir.path(), &["synth", "--config", cfg.to_str().unwrap()])), 3);
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"version":1,"seed":5,"synth":{"pattern":{"n_entering":2,"n_consolidating":1,"n_exiting":2}}}"#);
    let c = cfg.to_str().unwrap();
    ok(dir.path(), &["synth", "--config", c]);
    assert_eq!(labels(&dir.path().join(config::POSITIVES_FILE)).len(), 5);
    let first = fs::read(dir.path().join(config::SNAPSHOT_FILE)).unwrap();
    ok(dir.path(), &["synth", "--config", c, "--seed", "6"]);
    assert_ne!(fs::read(dir.path().join(config::SNAPSHOT_FILE)).unwrap(), first);
}

#[test]
fn sample_negatives_counts_and_limits() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth"]);
    let summary = ok(d, &["sample-negatives"]);
    let rows = labels(&d.join(config::LABELS_FILE));
    assert_eq!(rows.len(), 169);
    assert_eq!(rows.iter().filter(|l| l.label == 0).count(), 150);

    // "N existing + M negatives from C candidates"
    let candidates: usize = summary.split(" from ").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    ok(d, &["sample-negatives", "--count", &candidates.to_string()]);
    let all = labels(&d.join(config::LABELS_FILE));
    ok(d, &["sample-negatives", "--count", &candidates.to_string(), "--seed", "99"]);
    assert_eq!(labels(&d.join(config::LABELS_FILE)), all);

    let o = artforge(d, &["sample-negatives", "--count", &(candidates + 1).to_string()]);
    assert_eq!(code(&o), 3);
    let o = artforge(d, &["sample-negatives", "--window-start", "0", "--window-end", "10"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn negatives_never_hit_positives_or_coinbase() {
    let dir = tempfile::tempdir().unwrap();
    let base = PipelineConfig { out: dir.path().to_path_buf(), ..Default::default() };
    cmd_synth(&base).unwrap();
    let store = parse_snapshot(fs::read(base.snapshot_path()).unwrap().as_slice()).unwrap();
    let positives: std::collections::BTreeSet<String> =
        labels(&base.positives_path()).into_iter().map(|l| l.tx_id).collect();
    let mut distinct = std::collections::BTreeSet::new();
    for seed in 0..20 {
        // Same chain, different negative-sampling seed each time.
        let cfg = PipelineConfig { seed, snapshot: Some(base.snapshot_path()), positives: Some(base.positives_path()), ..base.clone() };
        cmd_sample_negatives(&cfg).unwrap();
        let negs: Vec<String> =
            labels(&cfg.labels_path()).into_iter().filter(|l| l.label == 0).map(|l| l.tx_id).collect();
        assert_eq!(negs.len(), 150);
        for id in &negs {
            assert!(!positives.contains(id));
            assert!(!store.tx(id).unwrap().is_coinbase());
        }
        distinct.insert(negs);
    }
    assert!(distinct.len() > 1, "seed does not influence sampling");
}

#[test]
fn features_table_shape_and_values() {
    let dir = full_run("7");
    let d = dir.path();
    let table = read_table(fs::read(d.join(config::FEATURES_FILE)).unwrap().as_slice()).unwrap();
    assert_eq!((table.len(), table.width()), (169, 42));
    let schema = fs::read_to_string(d.join("features.csv.schema")).unwrap();
    assert_eq!(schema.lines().count(), 42);
    assert!(schema.starts_with("f000=n_rings\n"));

    let store = parse_snapshot(fs::read(d.join(config::SNAPSHOT_FILE)).unwrap().as_slice()).unwrap();
    for i in (0..table.len()).step_by(17).take(10) {
        let direct = extract_features(&store, &table.ids[i], 2).unwrap();
        assert_eq!(direct.values, table.rows[i], "row {}", table.ids[i]);
    }
}

#[test]
fn features_edge_cases() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth"]);
    let empty = d.join("empty.csv");
    fs::write(&empty, "tx_id,label\n").unwrap();
    ok(d, &["features", "--labels", empty.to_str().unwrap()]);
    let text = fs::read_to_string(d.join(config::FEATURES_FILE)).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("tx_id,label,f000,"));

    let bad = d.join("bad.csv");
    fs::write(&bad, "tx_id,label\nnot-a-tx,1\nalso-missing,0\n").unwrap();
    let o = artforge(d, &["features", "--labels", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("not-a-tx") && err.contains("also-missing"), "{err}");
}

#[test]
fn train_reports_consistent_metrics() {
    let dir = full_run("7");
    let d = dir.path();
    let text = fs::read_to_string(d.join(config::METRICS_FILE)).unwrap();
    let m: MetricsReport = serde_json::from_str(&text).unwrap();
    assert_eq!(m.tp + m.fn_, 4);
    assert_eq!(m.tp + m.fp + m.tn + m.fn_, 34);
    let again = compute_metrics(m.counts());
    assert!((again.precision - m.precision).abs() < 1e-12);
    assert!((again.recall - m.recall).abs() < 1e-12);
    assert!((again.f1 - m.f1).abs() < 1e-12);

    let model = fs::read(d.join(config::MODEL_FILE)).unwrap();
    ok(d, &["train", "--seed", "7", "--n-trees", "40", "--workers", "3"]);
    assert_eq!(fs::read_to_string(d.join(config::METRICS_FILE)).unwrap(), text);
    assert_eq!(fs::read(d.join(config::MODEL_FILE)).unwrap(), model);
}

#[test]
fn train_rejects_bad_tables() {
    let dir = full_run("2");
    let d = dir.path();
    let csv = fs::read_to_string(d.join(config::FEATURES_FILE)).unwrap();

    let single: String = csv.lines().filter(|l| !l.contains(",1,")).map(|l| format!("{l}\n")).collect();
    let p = d.join("single.csv");
    fs::write(&p, single).unwrap();
    fs::copy(d.join("features.csv.schema"), d.join("single.csv.schema")).unwrap();
    assert_eq!(code(&artforge(d, &["train", "--features", p.to_str().unwrap()])), 2);

    let p = d.join("narrow.csv");
    fs::write(&p, &csv).unwrap();
    let schema = fs::read_to_string(d.join("features.csv.schema")).unwrap();
    let short: String = schema.lines().take(41).map(|l| format!("{l}\n")).collect();
    fs::write(d.join("narrow.csv.schema"), short).unwrap();
    assert_eq!(code(&artforge(d, &["train", "--features", p.to_str().unwrap()])), 2);
}

#[test]
fn classify_scores_and_errors() {
    let dir = full_run("7");
    let d = dir.path();
    let pos = labels(&d.join(config::POSITIVES_FILE));
    // Positives are listed in chain order, so the last one is an exiting tx.
    let exiting = &pos.last().unwrap().tx_id;
    let store = parse_snapshot(fs::read(d.join(config::SNAPSHOT_FILE)).unwrap().as_slice()).unwrap();
    let coinbase = store.records().iter().find(|r| r.is_coinbase()).unwrap().tx_id.to_string();

    let out = ok(d, &["classify", exiting, &coinbase]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 2);
    let cols: Vec<&str> = lines[0].split(',').collect();
    assert_eq!((cols[0], cols[2]), (exiting.as_str(), "1"));
    let cb: Vec<&str> = lines[1].split(',').collect();
    let score: f64 = cb[1].parse().unwrap();
    assert!((0.0..=1.0).contains(&score));

    assert_eq!(ok(d, &["classify"]), "");

    let o = artforge(d, &["classify", exiting, "nope"]);
    assert_eq!(code(&o), 5);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope"));

    assert_eq!(code(&artforge(d, &["classify", exiting, "--n-hops", "3"])), 2);
}

#[test]
fn inputs_are_not_mutated() {
    let dir = full_run("4");
    let d = dir.path();
    let inputs = [config::SNAPSHOT_FILE, config::POSITIVES_FILE, config::LABELS_FILE, config::FEATURES_FILE];
    let before: Vec<Vec<u8>> = inputs.iter().map(|f| fs::read(d.join(f)).unwrap()).collect();
    ok(d, &["sample-negatives", "--seed", "4", "--labels", d.join("other.csv").to_str().unwrap()]);
    ok(d, &["features", "--seed", "4", "--features", d.join("other-features.csv").to_str().unwrap()]);
    ok(d, &["train", "--seed", "4", "--n-trees", "10"]);
    let after: Vec<Vec<u8>> = inputs.iter().map(|f| fs::read(d.join(f)).unwrap()).collect();
    assert_eq!(before, after);

    let same = d.join(config::POSITIVES_FILE);
    let o = artforge(d, &["sample-negatives", "--labels", same.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn manifest_records_every_stage() {
    let dir = full_run("7");
    let text = fs::read_to_string(dir.path().join(config::MANIFEST_FILE)).unwrap();
    let m: serde_json::Value = serde_json::from_str(&text).unwrap();
    for cmd in ["synth", "sample-negatives", "features", "train"] {
        let e = &m[cmd];
        assert_eq!(e["master_seed"], 7, "{cmd}");
        assert_eq!(e["config_sha256"].as_str().unwrap().len(), 64);
        assert!(!e["outputs"].as_array().unwrap().is_empty());
    }
    assert!(m["sample-negatives"]["notes"][0].as_str().unwrap().contains("coinbase"));
    let f = &m["features"]["inputs"][0];
    assert_eq!(f["file"], config::SNAPSHOT_FILE);
}

#[test]
fn graph_subcommand_exports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    ok(d, &["synth"]);
    let pos = labels(&d.join(config::POSITIVES_FILE));
    let out = ok(d, &["graph", &pos[0].tx_id]);
    assert!(out.starts_with(&format!("# art-graph seed={} hops=2\n", pos[0].tx_id)));
    let g = artforge::graph_export::import_graph(out.as_bytes()).unwrap();
    assert_eq!(artforge::graph_export::export_to_string(&g).unwrap(), out);
    assert_eq!(code(&artforge(d, &["graph", "missing"])), 5);
}
