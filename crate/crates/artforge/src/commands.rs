//! The pipeline stages behind each subcommand. Every command takes a fully
//! resolved [`PipelineConfig`] and returns a one-line summary; failures carry
//! the process exit code they map to.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use artforge_core::features::extract_features_with;
use artforge_core::ml::{
    balance, compute_metrics, stratified_split, train_tree, ConfusionCounts, Dataset, ForestModel, MlError,
};
use artforge_core::rng::sample_indices;
use artforge_core::synth::{generate_chain, inject_pattern, SynthError};
use artforge_core::{ArtGraph, ChainStore};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{self, PipelineConfig, Stage};
use crate::feature_table;
use crate::graph_export;
use crate::labels::{read_labels, write_labels, Label};
use crate::manifest::{self, digest_file, FileDigest, RunEntry};
use crate::model_file::{model_from_json, model_to_json, MetricsReport};
use crate::snapshot::{parse_snapshot, write_records};
use crate::truth::write_truth;

pub const PROGRESS_EVERY: usize = 100;
pub const COINBASE_NOTE: &str = "negative sampling excludes coinbase transactions";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("generation infeasible: {0}")]
    Infeasible(String),
    #[error("{} label(s) reference unknown transactions: {}", .0.len(), .0.join(", "))]
    LabelMismatch(Vec<String>),
    #[error("{} unknown transaction(s): {}", .0.len(), .0.join(", "))]
    UnknownTx(Vec<String>),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::LabelMismatch(_) => 4,
            CliError::UnknownTx(_) => 5,
            CliError::Io { .. } | CliError::Input(_) => 1,
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::InvalidConfig(m) => CliError::Config(m.to_string()),
            other => CliError::Infeasible(other.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

/// Inputs must exist before a stage starts; a missing one is a config error.
fn open_input(path: &Path) -> Result<BufReader<File>, CliError> {
    if !path.is_file() {
        return Err(CliError::Config(format!("input file {} does not exist", path.display())));
    }
    File::open(path).map(BufReader::new).map_err(io_err(path))
}

fn create_output(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    File::create(path).map(BufWriter::new).map_err(io_err(path))
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), CliError> {
    w.flush().map_err(io_err(path))
}

pub fn load_config(path: Option<&Path>) -> Result<PipelineConfig, CliError> {
    match path {
        None => Ok(PipelineConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            PipelineConfig::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn validated(cfg: &PipelineConfig) -> Result<(), CliError> {
    cfg.validate().map_err(CliError::Config)
}

pub fn load_store(path: &Path) -> Result<ChainStore, CliError> {
    parse_snapshot(open_input(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn load_labels(path: &Path) -> Result<Vec<Label>, CliError> {
    read_labels(open_input(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn unknown_ids<'a>(store: &ChainStore, ids: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    ids.into_iter().filter(|id| store.tx(id).is_none()).map(str::to_string).collect()
}

fn pool(cfg: &PipelineConfig) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Config(format!("worker pool: {e}")))
}

fn entry(cfg: &PipelineConfig, stages: &[Stage], inputs: Vec<FileDigest>, outputs: &[&Path]) -> Result<RunEntry, CliError> {
    let outputs = outputs
        .iter()
        .map(|p| digest_file(p).map_err(io_err(p)))
        .collect::<Result<_, _>>()?;
    Ok(RunEntry {
        config_sha256: manifest::sha256_hex(cfg.result_json().as_bytes()),
        master_seed: cfg.seed,
        stage_seeds: stages.iter().map(|&s| (s.name().to_string(), cfg.stage_seed(s))).collect(),
        inputs,
        outputs,
        notes: Vec::new(),
    })
}

fn digest_inputs(paths: &[&Path]) -> Result<Vec<FileDigest>, CliError> {
    paths.iter().map(|p| digest_file(p).map_err(io_err(p))).collect()
}

fn record(cfg: &PipelineConfig, command: &str, e: RunEntry) -> Result<(), CliError> {
    let path = cfg.out_file(config::MANIFEST_FILE);
    fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    manifest::record(&path, command, e).map_err(io_err(&path))
}

/// Generates a background chain, plants the three-phase pattern and writes
/// the snapshot, the spend truth and the positive labels.
pub fn cmd_synth(cfg: &PipelineConfig) -> Result<String, CliError> {
    validated(cfg)?;
    let base = generate_chain(&cfg.gen_config())?;
    let planted = inject_pattern(&base, &cfg.gen_config(), &cfg.pattern_config())?;

    let snap = cfg.out_file(config::SNAPSHOT_FILE);
    let truth = cfg.out_file(config::TRUTH_FILE);
    let pos = cfg.out_file(config::POSITIVES_FILE);

    let mut w = create_output(&snap)?;
    write_records(&planted.chain.records, &mut w).map_err(io_err(&snap))?;
    finish(w, &snap)?;
    let mut w = create_output(&truth)?;
    write_truth(&planted.chain.truth, &mut w).map_err(io_err(&truth))?;
    finish(w, &truth)?;

    let planted_ids: BTreeSet<&str> = planted.positives.iter().map(|t| t.as_str()).collect();
    let labels: Vec<Label> = planted
        .chain
        .records
        .iter()
        .filter(|r| planted_ids.contains(r.tx_id.as_str()))
        .map(|r| Label { tx_id: r.tx_id.to_string(), label: 1 })
        .collect();
    let mut w = create_output(&pos)?;
    write_labels(&labels, &mut w).map_err(io_err(&pos))?;
    finish(w, &pos)?;

    let e = entry(cfg, &[Stage::Generate, Stage::Pattern], Vec::new(), &[&snap, &truth, &pos])?;
    record(cfg, "synth", e)?;

    let records = &planted.chain.records;
    let coinbase = records.iter().filter(|r| r.is_coinbase()).count();
    Ok(format!(
        "synth: {} transactions ({} coinbase), {} positives planted ({} entering, {} consolidating, {} exiting)",
        records.len(),
        coinbase,
        labels.len(),
        planted.entering.len(),
        planted.consolidating.len(),
        planted.exiting.len()
    ))
}

/// Appends `count` label-0 rows drawn uniformly without replacement from the
/// unlabeled, non-coinbase transactions inside the window.
pub fn cmd_sample_negatives(cfg: &PipelineConfig) -> Result<String, CliError> {
    validated(cfg)?;
    let snap = cfg.snapshot_path();
    let pos_path = cfg.positives_path();
    let out_path = cfg.labels_path();
    if out_path == pos_path {
        return Err(CliError::Config("labels output would overwrite the positives input".into()));
    }
    let store = load_store(&snap)?;
    let labeled = load_labels(&pos_path)?;
    let missing = unknown_ids(&store, labeled.iter().map(|l| l.tx_id.as_str()));
    if !missing.is_empty() {
        return Err(CliError::LabelMismatch(missing));
    }

    let (span_lo, span_hi) = store.span().ok_or_else(|| CliError::Input("snapshot is empty".into()))?;
    let positive_ts: Vec<u64> = labeled
        .iter()
        .filter(|l| l.label == 1)
        .map(|l| store.tx(&l.tx_id).expect("checked above").timestamp)
        .collect();
    let lo = cfg.negatives.window_start.or(positive_ts.iter().min().copied()).unwrap_or(span_lo);
    let hi = cfg.negatives.window_end.or(positive_ts.iter().max().copied()).unwrap_or(span_hi);
    if lo > hi || lo < span_lo || hi > span_hi {
        return Err(CliError::Config(format!("window [{lo}, {hi}] is not inside the snapshot span [{span_lo}, {span_hi}]")));
    }

    let taken: BTreeSet<&str> = labeled.iter().map(|l| l.tx_id.as_str()).collect();
    let candidates: Vec<&str> = store
        .records()
        .iter()
        .filter(|r| !r.is_coinbase() && (lo..=hi).contains(&r.timestamp) && !taken.contains(r.tx_id.as_str()))
        .map(|r| r.tx_id.as_str())
        .collect();
    let count = cfg.negatives.count;
    if count > candidates.len() {
        return Err(CliError::Infeasible(format!(
            "{count} negatives requested but only {} candidates lie in [{lo}, {hi}]",
            candidates.len()
        )));
    }
    let picked = sample_indices(cfg.stage_seed(Stage::Negatives), candidates.len(), count);
    let mut out = labeled.clone();
    out.extend(picked.iter().map(|&i| Label { tx_id: candidates[i].to_string(), label: 0 }));

    let mut w = create_output(&out_path)?;
    write_labels(&out, &mut w).map_err(io_err(&out_path))?;
    finish(w, &out_path)?;

    let mut e = entry(cfg, &[Stage::Negatives], digest_inputs(&[&snap, &pos_path])?, &[&out_path])?;
    e.notes.push(COINBASE_NOTE.to_string());
    e.notes.push(format!("window [{lo}, {hi}], {} candidates", candidates.len()));
    record(cfg, "sample-negatives", e)?;
    Ok(format!(
        "sample-negatives: {} labeled rows ({} existing + {count} negatives from {} candidates)",
        out.len(),
        labeled.len(),
        candidates.len()
    ))
}

/// One feature row per labeled transaction, computed in parallel; rows keep
/// the labels file order. Progress goes to stderr.
pub fn cmd_features(cfg: &PipelineConfig) -> Result<String, CliError> {
    cmd_features_with(cfg, &|done, total| eprintln!("features: {done}/{total} seeds"))
}

/// `progress(done, total)` is called after every `PROGRESS_EVERY` seeds.
pub fn cmd_features_with(cfg: &PipelineConfig, progress: &(dyn Fn(usize, usize) + Sync)) -> Result<String, CliError> {
    validated(cfg)?;
    let snap = cfg.snapshot_path();
    let labels_path = cfg.labels_path();
    let store = load_store(&snap)?;
    let labels = load_labels(&labels_path)?;
    let missing = unknown_ids(&store, labels.iter().map(|l| l.tx_id.as_str()));
    if !missing.is_empty() {
        return Err(CliError::LabelMismatch(missing));
    }

    let opts = cfg.feature_options();
    let done = AtomicUsize::new(0);
    let total = labels.len();
    let rows: Vec<Vec<f64>> = pool(cfg)?.install(|| {
        labels
            .par_iter()
            .map(|l| {
                let v = extract_features_with(&store, &l.tx_id, cfg.n_hops, opts).expect("ids checked above");
                let n = done.fetch_add(1, Ordering::Relaxed) + 1;
                if n.is_multiple_of(PROGRESS_EVERY) {
                    progress(n, total);
                }
                v.values
            })
            .collect()
    });

    let csv = cfg.features_path();
    let schema = feature_table::schema_path(&csv);
    let names = opts.schema(cfg.n_hops);
    let mut w = create_output(&csv)?;
    (|| -> io::Result<()> {
        feature_table::write_header(names.len(), &mut w)?;
        for (l, row) in labels.iter().zip(&rows) {
            feature_table::write_row(&l.tx_id, l.label, row, &mut w)?;
        }
        Ok(())
    })()
    .map_err(io_err(&csv))?;
    finish(w, &csv)?;
    let mut w = create_output(&schema)?;
    feature_table::write_schema(&names, &mut w).map_err(io_err(&schema))?;
    finish(w, &schema)?;

    let e = entry(cfg, &[], digest_inputs(&[&snap, &labels_path])?, &[&csv, &schema])?;
    record(cfg, "features", e)?;
    Ok(format!("features: {} rows x {} feature columns (n_hops={})", rows.len(), names.len(), cfg.n_hops))
}

fn ml_err(e: MlError) -> CliError {
    match e {
        MlError::SingleClass | MlError::ClassTooSmall { .. } | MlError::WidthMismatch { .. } | MlError::Hyperparam(_) => {
            CliError::Config(e.to_string())
        }
        other => CliError::Input(other.to_string()),
    }
}

/// A trained forest, its held-out rows and the `(label, score)` predicted
/// for each of them.
pub struct Trained {
    pub model: ForestModel,
    pub test: Dataset,
    pub predictions: Vec<(u8, f64)>,
}

/// Trains a forest on a stratified split of the features table and scores
/// the held-out rows.
pub fn train_model(cfg: &PipelineConfig, data: &Dataset) -> Result<Trained, CliError> {
    let hp = cfg.hyperparams();
    let (train, test) = stratified_split(data, cfg.train_fraction, cfg.stage_seed(Stage::Split)).map_err(ml_err)?;
    let (balanced, standardizer) = balance(&train, cfg.smote_k, cfg.stage_seed(Stage::Smote)).map_err(ml_err)?;
    ForestModel::check_trainable(&balanced, &hp).map_err(ml_err)?;
    let seed = cfg.stage_seed(Stage::Forest);
    let trees = pool(cfg)?.install(|| (0..hp.n_trees).into_par_iter().map(|i| train_tree(&balanced, &hp, seed, i)).collect());
    let model = ForestModel { trees, standardizer, hyperparams: hp, seed };
    let predictions = test.rows.iter().map(|r| model.predict(r).map_err(ml_err)).collect::<Result<Vec<_>, _>>()?;
    Ok(Trained { model, test, predictions })
}

pub fn cmd_train(cfg: &PipelineConfig) -> Result<String, CliError> {
    validated(cfg)?;
    let csv = cfg.features_path();
    let schema_path = feature_table::schema_path(&csv);
    let data = feature_table::read_table(open_input(&csv)?).map_err(|e| CliError::Input(format!("{}: {e}", csv.display())))?;
    let schema =
        feature_table::read_schema(open_input(&schema_path)?).map_err(|e| CliError::Input(format!("{}: {e}", schema_path.display())))?;
    let width = if data.is_empty() { schema.len() } else { data.width() };
    if width != schema.len() {
        return Err(CliError::Config(format!("features have {width} columns but the schema sidecar lists {}", schema.len())));
    }
    if data.count(0) == 0 || data.count(1) == 0 {
        return Err(CliError::Config(format!(
            "features file needs both classes (found {} positive, {} negative)",
            data.count(1),
            data.count(0)
        )));
    }

    let Trained { model, test, predictions } = train_model(cfg, &data)?;
    let predicted: Vec<u8> = predictions.iter().map(|p| p.0).collect();
    let counts = ConfusionCounts::from_labels(&test.labels, &predicted);
    let report = MetricsReport::new(counts, compute_metrics(counts));

    let model_path = cfg.model_path();
    let metrics_path = cfg.out_file(config::METRICS_FILE);
    let preds_path = cfg.out_file(config::PREDICTIONS_FILE);
    for (path, text) in [(&model_path, model_to_json(&model)), (&metrics_path, report.to_json())] {
        let mut w = create_output(path)?;
        w.write_all(text.as_bytes()).map_err(io_err(path))?;
        finish(w, path)?;
    }
    let mut w = create_output(&preds_path)?;
    (|| -> io::Result<()> {
        writeln!(w, "tx_id,label,score,predicted")?;
        for ((id, label), (p, score)) in test.ids.iter().zip(&test.labels).zip(&predictions) {
            writeln!(w, "{id},{label},{score},{p}")?;
        }
        Ok(())
    })()
    .map_err(io_err(&preds_path))?;
    finish(w, &preds_path)?;

    let e = entry(
        cfg,
        &[Stage::Split, Stage::Smote, Stage::Forest],
        digest_inputs(&[&csv, &schema_path])?,
        &[&model_path, &metrics_path, &preds_path],
    )?;
    record(cfg, "train", e)?;
    Ok(format!(
        "train: {} trees on {} rows; test tp={} fp={} tn={} fn={} precision={:.3} recall={:.3} f1={:.3}",
        model.trees.len(),
        data.len() - test.len(),
        report.tp,
        report.fp,
        report.tn,
        report.fn_,
        report.precision,
        report.recall,
        report.f1
    ))
}

/// Scores each id with a saved model, writing `tx_id,score,label` lines in
/// input order. Unknown ids are skipped, then reported as an error.
pub fn cmd_classify(cfg: &PipelineConfig, ids: &[String], mut out: impl Write) -> Result<String, CliError> {
    validated(cfg)?;
    let model_path = cfg.model_path();
    let mut text = String::new();
    open_input(&model_path)?.read_to_string(&mut text).map_err(io_err(&model_path))?;
    let model = model_from_json(&text).map_err(|e| CliError::Input(format!("{}: {e}", model_path.display())))?;
    let opts = cfg.feature_options();
    let width = opts.width(cfg.n_hops);
    if width != model.width() {
        return Err(CliError::Config(format!(
            "model expects {} features but n_hops={} yields {width}",
            model.width(),
            cfg.n_hops
        )));
    }
    let store = load_store(&cfg.snapshot_path())?;
    let mut unknown = Vec::new();
    let mut scored = 0usize;
    for id in ids {
        if store.tx(id).is_none() {
            unknown.push(id.clone());
            continue;
        }
        let v = extract_features_with(&store, id, cfg.n_hops, opts).expect("id is known");
        let (label, score) = model.predict(&v.values).map_err(ml_err)?;
        writeln!(out, "{id},{score},{label}").map_err(io_err(Path::new("<stdout>")))?;
        scored += 1;
    }
    if !unknown.is_empty() {
        return Err(CliError::UnknownTx(unknown));
    }
    Ok(format!("classify: {scored} transactions scored"))
}

/// Writes the edge-list export of one seed's graph.
pub fn cmd_graph(cfg: &PipelineConfig, seed: &str, out: impl Write) -> Result<String, CliError> {
    validated(cfg)?;
    let store = load_store(&cfg.snapshot_path())?;
    let g = ArtGraph::build_with(&store, seed, cfg.n_hops, cfg.feature_options().expand)
        .map_err(|_| CliError::UnknownTx(vec![seed.to_string()]))?;
    graph_export::export_graph(&g, out).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(format!(
        "graph: {} transactions, {} rings, {} addresses, {} edges",
        g.tx_nodes().len(),
        g.ring_nodes().len(),
        g.address_nodes().len(),
        g.edges().len()
    ))
}
