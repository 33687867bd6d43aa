//! Pipeline configuration: one versioned JSON document. Every key has a
//! default, so `{"version": 1}` is a complete config. Stage seeds are not
//! configured individually; they are derived from the master `seed`.

use std::path::{Path, PathBuf};

use artforge_core::ml::Hyperparams;
use artforge_core::rng::derive_seed;
use artforge_core::synth::{GenConfig, PatternConfig};
use artforge_core::{ExpandOptions, FeatureOptions};
use serde::{Deserialize, Serialize};

pub const CONFIG_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 7;

/// Tags mixed into the master seed, one per stochastic stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Generate = 1,
    Pattern = 2,
    Negatives = 3,
    Split = 4,
    Smote = 5,
    Forest = 6,
}

impl Stage {
    pub const ALL: [Stage; 6] = [Stage::Generate, Stage::Pattern, Stage::Negatives, Stage::Split, Stage::Smote, Stage::Forest];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Generate => "generate",
            Stage::Pattern => "pattern",
            Stage::Negatives => "negatives",
            Stage::Split => "split",
            Stage::Smote => "smote",
            Stage::Forest => "forest",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenSection {
    pub n_background_txs: usize,
    pub ring_size: usize,
    pub outputs_per_tx: usize,
    pub inputs_per_tx: (usize, usize),
    pub block_interval: u64,
    pub tx_interval: f64,
    pub decoy_recency_scale: f64,
    pub bootstrap_coinbase: usize,
    pub coinbase_every: usize,
    pub dormant_fraction: f64,
    pub genesis_timestamp: u64,
    pub fee_per_ring: u64,
}

impl Default for GenSection {
    fn default() -> Self {
        let g = GenConfig::default();
        GenSection {
            n_background_txs: g.n_background_txs,
            ring_size: g.ring_size,
            outputs_per_tx: g.outputs_per_tx,
            inputs_per_tx: g.inputs_per_tx,
            block_interval: g.block_interval,
            tx_interval: g.tx_interval,
            decoy_recency_scale: g.decoy_recency_scale,
            bootstrap_coinbase: g.bootstrap_coinbase,
            coinbase_every: g.coinbase_every,
            dormant_fraction: g.dormant_fraction,
            genesis_timestamp: g.genesis_timestamp,
            fee_per_ring: g.fee_per_ring,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatternSection {
    pub n_entering: usize,
    pub n_consolidating: usize,
    pub n_exiting: usize,
    pub gap_enter_to_consolidate: u64,
    pub gap_consolidate_to_exit: u64,
    pub consolidating_inputs: Option<usize>,
    pub jitter_window: u64,
}

impl Default for PatternSection {
    fn default() -> Self {
        let p = PatternConfig::default();
        PatternSection {
            n_entering: p.n_entering,
            n_consolidating: p.n_consolidating,
            n_exiting: p.n_exiting,
            gap_enter_to_consolidate: p.gap_enter_to_consolidate,
            gap_consolidate_to_exit: p.gap_consolidate_to_exit,
            consolidating_inputs: p.consolidating_inputs,
            jitter_window: p.jitter_window,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub generator: GenSection,
    pub pattern: PatternSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NegativesSection {
    pub count: usize,
    /// Inclusive timestamp window; defaults to the span of the positives.
    pub window_start: Option<u64>,
    pub window_end: Option<u64>,
}

impl Default for NegativesSection {
    fn default() -> Self {
        NegativesSection { count: 150, window_start: None, window_end: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestSection {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub features_per_split: Option<usize>,
    pub vote_threshold: f64,
}

impl Default for ForestSection {
    fn default() -> Self {
        let h = Hyperparams::default();
        ForestSection {
            n_trees: h.n_trees,
            max_depth: h.max_depth,
            min_leaf: h.min_leaf,
            features_per_split: h.features_per_split,
            vote_threshold: h.vote_threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub version: u32,
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads for the parallel stages; 0 lets the runtime decide.
    pub workers: usize,
    pub synth: SynthSection,
    /// Paths default to well-known names inside `out`.
    pub snapshot: Option<PathBuf>,
    pub positives: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub features: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub negatives: NegativesSection,
    pub n_hops: u32,
    pub hop_tx_count: bool,
    pub sibling_rings: bool,
    pub train_fraction: f64,
    pub smote_k: usize,
    pub forest: ForestSection,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            version: CONFIG_VERSION,
            seed: DEFAULT_SEED,
            out: PathBuf::from("artforge-out"),
            workers: 0,
            synth: SynthSection::default(),
            snapshot: None,
            positives: None,
            labels: None,
            features: None,
            model: None,
            negatives: NegativesSection::default(),
            n_hops: 2,
            hop_tx_count: true,
            sibling_rings: false,
            train_fraction: 0.8,
            smote_k: 5,
            forest: ForestSection::default(),
        }
    }
}

pub const SNAPSHOT_FILE: &str = "synth.chain.jsonl";
pub const TRUTH_FILE: &str = "synth.truth.jsonl";
pub const POSITIVES_FILE: &str = "synth.labels.csv";
pub const LABELS_FILE: &str = "labels.csv";
pub const FEATURES_FILE: &str = "features.csv";
pub const MODEL_FILE: &str = "model.forest.json";
pub const METRICS_FILE: &str = "model.metrics.json";
pub const PREDICTIONS_FILE: &str = "model.predictions.csv";
pub const MANIFEST_FILE: &str = "run-manifest.json";

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self, String> {
        let cfg: PipelineConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.version != CONFIG_VERSION {
            return Err(format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version));
        }
        if self.n_hops == 0 {
            return Err("n_hops must be at least 1".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err("train_fraction must lie strictly between 0 and 1".into());
        }
        if self.smote_k == 0 {
            return Err("smote_k must be at least 1".into());
        }
        if let (Some(a), Some(b)) = (self.negatives.window_start, self.negatives.window_end) {
            if a > b {
                return Err("negatives window starts after it ends".into());
            }
        }
        self.hyperparams().validate().map_err(|e| e.to_string())?;
        self.gen_config().validate().map_err(|e| e.to_string())?;
        self.pattern_config().validate().map_err(|e| e.to_string())?;
        Ok(())
    }

    pub fn stage_seed(&self, stage: Stage) -> u64 {
        derive_seed(self.seed, stage as u64)
    }

    pub fn gen_config(&self) -> GenConfig {
        let g = &self.synth.generator;
        GenConfig {
            n_background_txs: g.n_background_txs,
            ring_size: g.ring_size,
            outputs_per_tx: g.outputs_per_tx,
            inputs_per_tx: g.inputs_per_tx,
            block_interval: g.block_interval,
            tx_interval: g.tx_interval,
            decoy_recency_scale: g.decoy_recency_scale,
            bootstrap_coinbase: g.bootstrap_coinbase,
            coinbase_every: g.coinbase_every,
            dormant_fraction: g.dormant_fraction,
            genesis_timestamp: g.genesis_timestamp,
            fee_per_ring: g.fee_per_ring,
            rng_seed: self.stage_seed(Stage::Generate),
        }
    }

    pub fn pattern_config(&self) -> PatternConfig {
        let p = &self.synth.pattern;
        PatternConfig {
            n_entering: p.n_entering,
            n_consolidating: p.n_consolidating,
            n_exiting: p.n_exiting,
            gap_enter_to_consolidate: p.gap_enter_to_consolidate,
            gap_consolidate_to_exit: p.gap_consolidate_to_exit,
            consolidating_inputs: p.consolidating_inputs,
            jitter_window: p.jitter_window,
            rng_seed: self.stage_seed(Stage::Pattern),
        }
    }

    pub fn hyperparams(&self) -> Hyperparams {
        let f = &self.forest;
        Hyperparams {
            n_trees: f.n_trees,
            max_depth: f.max_depth,
            min_leaf: f.min_leaf,
            features_per_split: f.features_per_split,
            vote_threshold: f.vote_threshold,
        }
    }

    pub fn feature_options(&self) -> FeatureOptions {
        FeatureOptions { hop_tx_count: self.hop_tx_count, expand: ExpandOptions { sibling_rings: self.sibling_rings } }
    }

    fn in_out(&self, explicit: &Option<PathBuf>, name: &str) -> PathBuf {
        explicit.clone().unwrap_or_else(|| self.out.join(name))
    }

    pub fn snapshot_path(&self) -> PathBuf {
        self.in_out(&self.snapshot, SNAPSHOT_FILE)
    }

    pub fn positives_path(&self) -> PathBuf {
        self.in_out(&self.positives, POSITIVES_FILE)
    }

    pub fn labels_path(&self) -> PathBuf {
        self.in_out(&self.labels, LABELS_FILE)
    }

    pub fn features_path(&self) -> PathBuf {
        self.in_out(&self.features, FEATURES_FILE)
    }

    pub fn model_path(&self) -> PathBuf {
        self.in_out(&self.model, MODEL_FILE)
    }

    pub fn out_file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Canonical JSON of the knobs that influence results. The output
    /// directory and worker count are blanked: neither changes any output.
    pub fn result_json(&self) -> String {
        let mut c = self.clone();
        c.out = PathBuf::new();
        c.workers = 0;
        for p in [&mut c.snapshot, &mut c.positives, &mut c.labels, &mut c.features, &mut c.model] {
            if let Some(path) = p.as_mut() {
                *path = PathBuf::from(file_name(path));
            }
        }
        serde_json::to_string(&c).expect("config serializes")
    }
}

pub fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}
