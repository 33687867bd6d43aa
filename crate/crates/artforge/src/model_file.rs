//! `.forest.json` model documents and `.metrics.json` reports.

use artforge_core::ml::{ConfusionCounts, ForestModel, Hyperparams, Metrics, Node, Standardizer, Tree};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported model version {0}")]
    Version(u32),
    #[error("invalid model: {0}")]
    Invalid(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HyperparamsDoc {
    n_trees: usize,
    max_depth: Option<usize>,
    min_leaf: usize,
    features_per_split: Option<usize>,
    vote_threshold: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StandardizerDoc {
    mean: Vec<f64>,
    std: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeDoc {
    Split { feat: usize, thr: f64, left: usize, right: usize },
    Leaf { leaf: f64 },
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeDoc {
    nodes: Vec<NodeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    version: u32,
    hyperparams: HyperparamsDoc,
    standardizer: StandardizerDoc,
    trees: Vec<TreeDoc>,
    seed: u64,
}

pub fn model_to_json(m: &ForestModel) -> String {
    let hp = &m.hyperparams;
    let doc = ModelDoc {
        version: MODEL_VERSION,
        hyperparams: HyperparamsDoc {
            n_trees: hp.n_trees,
            max_depth: hp.max_depth,
            min_leaf: hp.min_leaf,
            features_per_split: hp.features_per_split,
            vote_threshold: hp.vote_threshold,
        },
        standardizer: StandardizerDoc { mean: m.standardizer.mean.clone(), std: m.standardizer.std.clone() },
        trees: m
            .trees
            .iter()
            .map(|t| TreeDoc {
                nodes: t
                    .nodes
                    .iter()
                    .map(|n| match *n {
                        Node::Split { feat, thr, left, right } => NodeDoc::Split { feat, thr, left, right },
                        Node::Leaf(p) => NodeDoc::Leaf { leaf: p },
                    })
                    .collect(),
            })
            .collect(),
        seed: m.seed,
    };
    let mut s = serde_json::to_string(&doc).expect("model serializes");
    s.push('\n');
    s
}

pub fn model_from_json(text: &str) -> Result<ForestModel, ModelFileError> {
    let doc: ModelDoc = serde_json::from_str(text)?;
    if doc.version != MODEL_VERSION {
        return Err(ModelFileError::Version(doc.version));
    }
    let width = doc.standardizer.mean.len();
    if doc.standardizer.std.len() != width {
        return Err(ModelFileError::Invalid("standardizer mean/std lengths differ".into()));
    }
    if doc.trees.is_empty() {
        return Err(ModelFileError::Invalid("no trees".into()));
    }
    let mut trees = Vec::with_capacity(doc.trees.len());
    for (t, tree) in doc.trees.into_iter().enumerate() {
        let count = tree.nodes.len();
        if count == 0 {
            return Err(ModelFileError::Invalid(format!("tree {t} has no nodes")));
        }
        let mut nodes = Vec::with_capacity(count);
        for (i, n) in tree.nodes.into_iter().enumerate() {
            nodes.push(match n {
                NodeDoc::Split { feat, thr, left, right } => {
                    // Children always follow their parent, which rules out cycles.
                    if feat >= width || left <= i || right <= i || left >= count || right >= count {
                        return Err(ModelFileError::Invalid(format!("tree {t} node {i} is out of range")));
                    }
                    Node::Split { feat, thr, left, right }
                }
                NodeDoc::Leaf { leaf } => {
                    if !(0.0..=1.0).contains(&leaf) {
                        return Err(ModelFileError::Invalid(format!("tree {t} leaf {i} outside [0, 1]")));
                    }
                    Node::Leaf(leaf)
                }
            });
        }
        trees.push(Tree { nodes });
    }
    let h = doc.hyperparams;
    Ok(ForestModel {
        trees,
        standardizer: Standardizer { mean: doc.standardizer.mean, std: doc.standardizer.std },
        hyperparams: Hyperparams {
            n_trees: h.n_trees,
            max_depth: h.max_depth,
            min_leaf: h.min_leaf,
            features_per_split: h.features_per_split,
            vote_threshold: h.vote_threshold,
        },
        seed: doc.seed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsReport {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl MetricsReport {
    pub fn new(c: ConfusionCounts, m: Metrics) -> Self {
        MetricsReport { tp: c.tp, fp: c.fp, tn: c.tn, fn_: c.fn_, precision: m.precision, recall: m.recall, f1: m.f1 }
    }

    pub fn counts(&self) -> ConfusionCounts {
        ConfusionCounts { tp: self.tp, fp: self.fp, tn: self.tn, fn_: self.fn_ }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("metrics serialize");
        s.push('\n');
        s
    }
}
