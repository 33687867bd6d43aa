//! Random forest of Gini-split binary trees.
//!
//! Tree `i` of a forest seeded with `s` draws all of its randomness from
//! ChaCha stream `(s, i)`, so trees can be grown in any order or in parallel
//! and still come out bit-identical.

use alloc::vec::Vec;

use rand::Rng;

use super::{smote, Dataset, MlError, Standardizer};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hyperparams {
    pub n_trees: usize,
    /// `None` grows until pure or `min_leaf` stops it.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    /// `None` means `ceil(sqrt(width))`.
    pub features_per_split: Option<usize>,
    pub vote_threshold: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            features_per_split: None,
            vote_threshold: 0.5,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<(), MlError> {
        if self.n_trees == 0 {
            return Err(MlError::Hyperparam("n_trees must be positive"));
        }
        if self.min_leaf == 0 {
            return Err(MlError::Hyperparam("min_leaf must be positive"));
        }
        if self.features_per_split == Some(0) {
            return Err(MlError::Hyperparam("features_per_split must be positive"));
        }
        if self.vote_threshold.is_nan() {
            return Err(MlError::Hyperparam("vote_threshold is NaN"));
        }
        Ok(())
    }

    pub fn split_features(&self, width: usize) -> usize {
        self.features_per_split
            .unwrap_or_else(|| libm::ceil(libm::sqrt(width as f64)) as usize)
            .clamp(1, width.max(1))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    /// Rows with `x[feat] <= thr` go left.
    Split { feat: usize, thr: f64, left: usize, right: usize },
    /// Fraction of positive training rows that reached this leaf.
    Leaf(f64),
}

/// Flat tree; node 0 is the root.
#[derive(Clone, Debug, PartialEq)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn score(&self, row: &[f64]) -> f64 {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf(p) => return p,
                Node::Split { feat, thr, left, right } => {
                    at = if row[feat] <= thr { left } else { right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

struct Grower<'a> {
    rows: &'a [Vec<f64>],
    labels: &'a [u8],
    hp: &'a Hyperparams,
    n_features: usize,
    rng: rng::DetRng,
    nodes: Vec<Node>,
}

struct BestSplit {
    feat: usize,
    thr: f64,
    gain: f64,
}

fn gini(pos: usize, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let p = pos as f64 / n as f64;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

const MIN_GAIN: f64 = 1e-12;

impl Grower<'_> {
    fn grow(&mut self, sample: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf(0.0));
        let n = sample.len();
        let pos = sample.iter().filter(|&&i| self.labels[i] == 1).count();
        let leaf = Node::Leaf(pos as f64 / n as f64);

        let depth_capped = self.hp.max_depth.is_some_and(|d| depth >= d);
        if pos == 0 || pos == n || depth_capped || n < 2 * self.hp.min_leaf {
            self.nodes[id] = leaf;
            return id;
        }
        let Some(best) = self.best_split(sample, pos) else {
            self.nodes[id] = leaf;
            return id;
        };

        // Partition in place: rows going left first.
        let mut cut = 0;
        for k in 0..n {
            if self.rows[sample[k]][best.feat] <= best.thr {
                sample.swap(cut, k);
                cut += 1;
            }
        }
        let (l, r) = sample.split_at_mut(cut);
        let left = self.grow(l, depth + 1);
        let right = self.grow(r, depth + 1);
        self.nodes[id] = Node::Split { feat: best.feat, thr: best.thr, left, right };
        id
    }

    fn best_split(&mut self, sample: &[usize], pos: usize) -> Option<BestSplit> {
        let width = self.rows[sample[0]].len();
        let mut feats: Vec<usize> = (0..width).collect();
        for i in 0..self.n_features {
            let j = self.rng.random_range(i..width);
            feats.swap(i, j);
        }
        feats.truncate(self.n_features);
        feats.sort_unstable();

        let n = sample.len();
        let parent = gini(pos, n);
        let min_leaf = self.hp.min_leaf;
        let mut best: Option<BestSplit> = None;
        let mut column: Vec<(f64, u8)> = Vec::with_capacity(n);
        for &f in &feats {
            column.clear();
            column.extend(sample.iter().map(|&i| (self.rows[i][f], self.labels[i])));
            column.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut left_pos = 0;
            for i in 1..n {
                left_pos += usize::from(column[i - 1].1);
                let (lo, hi) = (column[i - 1].0, column[i].0);
                if lo == hi || i < min_leaf || n - i < min_leaf {
                    continue;
                }
                let weighted = (i as f64 * gini(left_pos, i) + (n - i) as f64 * gini(pos - left_pos, n - i)) / n as f64;
                let gain = parent - weighted;
                if gain > best.as_ref().map_or(MIN_GAIN, |b| b.gain) {
                    let mut thr = lo + (hi - lo) / 2.0;
                    if thr >= hi {
                        thr = lo;
                    }
                    best = Some(BestSplit { feat: f, thr, gain });
                }
            }
        }
        best
    }
}

/// Grows tree `index` of the forest seeded with `seed` on a bootstrap sample
/// of `data`. Rows are expected to be standardized already.
pub fn train_tree(data: &Dataset, hp: &Hyperparams, seed: u64, index: usize) -> Tree {
    let mut rng = rng::stream(seed, index as u64);
    let n = data.len();
    let mut sample: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
    let mut g = Grower {
        rows: &data.rows,
        labels: &data.labels,
        hp,
        n_features: hp.split_features(data.width()),
        rng,
        nodes: Vec::new(),
    };
    g.grow(&mut sample, 0);
    Tree { nodes: g.nodes }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub standardizer: Standardizer,
    pub hyperparams: Hyperparams,
    pub seed: u64,
}

impl ForestModel {
    /// Checks that `data` is trainable and returns its width.
    pub fn check_trainable(data: &Dataset, hp: &Hyperparams) -> Result<usize, MlError> {
        data.validate()?;
        hp.validate()?;
        if data.is_empty() {
            return Err(MlError::Empty);
        }
        if data.count(1) == 0 || data.count(0) == 0 {
            return Err(MlError::SingleClass);
        }
        Ok(data.width())
    }

    /// Sequential training on standardized rows; `standardizer` is stored so
    /// that [`ForestModel::predict`] can take raw rows.
    pub fn train(data: &Dataset, standardizer: Standardizer, hp: Hyperparams, seed: u64) -> Result<Self, MlError> {
        let width = Self::check_trainable(data, &hp)?;
        if standardizer.width() != width {
            return Err(MlError::WidthMismatch { got: width, expected: standardizer.width() });
        }
        let trees = (0..hp.n_trees).map(|i| train_tree(data, &hp, seed, i)).collect();
        Ok(ForestModel { trees, standardizer, hyperparams: hp, seed })
    }

    pub fn width(&self) -> usize {
        self.standardizer.width()
    }

    /// Mean positive-leaf fraction over trees for an already standardized row.
    pub fn score_standardized(&self, row: &[f64]) -> f64 {
        self.trees.iter().map(|t| t.score(row)).sum::<f64>() / self.trees.len() as f64
    }

    /// `(label, score)` for a raw feature row.
    pub fn predict(&self, row: &[f64]) -> Result<(u8, f64), MlError> {
        if row.len() != self.width() {
            return Err(MlError::WidthMismatch { got: row.len(), expected: self.width() });
        }
        let score = self.score_standardized(&self.standardizer.transform_row(row));
        Ok((u8::from(score >= self.hyperparams.vote_threshold), score))
    }
}

/// Standardizes `train`, oversamples the minority class with SMOTE up to
/// parity and returns the balanced, standardized dataset with its scaler.
/// Synthetic rows get empty ids.
pub fn balance(train: &Dataset, smote_k: usize, seed: u64) -> Result<(Dataset, Standardizer), MlError> {
    train.validate()?;
    let (n0, n1) = (train.count(0), train.count(1));
    if n0 == 0 || n1 == 0 {
        return Err(MlError::SingleClass);
    }
    let standardizer = Standardizer::fit(&train.rows);
    let mut balanced = Dataset {
        rows: standardizer.transform(&train.rows),
        labels: train.labels.clone(),
        ids: train.ids.clone(),
    };
    let minority = u8::from(n1 < n0);
    let deficit = n0.abs_diff(n1);
    if deficit > 0 {
        let rows: Vec<Vec<f64>> = balanced
            .rows
            .iter()
            .zip(&balanced.labels)
            .filter(|(_, &l)| l == minority)
            .map(|(r, _)| r.clone())
            .collect();
        let k = smote_k.min(rows.len().saturating_sub(1));
        for row in smote(&rows, k, deficit, seed)? {
            balanced.push(row, minority, alloc::string::String::new());
        }
    }
    Ok((balanced, standardizer))
}
