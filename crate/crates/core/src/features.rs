//! Fixed-schema feature vectors for a seed transaction.
//!
//! Layout for `n` hops, with every statistic block ordered
//! `mean, std, min, max, median`:
//!
//! | block | width | contents |
//! |-------|-------|----------|
//! | 0-hop | 10 | `n_rings`, `ring_size_mean`, `n_outputs`, `fee`, `unique_ring_members`, dt0 stats |
//! | hop i | 16 | `hop_tx_count`, rings-per-tx stats, pooled ring-size stats, dt stats |
//!
//! dt0 is `ts(seed) - ts(producer(member))` for every ring member occurrence;
//! hop dt is `ts(hop tx) - ts(seed)`. Empty sets produce the `-1.0` sentinel in
//! every statistic.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::chain::{ChainStore, TxRecord};
use crate::graph::{ArtGraph, ExpandOptions, GraphError};

/// Value used for every statistic of an empty set.
pub const SENTINEL: f64 = -1.0;

pub const ZERO_HOP_WIDTH: usize = 10;
pub const STAT_NAMES: [&str; 5] = ["mean", "std", "min", "max", "median"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StatSummary {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
    pub median: f64,
}

impl StatSummary {
    pub const EMPTY: StatSummary = StatSummary {
        min: SENTINEL,
        max: SENTINEL,
        mean: SENTINEL,
        std: SENTINEL,
        median: SENTINEL,
    };

    /// Summary with population standard deviation; midpoint median for even
    /// counts; [`StatSummary::EMPTY`] for no values.
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return Self::EMPTY;
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mean = sorted.iter().sum::<f64>() / n as f64;
        let var = sorted.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        StatSummary {
            min: sorted[0],
            max: sorted[n - 1],
            mean,
            std: libm::sqrt(var),
            median,
        }
    }

    /// The summary in schema order.
    pub fn to_array(&self) -> [f64; 5] {
        [self.mean, self.std, self.min, self.max, self.median]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureOptions {
    /// Emit the per-hop transaction count in front of each hop block.
    pub hop_tx_count: bool,
    pub expand: ExpandOptions,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        FeatureOptions { hop_tx_count: true, expand: ExpandOptions::default() }
    }
}

impl FeatureOptions {
    pub fn hop_width(&self) -> usize {
        if self.hop_tx_count {
            16
        } else {
            15
        }
    }

    pub fn width(&self, n_hops: u32) -> usize {
        ZERO_HOP_WIDTH + self.hop_width() * n_hops as usize
    }

    /// Human-readable name of every column, in order.
    pub fn schema(&self, n_hops: u32) -> Vec<String> {
        let mut names: Vec<String> = [
            "n_rings",
            "ring_size_mean",
            "n_outputs",
            "fee",
            "unique_ring_members",
        ]
        .iter()
        .map(|s| String::from(*s))
        .collect();
        names.extend(STAT_NAMES.iter().map(|s| format!("dt0_{s}")));
        for hop in 1..=n_hops {
            if self.hop_tx_count {
                names.push(format!("hop{hop}_tx_count"));
            }
            for block in ["rings_per_tx", "ring_size", "dt"] {
                names.extend(STAT_NAMES.iter().map(|s| format!("hop{hop}_{block}_{s}")));
            }
        }
        names
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub seed: String,
    pub n_hops: u32,
    pub values: Vec<f64>,
}

/// The 10-value 0-hop block, computed from the seed record alone (plus the
/// timestamps of the transactions that produced its ring members).
pub fn zero_hop_features(store: &ChainStore, seed: &str) -> Result<[f64; ZERO_HOP_WIDTH], GraphError> {
    let tx = store.tx(seed).ok_or_else(|| GraphError::UnknownSeed(String::from(seed)))?;
    Ok(zero_hop_block(store, tx))
}

fn zero_hop_block(store: &ChainStore, tx: &TxRecord) -> [f64; ZERO_HOP_WIDTH] {
    let n_rings = tx.rings.len();
    let ring_size_mean = if n_rings == 0 {
        SENTINEL
    } else {
        tx.rings.iter().map(|r| r.len() as f64).sum::<f64>() / n_rings as f64
    };
    let mut unique = BTreeSet::new();
    let mut dt = Vec::new();
    for ring in &tx.rings {
        for &m in &ring.members {
            unique.insert(m);
            let (_, ts) = store.producing_tx(m).expect("ring members are indexed");
            dt.push(tx.timestamp as f64 - ts as f64);
        }
    }
    let s = StatSummary::of(&dt).to_array();
    [
        n_rings as f64,
        ring_size_mean,
        tx.outputs.len() as f64,
        tx.fee as f64,
        unique.len() as f64,
        s[0],
        s[1],
        s[2],
        s[3],
        s[4],
    ]
}

/// Features from an already-built graph.
pub fn features_from_graph(store: &ChainStore, graph: &ArtGraph, opts: FeatureOptions) -> FeatureVector {
    let seed = store.tx(graph.seed().as_str()).expect("graph seed belongs to the store");
    let mut values = Vec::with_capacity(opts.width(graph.n_hops()));
    values.extend_from_slice(&zero_hop_block(store, seed));

    for hop in 1..=graph.n_hops() {
        let members = graph.hop_transactions(hop).expect("hop within range");
        let mut rings_per_tx = Vec::with_capacity(members.len());
        let mut ring_sizes = Vec::new();
        let mut dt = Vec::with_capacity(members.len());
        for id in &members {
            let tx = store.tx(id.as_str()).expect("graph nodes belong to the store");
            rings_per_tx.push(tx.rings.len() as f64);
            ring_sizes.extend(tx.rings.iter().map(|r| r.len() as f64));
            dt.push(tx.timestamp as f64 - seed.timestamp as f64);
        }
        if opts.hop_tx_count {
            values.push(members.len() as f64);
        }
        values.extend(StatSummary::of(&rings_per_tx).to_array());
        values.extend(StatSummary::of(&ring_sizes).to_array());
        values.extend(StatSummary::of(&dt).to_array());
    }

    FeatureVector { seed: String::from(seed.tx_id.as_str()), n_hops: graph.n_hops(), values }
}

pub fn extract_features(store: &ChainStore, seed: &str, n_hops: u32) -> Result<FeatureVector, GraphError> {
    extract_features_with(store, seed, n_hops, FeatureOptions::default())
}

pub fn extract_features_with(
    store: &ChainStore,
    seed: &str,
    n_hops: u32,
    opts: FeatureOptions,
) -> Result<FeatureVector, GraphError> {
    let graph = ArtGraph::build_with(store, seed, n_hops, opts.expand)?;
    Ok(features_from_graph(store, &graph, opts))
}
