#![allow(dead_code)]

pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};

use artforge_core::graph::{ArtGraph, Edge};
use artforge_core::synth::{generate_chain, GenConfig, SynthChain};

/// Background chain of `n` transactions with a short time scale so that hop
/// sets are well populated.
pub fn chain(seed: u64, n: usize) -> SynthChain {
    generate_chain(&GenConfig {
        n_background_txs: n,
        tx_interval: 600.0,
        decoy_recency_scale: 6.0 * 3600.0,
        rng_seed: seed,
        ..GenConfig::default()
    })
    .expect("generation succeeds")
}

pub fn as_oracle(g: &ArtGraph) -> oracle::OracleGraph {
    let depths: BTreeMap<String, u32> = g.tx_nodes().iter().map(|(id, d)| (id.to_string(), *d)).collect();
    let rings: BTreeSet<(String, u32)> = g.ring_nodes().iter().map(|r| (r.tx.to_string(), r.pos)).collect();
    let addresses: BTreeSet<u64> = g.address_nodes().iter().map(|a| a.0).collect();
    let edges = g
        .edges()
        .iter()
        .map(|e| match e {
            Edge::Produces { tx, address } => ("PROD", tx.to_string(), address.0.to_string()),
            Edge::MemberOf { address, ring } => ("MEMB", address.0.to_string(), format!("{}:{}", ring.tx, ring.pos)),
            Edge::InputOf { ring, tx } => ("INPT", format!("{}:{}", ring.tx, ring.pos), tx.to_string()),
        })
        .collect();
    oracle::OracleGraph { depths, rings, addresses, edges }
}
