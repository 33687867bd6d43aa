//! n-hop ART-graph around a seed transaction.
//!
//! Expansion only runs in the output direction: outputs of depth-`d`
//! transactions lead, through every ring that lists them, to the owning
//! transactions at depth `d + 1`. Each transaction keeps the smallest depth
//! at which it is reached. The seed's own input rings (and their members) are
//! retained at depth 0 but never expanded backwards.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::chain::{ChainStore, OutputRef, RingSlot, TxHandle, TxId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown seed transaction {0}")]
    UnknownSeed(String),
    #[error("n_hops must be at least 1")]
    ZeroHops,
    #[error("hop {hop} out of range 0..={n_hops}")]
    HopOutOfRange { hop: u32, n_hops: u32 },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExpandOptions {
    /// Also attach every other input ring of reached transactions (and their
    /// members) as nodes. Adds no transaction nodes.
    pub sibling_rings: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    /// tx -> address
    Produces,
    /// address -> ring
    MemberOf,
    /// ring -> tx
    InputOf,
}

impl EdgeKind {
    pub fn tag(self) -> &'static str {
        match self {
            EdgeKind::Produces => "PROD",
            EdgeKind::MemberOf => "MEMB",
            EdgeKind::InputOf => "INPT",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "PROD" => Some(EdgeKind::Produces),
            "MEMB" => Some(EdgeKind::MemberOf),
            "INPT" => Some(EdgeKind::InputOf),
            _ => None,
        }
    }
}

/// Ring node: owning transaction and ring position.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RingNode {
    pub tx: TxId,
    pub pos: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Edge {
    Produces { tx: TxId, address: OutputRef },
    MemberOf { address: OutputRef, ring: RingNode },
    InputOf { ring: RingNode, tx: TxId },
}

impl Edge {
    pub fn kind(&self) -> EdgeKind {
        match self {
            Edge::Produces { .. } => EdgeKind::Produces,
            Edge::MemberOf { .. } => EdgeKind::MemberOf,
            Edge::InputOf { .. } => EdgeKind::InputOf,
        }
    }
}

/// Tripartite transaction/ring/address graph. Node and edge lists are kept in
/// canonical order: transactions and rings by (height, tx_id, position),
/// addresses by global index, edges grouped PROD, MEMB, INPT.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArtGraph {
    seed: TxId,
    n_hops: u32,
    txs: Vec<(TxId, u32)>,
    depth: BTreeMap<TxId, u32>,
    rings: Vec<RingNode>,
    addresses: Vec<OutputRef>,
    edges: Vec<Edge>,
}

impl ArtGraph {
    pub fn build(store: &ChainStore, seed: &str, n_hops: u32) -> Result<Self, GraphError> {
        Self::build_with(store, seed, n_hops, ExpandOptions::default())
    }

    pub fn build_with(
        store: &ChainStore,
        seed: &str,
        n_hops: u32,
        opts: ExpandOptions,
    ) -> Result<Self, GraphError> {
        if n_hops == 0 {
            return Err(GraphError::ZeroHops);
        }
        let seed_h = store
            .handle(seed)
            .ok_or_else(|| GraphError::UnknownSeed(String::from(seed)))?;

        let mut depth: BTreeMap<TxHandle, u32> = BTreeMap::new();
        let mut rings: BTreeSet<(u32, u32, TxHandle)> = BTreeSet::new();
        let mut addresses: BTreeSet<OutputRef> = BTreeSet::new();
        depth.insert(seed_h, 0);

        let seed_tx = store.get(seed_h);
        for (r, ring) in seed_tx.rings.iter().enumerate() {
            rings.insert((store.rank(seed_h), r as u32, seed_h));
            addresses.extend(ring.members.iter().copied());
        }

        let mut frontier = alloc::vec![seed_h];
        for d in 0..n_hops {
            let mut next = Vec::new();
            for &h in &frontier {
                for &out in &store.get(h).outputs {
                    addresses.insert(out);
                    let slots = store
                        .rings_referencing(out)
                        .expect("outputs of stored transactions are indexed");
                    for &RingSlot { tx, ring } in slots {
                        rings.insert((store.rank(tx), ring, tx));
                        if let alloc::collections::btree_map::Entry::Vacant(e) = depth.entry(tx) {
                            e.insert(d + 1);
                            next.push(tx);
                        }
                    }
                }
            }
            frontier = next;
        }

        if opts.sibling_rings {
            for (&h, _) in depth.iter().filter(|(&h, _)| h != seed_h) {
                for (r, ring) in store.get(h).rings.iter().enumerate() {
                    rings.insert((store.rank(h), r as u32, h));
                    addresses.extend(ring.members.iter().copied());
                }
            }
        }

        let mut txs: Vec<(TxHandle, u32)> = depth.iter().map(|(&h, &d)| (h, d)).collect();
        txs.sort_by_key(|&(h, _)| store.rank(h));

        let mut edges = Vec::new();
        for &(h, _) in &txs {
            let tx = store.get(h);
            for &out in &tx.outputs {
                if addresses.contains(&out) {
                    edges.push(Edge::Produces { tx: tx.tx_id.clone(), address: out });
                }
            }
        }
        let ring_nodes: Vec<(TxHandle, u32)> = rings.iter().map(|&(_, r, h)| (h, r)).collect();
        for &(h, r) in &ring_nodes {
            let node = RingNode { tx: store.get(h).tx_id.clone(), pos: r };
            for &m in &store.get(h).rings[r as usize].members {
                if addresses.contains(&m) {
                    edges.push(Edge::MemberOf { address: m, ring: node.clone() });
                }
            }
        }
        for &(h, r) in &ring_nodes {
            let id = store.get(h).tx_id.clone();
            edges.push(Edge::InputOf { ring: RingNode { tx: id.clone(), pos: r }, tx: id });
        }

        let txs: Vec<(TxId, u32)> = txs.into_iter().map(|(h, d)| (store.get(h).tx_id.clone(), d)).collect();
        Ok(ArtGraph {
            seed: seed_tx.tx_id.clone(),
            n_hops,
            depth: txs.iter().cloned().collect(),
            txs,
            rings: ring_nodes
                .into_iter()
                .map(|(h, pos)| RingNode { tx: store.get(h).tx_id.clone(), pos })
                .collect(),
            addresses: addresses.into_iter().collect(),
            edges,
        })
    }

    /// Reassembles a graph from already-ordered parts, as read back from an
    /// export. Checks the structural invariants that do not need the chain.
    pub fn from_parts(
        seed: TxId,
        n_hops: u32,
        txs: Vec<(TxId, u32)>,
        rings: Vec<RingNode>,
        addresses: Vec<OutputRef>,
        edges: Vec<Edge>,
    ) -> Result<Self, &'static str> {
        if n_hops == 0 {
            return Err("n_hops must be at least 1");
        }
        let depth: BTreeMap<TxId, u32> = txs.iter().cloned().collect();
        if depth.len() != txs.len() {
            return Err("duplicate transaction node");
        }
        if depth.get(&seed) != Some(&0) {
            return Err("seed missing or not at depth 0");
        }
        if txs.iter().any(|(id, d)| *d > n_hops || (*d == 0 && *id != seed)) {
            return Err("transaction depth out of range");
        }
        let ring_set: BTreeSet<&RingNode> = rings.iter().collect();
        let addr_set: BTreeSet<&OutputRef> = addresses.iter().collect();
        if rings.iter().any(|r| !depth.contains_key(&r.tx)) {
            return Err("ring owned by a transaction outside the graph");
        }
        for e in &edges {
            let ok = match e {
                Edge::Produces { tx, address } => depth.contains_key(tx) && addr_set.contains(address),
                Edge::MemberOf { address, ring } => addr_set.contains(address) && ring_set.contains(ring),
                Edge::InputOf { ring, tx } => ring_set.contains(ring) && depth.contains_key(tx),
            };
            if !ok {
                return Err("edge endpoint missing");
            }
        }
        Ok(ArtGraph { seed, n_hops, txs, depth, rings, addresses, edges })
    }

    pub fn seed(&self) -> &TxId {
        &self.seed
    }

    pub fn n_hops(&self) -> u32 {
        self.n_hops
    }

    /// Transaction nodes with their depth, in canonical order.
    pub fn tx_nodes(&self) -> &[(TxId, u32)] {
        &self.txs
    }

    pub fn depth(&self, tx_id: &str) -> Option<u32> {
        self.depth.get(tx_id).copied()
    }

    pub fn ring_nodes(&self) -> &[RingNode] {
        &self.rings
    }

    pub fn address_nodes(&self) -> &[OutputRef] {
        &self.addresses
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Transactions at exactly depth `hop`, in canonical order.
    pub fn hop_transactions(&self, hop: u32) -> Result<Vec<&TxId>, GraphError> {
        if hop > self.n_hops {
            return Err(GraphError::HopOutOfRange { hop, n_hops: self.n_hops });
        }
        Ok(self.txs.iter().filter(|(_, d)| *d == hop).map(|(id, _)| id).collect())
    }
}
