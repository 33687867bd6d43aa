//! Immutable, fully indexed ledger snapshot.
//!
//! Outputs are identified only by their chain-wide global index. A
//! [`ChainStore`] is built from records in stream order and rejects the whole
//! input on the first invariant violation.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::borrow::Borrow;
use core::fmt;

use thiserror::Error;

/// Opaque transaction identifier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TxId(String);

impl TxId {
    pub fn new(id: impl Into<String>) -> Self {
        TxId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for TxId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TxId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TxId {
    fn from(s: &str) -> Self {
        TxId(String::from(s))
    }
}

/// Position of an output in the chain-wide output ordering.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OutputRef(pub u64);

impl fmt::Display for OutputRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One transaction input: the true spend hidden among decoys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ring {
    pub members: Vec<OutputRef>,
}

impl Ring {
    pub fn new(members: Vec<OutputRef>) -> Self {
        Ring { members }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TxRecord {
    pub tx_id: TxId,
    pub height: u64,
    pub timestamp: u64,
    pub fee: u64,
    /// Empty for coinbase transactions.
    pub rings: Vec<Ring>,
    pub outputs: Vec<OutputRef>,
}

impl TxRecord {
    pub fn is_coinbase(&self) -> bool {
        self.rings.is_empty()
    }
}

/// Dense handle to a transaction inside one [`ChainStore`]; stream position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TxHandle(pub u32);

impl TxHandle {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// A ring identified by its owning transaction and position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RingSlot {
    pub tx: TxHandle,
    pub ring: u32,
}

/// Violations found while building a store. `line` is the 1-based position
/// of the offending record in the input stream.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChainError {
    #[error("line {line}: duplicate tx_id {tx_id}")]
    DuplicateTxId { line: usize, tx_id: String },
    #[error("line {line}: duplicate global_index {index}")]
    DuplicateOutput { line: usize, index: u64 },
    #[error("line {line}: transaction has no outputs")]
    NoOutputs { line: usize },
    #[error("line {line}: output indexes are not strictly increasing")]
    OutputsNotIncreasing { line: usize },
    #[error("line {line}: ring {ring} is empty")]
    EmptyRing { line: usize, ring: usize },
    #[error("line {line}: ring {ring} lists global_index {index} twice")]
    DuplicateRingMember { line: usize, ring: usize, index: u64 },
    #[error("line {line}: ring {ring} references unknown output {index}")]
    UnknownRingMember { line: usize, ring: usize, index: u64 },
    #[error("line {line}: ring {ring} references future output {index}")]
    FutureRingMember { line: usize, ring: usize, index: u64 },
    #[error("line {line}: height decreases")]
    NonMonotoneHeight { line: usize },
    #[error("line {line}: block timestamp decreases across heights")]
    NonMonotoneTimestamp { line: usize },
    #[error("unknown output {0}")]
    UnknownOutput(u64),
    #[error("unknown transaction {0}")]
    UnknownTx(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStore {
    records: Vec<TxRecord>,
    by_id: BTreeMap<TxId, TxHandle>,
    // Rank of each record under (height, tx_id).
    rank: Vec<u32>,
    producer: BTreeMap<OutputRef, (TxHandle, u32)>,
    referencing: BTreeMap<OutputRef, Vec<RingSlot>>,
    span: Option<(u64, u64)>,
}

impl ChainStore {
    /// Validates and indexes records given in stream order.
    pub fn from_records(records: Vec<TxRecord>) -> Result<Self, ChainError> {
        if records.len() > u32::MAX as usize {
            panic!("snapshot exceeds u32::MAX transactions");
        }

        let mut by_id = BTreeMap::new();
        let mut producer: BTreeMap<OutputRef, (TxHandle, u32)> = BTreeMap::new();

        // First pass: identities, outputs and block ordering.
        let mut prev: Option<(u64, u64)> = None;
        for (i, tx) in records.iter().enumerate() {
            let line = i + 1;
            let handle = TxHandle(i as u32);
            if by_id.insert(tx.tx_id.clone(), handle).is_some() {
                return Err(ChainError::DuplicateTxId {
                    line,
                    tx_id: String::from(tx.tx_id.as_str()),
                });
            }
            if tx.outputs.is_empty() {
                return Err(ChainError::NoOutputs { line });
            }
            if tx.outputs.windows(2).any(|w| w[0] >= w[1]) {
                return Err(ChainError::OutputsNotIncreasing { line });
            }
            for (pos, &out) in tx.outputs.iter().enumerate() {
                if producer.insert(out, (handle, pos as u32)).is_some() {
                    return Err(ChainError::DuplicateOutput { line, index: out.0 });
                }
            }
            if let Some((height, ts)) = prev {
                if tx.height < height {
                    return Err(ChainError::NonMonotoneHeight { line });
                }
                if tx.timestamp < ts {
                    return Err(ChainError::NonMonotoneTimestamp { line });
                }
            }
            prev = Some((tx.height, tx.timestamp));
        }

        // Second pass: rings only reach outputs produced earlier in the stream.
        let mut referencing: BTreeMap<OutputRef, Vec<RingSlot>> = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (i, tx) in records.iter().enumerate() {
            let line = i + 1;
            let own_min = tx.outputs[0];
            for (r, ring) in tx.rings.iter().enumerate() {
                if ring.is_empty() {
                    return Err(ChainError::EmptyRing { line, ring: r });
                }
                seen.clear();
                for &m in &ring.members {
                    if !seen.insert(m) {
                        return Err(ChainError::DuplicateRingMember { line, ring: r, index: m.0 });
                    }
                    let Some(&(producer_tx, _)) = producer.get(&m) else {
                        return Err(ChainError::UnknownRingMember { line, ring: r, index: m.0 });
                    };
                    if producer_tx.index() >= i || m >= own_min {
                        return Err(ChainError::FutureRingMember { line, ring: r, index: m.0 });
                    }
                    referencing.entry(m).or_default().push(RingSlot {
                        tx: TxHandle(i as u32),
                        ring: r as u32,
                    });
                }
            }
        }

        let mut order: Vec<usize> = (0..records.len()).collect();
        order.sort_by(|&a, &b| {
            (records[a].height, &records[a].tx_id).cmp(&(records[b].height, &records[b].tx_id))
        });
        let mut rank = alloc::vec![0u32; records.len()];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r as u32;
        }
        for slots in referencing.values_mut() {
            slots.sort_by_key(|s| (rank[s.tx.index()], s.ring));
        }

        let span = match (records.first(), records.last()) {
            (Some(a), Some(b)) => Some((a.timestamp, b.timestamp)),
            _ => None,
        };

        Ok(ChainStore {
            records,
            by_id,
            rank,
            producer,
            referencing,
            span,
        })
    }

    /// Records in stream order.
    pub fn records(&self) -> &[TxRecord] {
        &self.records
    }

    pub fn into_records(self) -> Vec<TxRecord> {
        self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `(min timestamp, max timestamp)`, or `None` for an empty store.
    pub fn span(&self) -> Option<(u64, u64)> {
        self.span
    }

    pub fn handle(&self, tx_id: &str) -> Option<TxHandle> {
        self.by_id.get(tx_id).copied()
    }

    pub fn get(&self, handle: TxHandle) -> &TxRecord {
        &self.records[handle.index()]
    }

    pub fn tx(&self, tx_id: &str) -> Option<&TxRecord> {
        self.handle(tx_id).map(|h| self.get(h))
    }

    /// Position of `handle` under the canonical (height, tx_id) ordering.
    pub fn rank(&self, handle: TxHandle) -> u32 {
        self.rank[handle.index()]
    }

    pub fn producer_of(&self, g: OutputRef) -> Result<(TxHandle, u32), ChainError> {
        self.producer.get(&g).copied().ok_or(ChainError::UnknownOutput(g.0))
    }

    /// The transaction that produced `g`, with its timestamp.
    pub fn producing_tx(&self, g: OutputRef) -> Result<(&TxId, u64), ChainError> {
        let (h, _) = self.producer_of(g)?;
        let tx = self.get(h);
        Ok((&tx.tx_id, tx.timestamp))
    }

    /// Every ring containing `g`, ordered by (height, tx_id, ring position).
    pub fn rings_referencing(&self, g: OutputRef) -> Result<&[RingSlot], ChainError> {
        if !self.producer.contains_key(&g) {
            return Err(ChainError::UnknownOutput(g.0));
        }
        Ok(self.referencing.get(&g).map(Vec::as_slice).unwrap_or(&[]))
    }

    pub fn ring(&self, slot: RingSlot) -> &Ring {
        &self.get(slot.tx).rings[slot.ring as usize]
    }

    /// All outputs in ascending global index order.
    pub fn outputs(&self) -> impl Iterator<Item = OutputRef> + '_ {
        self.producer.keys().copied()
    }
}
