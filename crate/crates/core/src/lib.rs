//! Core algorithms for Address-Ring-Transaction (ART) graph analysis of
//! ring-signature ledgers.
//!
//! The crate is `no_std` and only needs `alloc`. It covers the indexed ledger
//! ([`chain`]), synthetic chain generation with planted behaviour
//! ([`synth`]), n-hop graph expansion ([`graph`]), per-transaction feature
//! vectors ([`features`]) and a small learning stack ([`ml`]). Parsing,
//! file formats and the command line live in the `artforge` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod chain;
pub mod features;
pub mod graph;
pub mod ml;
pub mod rng;
pub mod synth;

pub use chain::{ChainError, ChainStore, OutputRef, Ring, RingSlot, TxHandle, TxId, TxRecord};
pub use features::{FeatureOptions, FeatureVector, StatSummary};
pub use graph::{ArtGraph, EdgeKind, ExpandOptions, GraphError};
