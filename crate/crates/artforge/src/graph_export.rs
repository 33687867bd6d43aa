//! Line-oriented edge-list export of an ART-graph, and its inverse.
//!
//! ```text
//! # art-graph seed=<tx_id> hops=<n>
//! T <tx_id> <depth>
//! A <global_index>
//! R <tx_id> <ring_pos>
//! E <PROD|MEMB|INPT> <src> <dst>
//! ```
//! Ring endpoints in `E` lines are written `<tx_id>:<ring_pos>`.

use std::io::{self, BufRead, Write};

use artforge_core::graph::{ArtGraph, Edge, EdgeKind, RingNode};
use artforge_core::{OutputRef, TxId};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphIoError {
    #[error("graph line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("tx id {0:?} cannot be written as an edge-list token")]
    UnwritableId(String),
    #[error("invalid graph: {0}")]
    Invalid(&'static str),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn check_id(id: &TxId) -> Result<(), GraphIoError> {
    let s = id.as_str();
    if s.is_empty() || s.chars().any(char::is_whitespace) {
        return Err(GraphIoError::UnwritableId(s.to_string()));
    }
    Ok(())
}

fn ring_token(r: &RingNode) -> String {
    format!("{}:{}", r.tx, r.pos)
}

pub fn export_graph(g: &ArtGraph, mut w: impl Write) -> Result<(), GraphIoError> {
    check_id(g.seed())?;
    for (id, _) in g.tx_nodes() {
        check_id(id)?;
    }
    writeln!(w, "# art-graph seed={} hops={}", g.seed(), g.n_hops())?;
    for (id, d) in g.tx_nodes() {
        writeln!(w, "T {id} {d}")?;
    }
    for a in g.address_nodes() {
        writeln!(w, "A {}", a.0)?;
    }
    for r in g.ring_nodes() {
        writeln!(w, "R {} {}", r.tx, r.pos)?;
    }
    for e in g.edges() {
        let tag = e.kind().tag();
        match e {
            Edge::Produces { tx, address } => writeln!(w, "E {tag} {tx} {}", address.0)?,
            Edge::MemberOf { address, ring } => writeln!(w, "E {tag} {} {}", address.0, ring_token(ring))?,
            Edge::InputOf { ring, tx } => writeln!(w, "E {tag} {} {tx}", ring_token(ring))?,
        }
    }
    Ok(())
}

pub fn export_to_string(g: &ArtGraph) -> Result<String, GraphIoError> {
    let mut buf = Vec::new();
    export_graph(g, &mut buf)?;
    Ok(String::from_utf8(buf).expect("export writes UTF-8"))
}

pub fn import_graph(reader: impl BufRead) -> Result<ArtGraph, GraphIoError> {
    let mut lines = reader.lines();
    let bad = |line: usize, msg: &str| GraphIoError::Malformed { line, msg: msg.to_string() };
    let header = lines.next().transpose()?.ok_or_else(|| bad(1, "missing header"))?;
    let rest = header.strip_prefix("# art-graph seed=").ok_or_else(|| bad(1, "bad header"))?;
    let (seed, hops) = rest.rsplit_once(" hops=").ok_or_else(|| bad(1, "bad header"))?;
    let n_hops: u32 = hops.parse().map_err(|_| bad(1, "bad hop count"))?;
    let seed = TxId::new(seed);

    let (mut txs, mut addresses, mut rings, mut edges) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (i, line) in lines.enumerate() {
        let line = line?;
        let n = i + 2;
        let f: Vec<&str> = line.split(' ').collect();
        let num = |s: &str| s.parse::<u64>().map_err(|_| bad(n, "expected an unsigned integer"));
        let pos = |s: &str| s.parse::<u32>().map_err(|_| bad(n, "expected a ring position"));
        let ring = |s: &str| -> Result<RingNode, GraphIoError> {
            let (tx, p) = s.rsplit_once(':').ok_or_else(|| bad(n, "ring token must be tx:pos"))?;
            Ok(RingNode { tx: TxId::new(tx), pos: pos(p)? })
        };
        match f.as_slice() {
            ["T", id, d] => txs.push((TxId::new(*id), pos(d)?)),
            ["A", g] => addresses.push(OutputRef(num(g)?)),
            ["R", id, p] => rings.push(RingNode { tx: TxId::new(*id), pos: pos(p)? }),
            ["E", kind, src, dst] => {
                let kind = EdgeKind::from_tag(kind).ok_or_else(|| bad(n, "unknown edge kind"))?;
                edges.push(match kind {
                    EdgeKind::Produces => Edge::Produces { tx: TxId::new(*src), address: OutputRef(num(dst)?) },
                    EdgeKind::MemberOf => Edge::MemberOf { address: OutputRef(num(src)?), ring: ring(dst)? },
                    EdgeKind::InputOf => Edge::InputOf { ring: ring(src)?, tx: TxId::new(*dst) },
                });
            }
            _ => return Err(bad(n, "unrecognised line")),
        }
    }
    ArtGraph::from_parts(seed, n_hops, txs, rings, addresses, edges).map_err(GraphIoError::Invalid)
}
