//! `.chain.jsonl` snapshot format: one transaction per line, in stream order.
//!
//! Canonical form is compact JSON with keys in the order
//! `tx_id, height, timestamp, fee, rings, outputs`.

use std::io::{self, BufRead, Write};

use artforge_core::chain::{ChainError, ChainStore, OutputRef, Ring, TxId, TxRecord};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("line {line}: malformed record: {msg}")]
    Malformed { line: usize, msg: String },
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line<'a> {
    #[serde(borrow)]
    tx_id: std::borrow::Cow<'a, str>,
    height: u64,
    timestamp: u64,
    fee: u64,
    rings: Vec<Vec<u64>>,
    outputs: Vec<u64>,
}

fn to_line(tx: &TxRecord) -> Line<'_> {
    Line {
        tx_id: tx.tx_id.as_str().into(),
        height: tx.height,
        timestamp: tx.timestamp,
        fee: tx.fee,
        rings: tx.rings.iter().map(|r| r.members.iter().map(|m| m.0).collect()).collect(),
        outputs: tx.outputs.iter().map(|o| o.0).collect(),
    }
}

/// Parses one snapshot line (without its newline).
pub fn parse_record(text: &str, line: usize) -> Result<TxRecord, SnapshotError> {
    let l: Line = serde_json::from_str(text).map_err(|e| SnapshotError::Malformed { line, msg: e.to_string() })?;
    Ok(TxRecord {
        tx_id: TxId::new(l.tx_id.into_owned()),
        height: l.height,
        timestamp: l.timestamp,
        fee: l.fee,
        rings: l
            .rings
            .into_iter()
            .map(|r| Ring::new(r.into_iter().map(OutputRef).collect()))
            .collect(),
        outputs: l.outputs.into_iter().map(OutputRef).collect(),
    })
}

pub fn read_records(reader: impl BufRead) -> Result<Vec<TxRecord>, SnapshotError> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            return Err(SnapshotError::Malformed { line: i + 1, msg: "empty line".into() });
        }
        records.push(parse_record(&line, i + 1)?);
    }
    Ok(records)
}

/// Reads and validates a whole snapshot; any violation rejects the stream.
pub fn parse_snapshot(reader: impl BufRead) -> Result<ChainStore, SnapshotError> {
    Ok(ChainStore::from_records(read_records(reader)?)?)
}

pub fn write_records<'a>(records: impl IntoIterator<Item = &'a TxRecord>, mut w: impl Write) -> io::Result<()> {
    for tx in records {
        serde_json::to_writer(&mut w, &to_line(tx))?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn to_canonical_string(records: &[TxRecord]) -> String {
    let mut buf = Vec::new();
    write_records(records, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
