//! `.truth.jsonl`: which ring member is the real spend, one ring per line.

use std::io::{self, BufRead, Write};

use artforge_core::chain::TxId;
use artforge_core::synth::TruthEntry;
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    tx_id: String,
    ring: u32,
    true_member_pos: u32,
}

pub fn write_truth<'a>(entries: impl IntoIterator<Item = &'a TruthEntry>, mut w: impl Write) -> io::Result<()> {
    for e in entries {
        let line = Line { tx_id: e.tx_id.to_string(), ring: e.ring, true_member_pos: e.true_member_pos };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_truth(reader: impl BufRead) -> io::Result<Vec<TruthEntry>> {
    reader
        .lines()
        .enumerate()
        .map(|(i, line)| {
            let l: Line = serde_json::from_str(&line?)
                .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, format!("truth line {}: {e}", i + 1)))?;
            Ok(TruthEntry { tx_id: TxId::new(l.tx_id), ring: l.ring, true_member_pos: l.true_member_pos })
        })
        .collect()
}
