//! `run-manifest.json`: per-command provenance (config hash, seeds, file
//! hashes). Entries are keyed by command and overwritten on rerun; nothing
//! time-dependent is recorded, so identical runs leave identical manifests.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::file_name;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub config_sha256: String,
    pub master_seed: u64,
    pub stage_seeds: BTreeMap<String, u64>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

pub type Manifest = BTreeMap<String, RunEntry>;

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn digest_file(path: &Path) -> io::Result<FileDigest> {
    Ok(FileDigest { file: file_name(path), sha256: sha256_hex(&fs::read(path)?) })
}

/// Replaces the entry for `command` in the manifest at `path`, keeping the
/// others. An unreadable existing manifest is replaced.
pub fn record(path: &Path, command: &str, entry: RunEntry) -> io::Result<()> {
    let mut m: Manifest = fs::read_to_string(path)
        .ok()
        .and_then(|t| serde_json::from_str(&t).ok())
        .unwrap_or_default();
    m.insert(command.to_string(), entry);
    let mut text = serde_json::to_string_pretty(&m).expect("manifest serializes");
    text.push('\n');
    fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn entries_merge_by_command() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("run-manifest.json");
        let e = |s| RunEntry { master_seed: s, ..Default::default() };
        record(&p, "synth", e(1)).unwrap();
        record(&p, "train", e(2)).unwrap();
        record(&p, "synth", e(3)).unwrap();
        let m: Manifest = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m["synth"].master_seed, 3);
        assert_eq!(m["train"].master_seed, 2);
    }
}
