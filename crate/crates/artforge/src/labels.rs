//! `.labels.csv`: header `tx_id,label`, label 0 or 1.

use std::io::{self, BufRead, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabelsError {
    #[error("labels line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("labels line {line}: duplicate tx_id {tx_id}")]
    Duplicate { line: usize, tx_id: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub const HEADER: &str = "tx_id,label";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Label {
    pub tx_id: String,
    pub label: u8,
}

pub fn read_labels(reader: impl BufRead) -> Result<Vec<Label>, LabelsError> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        if i == 0 {
            if line.trim() != HEADER {
                return Err(LabelsError::Malformed { line: n, msg: format!("expected header `{HEADER}`") });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let (id, label) = line
            .split_once(',')
            .ok_or_else(|| LabelsError::Malformed { line: n, msg: "expected two columns".into() })?;
        let label = match label.trim() {
            "0" => 0,
            "1" => 1,
            other => return Err(LabelsError::Malformed { line: n, msg: format!("label `{other}` is not 0 or 1") }),
        };
        let tx_id = id.trim().to_string();
        if !seen.insert(tx_id.clone()) {
            return Err(LabelsError::Duplicate { line: n, tx_id });
        }
        out.push(Label { tx_id, label });
    }
    Ok(out)
}

pub fn write_labels<'a>(labels: impl IntoIterator<Item = &'a Label>, mut w: impl Write) -> io::Result<()> {
    writeln!(w, "{HEADER}")?;
    for l in labels {
        writeln!(w, "{},{}", l.tx_id, l.label)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_and_writes() {
        let text = "tx_id,label\nab,1\ncd,0\n";
        let labels = read_labels(text.as_bytes()).unwrap();
        assert_eq!(labels[1], Label { tx_id: "cd".into(), label: 0 });
        let mut buf = Vec::new();
        write_labels(&labels, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), text);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(read_labels("id,label\n".as_bytes()).is_err());
        assert!(read_labels("tx_id,label\nab,2\n".as_bytes()).is_err());
        assert!(matches!(read_labels("tx_id,label\nab,1\nab,0\n".as_bytes()), Err(LabelsError::Duplicate { line: 3, .. })));
    }

    #[test]
    fn header_only_is_empty() {
        assert!(read_labels("tx_id,label\n".as_bytes()).unwrap().is_empty());
    }
}
