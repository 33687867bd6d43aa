//! Feature CSV (`tx_id,label,f000,...`) and its schema sidecar
//! (`<csv>.schema`, one `fNNN=name` line per column).

use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use artforge_core::ml::Dataset;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("features line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn column_name(i: usize) -> String {
    format!("f{i:03}")
}

pub fn schema_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_owned();
    s.push(".schema");
    PathBuf::from(s)
}

pub fn write_header(width: usize, mut w: impl Write) -> io::Result<()> {
    write!(w, "tx_id,label")?;
    for i in 0..width {
        write!(w, ",{}", column_name(i))?;
    }
    writeln!(w)
}

pub fn write_row(tx_id: &str, label: u8, values: &[f64], mut w: impl Write) -> io::Result<()> {
    write!(w, "{tx_id},{label}")?;
    for v in values {
        write!(w, ",{v}")?;
    }
    writeln!(w)
}

pub fn write_schema(names: &[String], mut w: impl Write) -> io::Result<()> {
    for (i, name) in names.iter().enumerate() {
        writeln!(w, "{}={name}", column_name(i))?;
    }
    Ok(())
}

pub fn read_schema(reader: impl BufRead) -> Result<Vec<String>, TableError> {
    let mut names = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let (col, name) = line
            .split_once('=')
            .ok_or_else(|| TableError::Malformed { line: i + 1, msg: "schema line lacks `=`".into() })?;
        if col != column_name(i) {
            return Err(TableError::Malformed { line: i + 1, msg: format!("expected {}", column_name(i)) });
        }
        names.push(name.to_string());
    }
    Ok(names)
}

pub fn read_table(reader: impl BufRead) -> Result<Dataset, TableError> {
    let mut lines = reader.lines();
    let header = lines.next().transpose()?.ok_or(TableError::Malformed { line: 1, msg: "missing header".into() })?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 2 || cols[0] != "tx_id" || cols[1] != "label" {
        return Err(TableError::Malformed { line: 1, msg: "header must start with tx_id,label".into() });
    }
    for (i, c) in cols[2..].iter().enumerate() {
        if *c != column_name(i) {
            return Err(TableError::Malformed { line: 1, msg: format!("column {} should be {}", i + 2, column_name(i)) });
        }
    }
    let width = cols.len() - 2;
    let mut d = Dataset::default();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let n = i + 2;
        let mut parts = line.split(',');
        let id = parts.next().unwrap_or_default().to_string();
        let label = match parts.next() {
            Some("0") => 0,
            Some("1") => 1,
            _ => return Err(TableError::Malformed { line: n, msg: "label must be 0 or 1".into() }),
        };
        let row = parts
            .map(|p| p.parse::<f64>())
            .collect::<Result<Vec<f64>, _>>()
            .map_err(|e| TableError::Malformed { line: n, msg: e.to_string() })?;
        if row.len() != width {
            return Err(TableError::Malformed { line: n, msg: format!("{} values, header has {width}", row.len()) });
        }
        d.push(row, label, id);
    }
    Ok(d)
}
