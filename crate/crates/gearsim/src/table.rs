//! Versioned CSV tables.
//!
//! Every file starts with `# gearsim-csv v1 kind=<kind>`, then a header row,
//! then comma-separated rows. Floats use Rust's shortest round-trip form.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

pub const CSV_VERSION: &str = "v1";
const MAGIC: &str = "# gearsim-csv";

/// In-memory table written in one go.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(kind: &str, header: &[&str]) -> Self {
        Table {
            kind: kind.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Values of a numeric column; unparsable cells become NaN.
    pub fn floats(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column(name)?;
        Some(self.rows.iter().map(|r| r[i].parse().unwrap_or(f64::NAN)).collect())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{MAGIC} {CSV_VERSION} kind={}", self.kind).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = BufReader::new(file);
        let mut first = String::new();
        reader.read_line(&mut first).map_err(|e| Error::io(path, e))?;
        let bad = |message: String| Error::Format {
            path: path.display().to_string(),
            line: 1,
            message,
        };
        let rest = first
            .trim_end()
            .strip_prefix(MAGIC)
            .ok_or_else(|| bad("missing gearsim-csv header comment".into()))?;
        let mut parts = rest.split_whitespace();
        match parts.next() {
            Some(CSV_VERSION) => {}
            other => return Err(bad(format!("unsupported version {other:?}"))),
        }
        let kind = parts
            .next()
            .and_then(|p| p.strip_prefix("kind="))
            .ok_or_else(|| bad("missing kind=".into()))?
            .to_string();
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers()?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec?.iter().map(str::to_string).collect());
        }
        Ok(Table { kind, header, rows })
    }
}

pub fn num(x: f64) -> String {
    format!("{x}")
}

pub fn int(x: impl Into<u64>) -> String {
    x.into().to_string()
}

/// `run.csv` → `run.<suffix>`.
pub fn sibling(primary: &Path, suffix: &str) -> PathBuf {
    let stem = primary.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    primary.with_file_name(format!("{stem}.{suffix}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_names() {
        assert_eq!(sibling(Path::new("out/run.csv"), "fit.csv"), Path::new("out/run.fit.csv"));
        assert_eq!(sibling(Path::new("run"), "report.txt"), Path::new("run.report.txt"));
    }

    #[test]
    fn floats_round_trip_through_text() {
        for x in [0.1, 1e-17, 2.0 / 3.0, -7.25e300] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
    }
}
