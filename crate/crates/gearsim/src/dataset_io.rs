//! Plain-text dataset files.
//!
//! ```text
//! # gear-dataset v1
//! # spec: {"strategy":"GearSinglePhoton",...}
//! # true_theta: 0.5
//! # true_theta_b: none
//! # seed: 42
//! outcome
//! H
//! Lost
//! ```
//!
//! Coherent datasets use the columns `n_h,n_v` instead of `outcome`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use gear_core::probe::{CoherentCounts, PairOutcome, SingleOutcome};
use gear_core::sampler::{Dataset, Records};
use gear_core::ProbeSpec;

use crate::error::{Error, Result};

const MAGIC: &str = "# gear-dataset v1";

pub fn write_dataset(path: &Path, d: &Dataset) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    writeln!(out, "{MAGIC}").map_err(io)?;
    writeln!(out, "# spec: {}", serde_json::to_string(&d.spec).expect("spec serializes")).map_err(io)?;
    writeln!(out, "# true_theta: {}", d.true_theta).map_err(io)?;
    match d.true_theta_b {
        Some(t) => writeln!(out, "# true_theta_b: {t}"),
        None => writeln!(out, "# true_theta_b: none"),
    }
    .map_err(io)?;
    writeln!(out, "# seed: {}", d.seed).map_err(io)?;
    match d.records() {
        Records::Single(r) => {
            writeln!(out, "outcome").map_err(io)?;
            for o in r {
                writeln!(out, "{o}").map_err(io)?;
            }
        }
        Records::Pair(r) => {
            writeln!(out, "outcome").map_err(io)?;
            for o in r {
                writeln!(out, "{o}").map_err(io)?;
            }
        }
        Records::Coherent(r) => {
            writeln!(out, "n_h,n_v").map_err(io)?;
            for c in r {
                writeln!(out, "{},{}", c.n_h, c.n_v).map_err(io)?;
            }
        }
    }
    out.flush().map_err(io)
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let label = path.display().to_string();
    let err = |line: usize, message: String| Error::Format {
        path: label.clone(),
        line,
        message,
    };
    let mut lines = BufReader::new(file).lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, Ok(l))) => Ok((n, l)),
            Some((_, Err(e))) => Err(Error::io(path, e)),
            None => Err(err(0, format!("unexpected end of file, expected {what}"))),
        }
    };

    let (n, l) = next("header")?;
    if l.trim_end() != MAGIC {
        return Err(err(n, format!("expected `{MAGIC}`")));
    }
    let mut field = |key: &str| -> Result<(usize, String)> {
        let (n, l) = next(key)?;
        let prefix = format!("# {key}: ");
        l.strip_prefix(&prefix)
            .map(|v| (n, v.trim().to_string()))
            .ok_or_else(|| err(n, format!("expected `{prefix}…`")))
    };
    let (n, spec) = field("spec")?;
    let spec: ProbeSpec = serde_json::from_str(&spec).map_err(|e| err(n, e.to_string()))?;
    let (n, t) = field("true_theta")?;
    let true_theta: f64 = t.parse().map_err(|_| err(n, format!("bad angle `{t}`")))?;
    let (n, t) = field("true_theta_b")?;
    let true_theta_b = match t.as_str() {
        "none" => None,
        s => Some(s.parse::<f64>().map_err(|_| err(n, format!("bad angle `{s}`")))?),
    };
    let (n, s) = field("seed")?;
    let seed: u64 = s.parse().map_err(|_| err(n, format!("bad seed `{s}`")))?;

    let (n, header) = next("column header")?;
    let records = match (header.trim_end(), spec.strategy.is_single_mode()) {
        ("outcome", true) => {
            let mut r = Vec::new();
            for (n, l) in lines {
                let l = l.map_err(|e| Error::io(path, e))?;
                r.push(SingleOutcome::from_label(l.trim()).ok_or_else(|| err(n, format!("bad outcome `{l}`")))?);
            }
            Records::Single(r)
        }
        ("outcome", false) => {
            let mut r = Vec::new();
            for (n, l) in lines {
                let l = l.map_err(|e| Error::io(path, e))?;
                r.push(PairOutcome::from_label(l.trim()).ok_or_else(|| err(n, format!("bad outcome `{l}`")))?);
            }
            Records::Pair(r)
        }
        ("n_h,n_v", _) => {
            let mut r = Vec::new();
            for (n, l) in lines {
                let l = l.map_err(|e| Error::io(path, e))?;
                let parsed = l
                    .trim()
                    .split_once(',')
                    .and_then(|(a, b)| Some(CoherentCounts { n_h: a.parse().ok()?, n_v: b.parse().ok()? }));
                r.push(parsed.ok_or_else(|| err(n, format!("bad counts `{l}`")))?);
            }
            Records::Coherent(r)
        }
        (h, _) => return Err(err(n, format!("unknown column header `{h}`"))),
    };
    let kind_ok = match &records {
        Records::Single(_) => spec.strategy.is_single_mode(),
        Records::Pair(_) => spec.strategy == gear_core::Strategy::EntangledPair,
        Records::Coherent(_) => spec.strategy == gear_core::Strategy::CoherentGear,
    };
    if !kind_ok {
        return Err(err(n, format!("columns do not match a {:?} probe", spec.strategy)));
    }
    Ok(Dataset::from_parts(spec, true_theta, true_theta_b, seed, records))
}
