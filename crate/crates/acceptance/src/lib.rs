//! Verdict lines for the acceptance target.

use std::io::Write;
use std::time::{Duration, Instant};

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn line(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!("[{tag}] criterion {:>2}: {} | {}", self.id, self.name, self.detail)
    }
}

/// Writes to the process stdout directly so the line survives test capture.
pub fn emit(line: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
}

pub fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = Instant::now();
    let value = f();
    (value, start.elapsed())
}

pub fn secs(d: Duration) -> String {
    format!("{:.2} s", d.as_secs_f64())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_format() {
        let v = Verdict {
            id: 3,
            name: "Enhancement curve",
            pass: false,
            detail: "peak 50".into(),
        };
        assert_eq!(v.line(), "[FAIL] criterion  3: Enhancement curve | peak 50");
    }
}
