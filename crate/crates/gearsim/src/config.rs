//! Experiment configuration files.
//!
//! One JSON object per file: a seed, an optional output path and one
//! `experiment` block tagged by `kind`. Unknown keys are rejected.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use gear_core::adaptive::{ProtocolConfig, DEVICE_RATIOS};
use gear_core::bayes::{DEFAULT_GRID_SIZE, MIN_GRID_SIZE};
use gear_core::fisher::HeuristicVisibilityModel;
use gear_core::{ProbeSpec, Strategy};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    /// Primary output file; sibling files share its stem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub experiment: Experiment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Experiment {
    Fringe(FringeConfig),
    Estimate(EstimateConfig),
    Adaptive(AdaptiveConfig),
    Bounds(BoundsConfig),
    EnhancementCurve(EnhancementConfig),
    Entangled(EntangledConfig),
    Coherent(CoherentConfig),
    Sample(SampleConfig),
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Fringe(_) => "fringe",
            Experiment::Estimate(_) => "estimate",
            Experiment::Adaptive(_) => "adaptive",
            Experiment::Bounds(_) => "bounds",
            Experiment::EnhancementCurve(_) => "enhancement-curve",
            Experiment::Entangled(_) => "entangled",
            Experiment::Coherent(_) => "coherent",
            Experiment::Sample(_) => "sample",
        }
    }
}

/// Evenly spaced angles from `start` to `stop`, both included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Sweep {
    pub fn angles(&self) -> Vec<f64> {
        let step = (self.stop - self.start) / (self.points - 1) as f64;
        (0..self.points).map(|i| self.start + i as f64 * step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FringeConfig {
    #[serde(default)]
    pub probe: ProbeSpec,
    pub sweep: Sweep,
    /// Mean photons per angle; the number sent is Poisson, as in a fixed
    /// acquisition window.
    pub photons: u64,
    /// Runs one sweep per input phase instead of `probe.xi`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub xi_values: Option<Vec<f64>>,
    /// Fixed fit frequency; scanned when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_m: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateConfig {
    #[serde(default)]
    pub probe: ProbeSpec,
    pub true_theta: f64,
    /// Photons (or pulses) per run.
    pub photons: u64,
    /// Support `[lo, hi)`; the bijectivity window containing θ* when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<[f64; 2]>,
    #[serde(default = "default_grid")]
    pub grid_size: usize,
    #[serde(default = "one")]
    pub runs: u32,
    /// Checkpoint spacing of the running estimate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub running_every: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdaptiveConfig {
    /// Uniform in `[0, 2π)` per run when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_theta: Option<f64>,
    #[serde(default = "one")]
    pub runs: u32,
    #[serde(default)]
    pub protocol: ProtocolConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    #[serde(default)]
    pub probe: ProbeSpec,
    #[serde(default = "device_set")]
    pub m_values: Vec<u32>,
    #[serde(default = "one_u64")]
    pub nu: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default = "fitted_model")]
    pub model: HeuristicVisibilityModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnhancementConfig {
    #[serde(default = "default_m_max")]
    pub m_max: u32,
    #[serde(default = "fitted_model")]
    pub model: HeuristicVisibilityModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntangledConfig {
    pub probe: ProbeSpec,
    pub sweep_a: Sweep,
    /// Co-rotation `θ_B = θ_A` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_b: Option<Sweep>,
    /// Mean pairs per grid point, Poisson-distributed like `photons`.
    pub pairs: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_m: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoherentConfig {
    pub probe: ProbeSpec,
    pub sweep: Sweep,
    /// Pulses sent at each angle.
    pub pulses: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_m: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleConfig {
    #[serde(default)]
    pub probe: ProbeSpec,
    pub true_theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_theta_b: Option<f64>,
    pub records: u64,
}

fn default_grid() -> usize {
    DEFAULT_GRID_SIZE
}

fn one() -> u32 {
    1
}

fn one_u64() -> u64 {
    1
}

fn device_set() -> Vec<u32> {
    DEVICE_RATIOS.to_vec()
}

fn default_m_max() -> u32 {
    101
}

fn fitted_model() -> HeuristicVisibilityModel {
    HeuristicVisibilityModel::FITTED
}

struct Problem {
    path: &'static [&'static str],
    message: String,
}

fn problem(path: &'static [&'static str], message: impl Into<String>) -> Problem {
    Problem {
        path,
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            seed: 0,
            output: None,
            experiment,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses and validates; `label` names the source in error messages.
    pub fn parse(text: &str, label: &str) -> Result<Self> {
        let config: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            let (line, column) = misplaced_key(text, &e.to_string()).unwrap_or((e.line(), e.column()));
            Error::Config {
                path: label.to_string(),
                line,
                column,
                message: e.to_string(),
            }
        })?;
        if let Err(p) = config.check() {
            let (line, column) = locate(text, p.path);
            return Err(Error::Config {
                path: label.to_string(),
                line,
                column,
                message: format!("{}: {}", p.path.join("."), p.message),
            });
        }
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks the semantic constraints that deserialization cannot express.
    pub fn validate(&self) -> Result<()> {
        self.check().map_err(|p| Error::Usage(format!("{}: {}", p.path.join("."), p.message)))
    }

    fn check(&self) -> std::result::Result<(), Problem> {
        match &self.experiment {
            Experiment::Fringe(c) => {
                check_probe(&c.probe, &["experiment", "probe"], Strategy::is_single_mode, "a single-mode")?;
                check_sweep(&c.sweep, &["experiment", "sweep"])?;
                positive(c.photons, &["experiment", "photons"])?;
                if let Some(xs) = &c.xi_values {
                    if xs.is_empty() || xs.iter().any(|x| !x.is_finite()) {
                        return Err(problem(&["experiment", "xi_values"], "needs finite phases"));
                    }
                }
                fit_m(c.fit_m, &["experiment", "fit_m"])
            }
            Experiment::Estimate(c) => {
                check_probe(
                    &c.probe,
                    &["experiment", "probe"],
                    |s| s.is_single_mode() || s == Strategy::CoherentGear,
                    "a single-mode or coherent",
                )?;
                finite(c.true_theta, &["experiment", "true_theta"])?;
                positive(c.photons, &["experiment", "photons"])?;
                if let Some([lo, hi]) = c.interval {
                    if !(lo.is_finite() && hi > lo && hi - lo <= 2.0 * PI) {
                        return Err(problem(&["experiment", "interval"], "needs lo < hi with hi − lo ≤ 2π"));
                    }
                }
                if c.grid_size < MIN_GRID_SIZE {
                    return Err(problem(
                        &["experiment", "grid_size"],
                        format!("must be at least {MIN_GRID_SIZE}"),
                    ));
                }
                positive(c.runs as u64, &["experiment", "runs"])?;
                if c.running_every == Some(0) {
                    return Err(problem(&["experiment", "running_every"], "must be at least 1"));
                }
                Ok(())
            }
            Experiment::Adaptive(c) => {
                if let Some(t) = c.true_theta {
                    finite(t, &["experiment", "true_theta"])?;
                }
                positive(c.runs as u64, &["experiment", "runs"])?;
                let p = &c.protocol;
                if p.budgets.contains(&0) {
                    return Err(problem(&["experiment", "protocol", "budgets"], "budgets must be positive"));
                }
                if p.grid_size < MIN_GRID_SIZE {
                    return Err(problem(
                        &["experiment", "protocol", "grid_size"],
                        format!("must be at least {MIN_GRID_SIZE}"),
                    ));
                }
                Ok(())
            }
            Experiment::Bounds(c) => {
                check_probe(
                    &c.probe,
                    &["experiment", "probe"],
                    |s| s.is_single_mode() || s == Strategy::CoherentGear,
                    "a single-mode or coherent",
                )?;
                if c.m_values.is_empty() || c.m_values.contains(&0) {
                    return Err(problem(&["experiment", "m_values"], "needs gear ratios of at least 1"));
                }
                positive(c.nu, &["experiment", "nu"])?;
                if let Some(t) = c.theta {
                    finite(t, &["experiment", "theta"])?;
                }
                check_model(&c.model)
            }
            Experiment::EnhancementCurve(c) => {
                positive(c.m_max as u64, &["experiment", "m_max"])?;
                check_model(&c.model)
            }
            Experiment::Entangled(c) => {
                check_probe(
                    &c.probe,
                    &["experiment", "probe"],
                    |s| s == Strategy::EntangledPair,
                    "an entangled-pair",
                )?;
                check_sweep(&c.sweep_a, &["experiment", "sweep_a"])?;
                if let Some(s) = &c.sweep_b {
                    check_sweep(s, &["experiment", "sweep_b"])?;
                }
                positive(c.pairs, &["experiment", "pairs"])?;
                fit_m(c.fit_m, &["experiment", "fit_m"])
            }
            Experiment::Coherent(c) => {
                check_probe(
                    &c.probe,
                    &["experiment", "probe"],
                    |s| s == Strategy::CoherentGear,
                    "a coherent",
                )?;
                check_sweep(&c.sweep, &["experiment", "sweep"])?;
                positive(c.pulses, &["experiment", "pulses"])?;
                fit_m(c.fit_m, &["experiment", "fit_m"])
            }
            Experiment::Sample(c) => {
                check_probe(&c.probe, &["experiment", "probe"], |_| true, "any")?;
                finite(c.true_theta, &["experiment", "true_theta"])?;
                if let Some(t) = c.true_theta_b {
                    finite(t, &["experiment", "true_theta_b"])?;
                }
                positive(c.records, &["experiment", "records"])
            }
        }
    }
}

fn check_probe(
    probe: &ProbeSpec,
    path: &'static [&'static str],
    allowed: impl Fn(Strategy) -> bool,
    what: &str,
) -> std::result::Result<(), Problem> {
    if !allowed(probe.strategy) {
        return Err(problem(
            path,
            format!("{:?} is not {what} strategy", probe.strategy),
        ));
    }
    probe.validate().map_err(|e| problem(path, e.to_string()))
}

fn check_sweep(s: &Sweep, path: &'static [&'static str]) -> std::result::Result<(), Problem> {
    if s.points < 2 {
        return Err(problem(path, "needs at least 2 points"));
    }
    if !(s.start.is_finite() && s.stop.is_finite() && s.stop > s.start) {
        return Err(problem(path, "needs finite start < stop"));
    }
    Ok(())
}

fn check_model(m: &HeuristicVisibilityModel) -> std::result::Result<(), Problem> {
    let ok = [m.v0, m.eta0, m.gamma, m.delta].iter().all(|x| x.is_finite())
        && (0.0..=1.0).contains(&m.v0)
        && m.eta0 > 0.0
        && m.eta0 <= 1.0
        && m.gamma >= 0.0;
    if ok {
        Ok(())
    } else {
        Err(problem(
            &["experiment", "model"],
            "needs v0 in [0, 1], eta0 in (0, 1], gamma ≥ 0 and finite delta",
        ))
    }
}

fn positive(n: u64, path: &'static [&'static str]) -> std::result::Result<(), Problem> {
    if n == 0 {
        Err(problem(path, "must be at least 1"))
    } else {
        Ok(())
    }
}

fn finite(x: f64, path: &'static [&'static str]) -> std::result::Result<(), Problem> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(problem(path, "must be finite"))
    }
}

fn fit_m(m: Option<u32>, path: &'static [&'static str]) -> std::result::Result<(), Problem> {
    if m == Some(0) {
        Err(problem(path, "must be at least 1"))
    } else {
        Ok(())
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
    (line, column)
}

fn find_key(text: &str, from: usize, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    let mut start = from;
    while let Some(rel) = text[start..].find(&needle) {
        let at = start + rel;
        let rest = text[at + needle.len()..].trim_start();
        if rest.starts_with(':') {
            return Some(at);
        }
        start = at + needle.len();
    }
    None
}

/// Position of the deepest key of `path` found in `text`, searching each key
/// after its parent.
fn locate(text: &str, path: &[&str]) -> (usize, usize) {
    let mut pos = 0;
    let mut found = None;
    for key in path {
        match find_key(text, pos, key) {
            Some(at) => {
                pos = at;
                found = Some(at);
            }
            None => break,
        }
    }
    found.map_or((1, 1), |at| line_col(text, at))
}

/// serde reports unknown fields of tagged enums at the end of the enclosing
/// object; point at the key itself instead.
fn misplaced_key(text: &str, message: &str) -> Option<(usize, usize)> {
    let rest = message.strip_prefix("unknown field `")?;
    let key = &rest[..rest.find('`')?];
    find_key(text, 0, key).map(|at| line_col(text, at))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locate_walks_nested_keys() {
        let text = "{\n  \"experiment\": {\n    \"sweep\": {\n      \"points\": 1\n    }\n  }\n}";
        assert_eq!(locate(text, &["experiment", "sweep", "points"]), (4, 7));
        assert_eq!(locate(text, &["experiment", "missing"]), (2, 3));
    }

    #[test]
    fn sweep_includes_both_ends() {
        let s = Sweep {
            start: 0.0,
            stop: 1.0,
            points: 5,
        };
        assert_eq!(s.angles(), [0.0, 0.25, 0.5, 0.75, 1.0]);
    }
}
