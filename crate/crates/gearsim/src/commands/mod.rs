//! One module per experiment kind.
//!
//! Sub-seeds: sweep point `i` of series `f` uses
//! `derive_seed(derive_seed(seed, f), i)`; Monte Carlo run `r` uses
//! `derive_seed(seed, r)`. Points run in parallel and are collected in order,
//! so the thread count never changes the output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use gear_core::fringe::{fit_fringe, FringeFitResult, FringeScan};
use gear_core::Warning;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::{Error, Result};
use crate::table::{num, sibling, Table};

mod adaptive;
mod bounds;
mod coherent;
mod entangled;
mod estimate;
mod fringe;
mod sample;

/// Files written by a run and its human-readable report.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub report: String,
}

/// Runs `config`, writing the primary output to `out` and siblings next to it.
pub fn run(config: &ExperimentConfig, out: &Path) -> Result<RunSummary> {
    config.validate()?;
    let seed = config.seed;
    let mut out = Output::new(out, config.experiment.kind(), seed);
    match &config.experiment {
        Experiment::Fringe(c) => fringe::run(c, seed, &mut out)?,
        Experiment::Estimate(c) => estimate::run(c, seed, &mut out)?,
        Experiment::Adaptive(c) => adaptive::run(c, seed, &mut out)?,
        Experiment::Bounds(c) => bounds::run(c, &mut out)?,
        Experiment::EnhancementCurve(c) => bounds::run_curve(c, &mut out)?,
        Experiment::Entangled(c) => entangled::run(c, seed, &mut out)?,
        Experiment::Coherent(c) => coherent::run(c, seed, &mut out)?,
        Experiment::Sample(c) => sample::run(c, seed, &mut out)?,
    }
    out.finish()
}

/// Default primary file name for a kind.
pub fn default_output(kind: &str) -> PathBuf {
    match kind {
        "sample" => PathBuf::from("sample.dataset"),
        k => PathBuf::from(format!("{k}.csv")),
    }
}

pub(crate) struct Output {
    primary: PathBuf,
    files: Vec<PathBuf>,
    report: String,
}

impl Output {
    fn new(primary: &Path, kind: &str, seed: u64) -> Self {
        let mut report = String::new();
        let _ = writeln!(report, "kind: {kind}");
        let _ = writeln!(report, "seed: {seed}");
        Output {
            primary: primary.to_path_buf(),
            files: Vec::new(),
            report,
        }
    }

    pub(crate) fn primary(&self) -> &Path {
        &self.primary
    }

    pub(crate) fn table(&mut self, t: &Table) -> Result<()> {
        t.write(&self.primary)?;
        self.files.push(self.primary.clone());
        Ok(())
    }

    pub(crate) fn sibling_table(&mut self, suffix: &str, t: &Table) -> Result<()> {
        let p = sibling(&self.primary, suffix);
        t.write(&p)?;
        self.files.push(p);
        Ok(())
    }

    pub(crate) fn file(&mut self, p: PathBuf) {
        self.files.push(p);
    }

    pub(crate) fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.report, "{key}: {value}");
    }

    fn finish(mut self) -> Result<RunSummary> {
        let p = sibling(&self.primary, "report.txt");
        std::fs::write(&p, &self.report).map_err(|e| Error::io(&p, e))?;
        self.files.push(p);
        Ok(RunSummary {
            files: self.files,
            report: self.report,
        })
    }
}

/// Fit that keeps the best parameters of a non-converged optimization.
pub(crate) struct Fit {
    pub result: FringeFitResult,
    pub converged: bool,
}

pub(crate) fn fit_scan(scan: &FringeScan, m: Option<u32>) -> Result<Fit> {
    match fit_fringe(scan, m) {
        Ok(result) => Ok(Fit { result, converged: true }),
        Err(gear_core::Error::FitNotConverged { best, .. }) => Ok(Fit {
            result: *best,
            converged: false,
        }),
        Err(e) => Err(e.into()),
    }
}

pub(crate) const FIT_HEADER: [&str; 4] = ["series", "parameter", "value", "stderr"];

pub(crate) fn push_fit(t: &mut Table, series: &str, fit: &Fit) {
    let r = &fit.result;
    let mut row = |p: &str, v: String, e: String| t.push(vec![series.to_string(), p.to_string(), v, e]);
    row("m", r.m.to_string(), String::new());
    row("visibility", num(r.visibility), num(r.stderr.visibility));
    row("xi", num(r.xi), num(r.stderr.xi));
    row("offset", num(r.offset), num(r.stderr.offset));
    row("chi2", num(r.chi2), String::new());
    row("dof", r.dof.to_string(), String::new());
    row("chi2_per_dof", num(r.chi2_per_dof()), String::new());
    row("iterations", r.iterations.to_string(), String::new());
    row("converged", fit.converged.to_string(), String::new());
}

pub(crate) fn report_fit(out: &mut Output, series: &str, fit: &Fit) {
    let r = &fit.result;
    out.line(
        &format!("fit[{series}]"),
        format!(
            "m={} V={:.4}±{:.4} xi={:.4}±{:.4} chi2/dof={:.3}{}",
            r.m,
            r.visibility,
            r.stderr.visibility,
            r.xi,
            r.stderr.xi,
            r.chi2_per_dof(),
            if fit.converged { "" } else { " (not converged)" }
        ),
    );
    for w in &r.warnings {
        out.line(&format!("warning[{series}]"), describe(w));
    }
}

pub(crate) fn describe(w: &Warning) -> String {
    match w {
        Warning::TruncatedTail { mass } => format!("truncated tail mass {mass:e}"),
        Warning::AmbiguousFrequency {
            best,
            runner_up,
            delta_chi2,
        } => format!("ambiguous frequency: m={best} vs m={runner_up}, Δχ²={delta_chi2:.3}"),
        Warning::BudgetOrdering { budgets } => format!("budgets {budgets:?} violate M1 ≲ √M2 ≲ ⁴√M3"),
        Warning::SparseSampling { points_per_half_period } => {
            format!("sparse sampling: {points_per_half_period:.2} points per half-period")
        }
        Warning::SymmetricCandidates { step } => format!("step {step}: candidates not separated"),
        Warning::SymmetryFallback { step } => format!("step {step}: symmetry fallback phase applied"),
    }
}
