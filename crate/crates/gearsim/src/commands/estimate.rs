use gear_core::adaptive::bijectivity_window;
use gear_core::bayes::{estimate_dataset, estimate_evidence, EstimationResult, Evidence, Interval, PosteriorGrid};
use gear_core::fisher::crb;
use gear_core::probe::SingleOutcome;
use gear_core::rng::derive_seed;
use gear_core::sampler::{sample_coherent, sample_single_photons, Dataset, Records};
use gear_core::{ProbeSpec, Strategy};
use rayon::prelude::*;

use super::Output;
use crate::config::EstimateConfig;
use crate::error::Result;
use crate::table::{int, num, Table};

struct Run {
    seed: u64,
    result: EstimationResult,
    posterior: PosteriorGrid,
    running: Vec<(u64, EstimationResult)>,
}

fn sample(spec: &ProbeSpec, theta: f64, n: u64, seed: u64) -> gear_core::Result<Dataset> {
    if spec.strategy == Strategy::CoherentGear {
        sample_coherent(spec, theta, n, seed)
    } else {
        sample_single_photons(spec, theta, n, seed)
    }
}

/// Evidence of the first `nu` records, for `nu` at every checkpoint.
fn prefixes(records: &Records, every: u64) -> Vec<(u64, Evidence)> {
    let total = records.len() as u64;
    let due = |nu: u64| nu % every == 0 || nu == total;
    let mut out = Vec::new();
    match records {
        Records::Single(r) => {
            let (mut h, mut v) = (0, 0);
            for (i, o) in r.iter().enumerate() {
                match o {
                    SingleOutcome::H => h += 1,
                    SingleOutcome::V => v += 1,
                    SingleOutcome::Lost => {}
                }
                let nu = i as u64 + 1;
                if due(nu) {
                    out.push((nu, Evidence::Polarization { h, v }));
                }
            }
        }
        Records::Coherent(r) => {
            let (mut n_h, mut n_v) = (0, 0);
            for (i, c) in r.iter().enumerate() {
                n_h += c.n_h;
                n_v += c.n_v;
                let nu = i as u64 + 1;
                if due(nu) {
                    out.push((nu, Evidence::Coherent { pulses: nu, n_h, n_v }));
                }
            }
        }
        Records::Pair(_) => unreachable!("rejected by config validation"),
    }
    out
}

pub(super) fn run(c: &EstimateConfig, seed: u64, out: &mut Output) -> Result<()> {
    let k = c.probe.phase_multiplier()?;
    let omega = match c.interval {
        Some([lo, hi]) => Interval::new(lo, hi)?,
        None => bijectivity_window(k, c.probe.xi, c.true_theta),
    };
    let runs: Vec<Run> = (0..c.runs as u64)
        .into_par_iter()
        .map(|r| -> Result<Run> {
            let s = derive_seed(seed, r);
            let d = sample(&c.probe, c.true_theta, c.photons, s)?;
            let (result, posterior) = estimate_dataset(&d, omega, c.grid_size)?;
            let running = match c.running_every {
                Some(every) => prefixes(d.records(), every)
                    .into_iter()
                    .map(|(nu, ev)| Ok((nu, estimate_evidence(&c.probe, &ev, omega, c.grid_size)?.0)))
                    .collect::<gear_core::Result<_>>()?,
                None => Vec::new(),
            };
            Ok(Run {
                seed: s,
                result,
                posterior,
                running,
            })
        })
        .collect::<Result<_>>()?;

    let mut table = Table::new(
        "estimate",
        &["run", "seed", "theta_true", "theta_bar", "delta_theta", "photons_consumed"],
    );
    for (r, run) in runs.iter().enumerate() {
        table.push(vec![
            r.to_string(),
            int(run.seed),
            num(c.true_theta),
            num(run.result.theta_bar),
            num(run.result.delta_theta),
            int(run.result.photons_consumed),
        ]);
    }
    out.table(&table)?;

    let first = &runs[0];
    let mut post = Table::new("posterior", &["theta", "weight", "density"]);
    let density = first.posterior.density();
    for ((t, w), d) in first.posterior.nodes().iter().zip(first.posterior.normalized_weights()).zip(&density) {
        post.push(vec![num(*t), num(*w), num(*d)]);
    }
    out.sibling_table("posterior.csv", &post)?;

    if c.running_every.is_some() {
        let mut running = Table::new("running", &["run", "nu", "theta_bar", "delta_theta", "crb"]);
        for (r, run) in runs.iter().enumerate() {
            for (nu, e) in &run.running {
                let bound = crb(&c.probe, *nu, Some(c.true_theta))?.crb;
                running.push(vec![
                    r.to_string(),
                    nu.to_string(),
                    num(e.theta_bar),
                    num(e.delta_theta),
                    num(bound),
                ]);
            }
        }
        out.sibling_table("running.csv", &running)?;
    }

    let n = runs.len() as f64;
    let mean = runs.iter().map(|r| r.result.theta_bar).sum::<f64>() / n;
    let mean_delta = runs.iter().map(|r| r.result.delta_theta).sum::<f64>() / n;
    let bound = crb(&c.probe, c.photons, Some(c.true_theta))?.crb;
    out.line("strategy", c.probe.strategy.name());
    out.line("phase_multiplier", k);
    out.line("interval", format!("[{}, {})", omega.lo, omega.hi));
    out.line("true_theta", c.true_theta);
    out.line("runs", runs.len());
    out.line("theta_bar_mean", mean);
    out.line("delta_theta_mean", mean_delta);
    out.line("crb", bound);
    if runs.len() > 1 {
        let sd = (runs.iter().map(|r| (r.result.theta_bar - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        out.line("theta_bar_std", sd);
        out.line("std_over_crb", sd / bound);
        out.line("bias", mean - c.true_theta);
        out.line("bias_stderr", sd / n.sqrt());
    }
    Ok(())
}
