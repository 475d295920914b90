use gear_core::fringe::{Channel, FringeScan};
use gear_core::rng::derive_seed;
use gear_core::sampler::{sample_coherent, CountsSummary, Dataset};
use rayon::prelude::*;

use super::{fit_scan, push_fit, report_fit, Output, FIT_HEADER};
use crate::config::CoherentConfig;
use crate::error::Result;
use crate::table::{int, num, Table};

pub(super) fn run(c: &CoherentConfig, seed: u64, out: &mut Output) -> Result<()> {
    let angles = c.sweep.angles();
    let sets: Vec<Dataset> = angles
        .par_iter()
        .enumerate()
        .map(|(i, &t)| sample_coherent(&c.probe, t, c.pulses, derive_seed(seed, i as u64)))
        .collect::<gear_core::Result<_>>()?;
    let mut t = Table::new(
        "coherent",
        &["theta", "pulses", "n_h", "n_v", "mean_h", "mean_v", "intensity_h"],
    );
    let (mut total_h, mut total_v) = (0, 0);
    for d in &sets {
        let CountsSummary::Coherent { pulses, n_h, n_v } = d.counts_summary() else {
            unreachable!("coherent sampler")
        };
        total_h += n_h;
        total_v += n_v;
        let p = pulses as f64;
        t.push(vec![
            num(d.true_theta),
            int(pulses),
            int(n_h),
            int(n_v),
            num(n_h as f64 / p),
            num(n_v as f64 / p),
            num(n_h as f64 / (n_h + n_v) as f64),
        ]);
    }
    out.table(&t)?;
    out.line("mean_photons", c.probe.mean_photons);
    out.line("pulses_per_point", c.pulses);
    out.line("total_counts", format!("H={total_h} V={total_v}"));

    let mut fits = Table::new("coherent-fit", &FIT_HEADER);
    for (name, channel, total) in [("H", Channel::H, total_h), ("V", Channel::V, total_v)] {
        if total == 0 {
            out.line(&format!("fit[{name}]"), "skipped: no counts");
            continue;
        }
        let fit = fit_scan(&FringeScan::from_datasets(&sets, channel)?, c.fit_m)?;
        push_fit(&mut fits, name, &fit);
        report_fit(out, name, &fit);
    }
    out.sibling_table("fit.csv", &fits)
}
