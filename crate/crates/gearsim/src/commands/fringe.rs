use gear_core::fringe::FringeScan;
use gear_core::rng::{derive_seed, SeededRng};
use gear_core::sampler::{sample_single_photons, CountsSummary};
use rayon::prelude::*;

use super::{fit_scan, push_fit, report_fit, Output, FIT_HEADER};
use crate::config::FringeConfig;
use crate::error::Result;
use crate::table::{int, num, Table};

pub(super) fn run(c: &FringeConfig, seed: u64, out: &mut Output) -> Result<()> {
    let angles = c.sweep.angles();
    let xis = c.xi_values.clone().unwrap_or_else(|| vec![c.probe.xi]);
    let mut data = Table::new("fringe", &["xi", "theta", "h", "v", "lost", "p_h", "stderr"]);
    let mut fits = Table::new("fringe-fit", &FIT_HEADER);
    out.line("strategy", c.probe.strategy.name());
    out.line("phase_multiplier", c.probe.phase_multiplier()?);
    out.line("mean_photons_per_point", c.photons);
    for (f, &xi) in xis.iter().enumerate() {
        let spec = c.probe.clone().with_xi(xi);
        let base = derive_seed(seed, f as u64);
        let counts: Vec<[u64; 3]> = angles
            .par_iter()
            .enumerate()
            .map(|(i, &t)| {
                let s = derive_seed(base, i as u64);
                let sent = SeededRng::with_stream(s, 1).poisson(c.photons as f64);
                if sent == 0 {
                    return Ok([0; 3]);
                }
                match sample_single_photons(&spec, t, sent, s)?.counts_summary() {
                    CountsSummary::Single { h, v, lost } => Ok([h, v, lost]),
                    _ => unreachable!("single-mode sampler"),
                }
            })
            .collect::<gear_core::Result<_>>()?;
        for (&t, &[h, v, lost]) in angles.iter().zip(&counts) {
            let n = (h + v) as f64;
            let p = h as f64 / n;
            data.push(vec![
                num(xi),
                num(t),
                int(h),
                int(v),
                int(lost),
                num(p),
                num((p * (1.0 - p) / n).sqrt()),
            ]);
        }
        let hs: Vec<u64> = counts.iter().map(|k| k[0]).collect();
        let fit = fit_scan(&FringeScan::from_counts(&angles, &hs)?, c.fit_m)?;
        let series = num(xi);
        push_fit(&mut fits, &series, &fit);
        report_fit(out, &format!("xi={series}"), &fit);
    }
    out.table(&data)?;
    out.sibling_table("fit.csv", &fits)
}
