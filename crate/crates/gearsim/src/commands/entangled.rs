use gear_core::fringe::FringeScan;
use gear_core::probe::PairOutcome;
use gear_core::rng::{derive_seed, SeededRng};
use gear_core::sampler::{sample_entangled, CountsSummary};
use rayon::prelude::*;

use super::{fit_scan, push_fit, report_fit, Output, FIT_HEADER};
use crate::config::EntangledConfig;
use crate::error::Result;
use crate::table::{int, num, Table};

pub(super) fn run(c: &EntangledConfig, seed: u64, out: &mut Output) -> Result<()> {
    let a = c.sweep_a.angles();
    let grid: Vec<(f64, f64)> = match &c.sweep_b {
        None => a.iter().map(|&t| (t, t)).collect(),
        Some(sb) => {
            let b = sb.angles();
            a.iter().flat_map(|&ta| b.iter().map(move |&tb| (ta, tb))).collect()
        }
    };
    let counts: Vec<[u64; 7]> = grid
        .par_iter()
        .enumerate()
        .map(|(i, &(ta, tb))| {
            let s = derive_seed(seed, i as u64);
            let sent = SeededRng::with_stream(s, 1).poisson(c.pairs as f64);
            if sent == 0 {
                return Ok([0; 7]);
            }
            match sample_entangled(&c.probe, ta, tb, sent, s)?.counts_summary() {
                CountsSummary::Pair { counts } => Ok(counts),
                _ => unreachable!("pair sampler"),
            }
        })
        .collect::<gear_core::Result<_>>()?;

    let mut t = Table::new(
        "entangled",
        &["theta_a", "theta_b", "hh", "hv", "vh", "vv", "lost", "f_hh", "f_hv", "f_vh", "f_vv"],
    );
    for (&(ta, tb), k) in grid.iter().zip(&counts) {
        let det: u64 = k[..4].iter().sum();
        let mut row = vec![num(ta), num(tb)];
        row.extend(k[..4].iter().map(|&n| int(n)));
        row.push(int(k[4..].iter().sum::<u64>()));
        row.extend(k[..4].iter().map(|&n| num(n as f64 / det as f64)));
        t.push(row);
    }
    out.table(&t)?;

    let hh = PairOutcome::HH.index();
    let (ma, mb) = c.probe.arm_ratios()?;
    out.line("bell_state", format!("{:?}", c.probe.bell_state));
    out.line("m_a", ma);
    out.line("m_b", mb);
    let mut fits = Table::new("entangled-fit", &FIT_HEADER);
    let mut series: Vec<(String, FringeScan)> = Vec::new();
    match &c.sweep_b {
        None => {
            let ys: Vec<u64> = counts.iter().map(|k| k[hh]).collect();
            series.push(("hh".into(), FringeScan::from_counts(&a, &ys)?));
        }
        Some(sb) => {
            let nb = sb.points;
            let b = sb.angles();
            let along_a: Vec<u64> = (0..a.len()).map(|i| counts[i * nb][hh]).collect();
            let along_b: Vec<u64> = (0..nb).map(|j| counts[j][hh]).collect();
            series.push((format!("hh@theta_b={}", num(b[0])), FringeScan::from_counts(&a, &along_a)?));
            series.push((format!("hh@theta_a={}", num(a[0])), FringeScan::from_counts(&b, &along_b)?));
        }
    }
    for (name, scan) in &series {
        let fit = fit_scan(scan, c.fit_m)?;
        push_fit(&mut fits, name, &fit);
        report_fit(out, name, &fit);
    }
    out.sibling_table("fit.csv", &fits)
}
