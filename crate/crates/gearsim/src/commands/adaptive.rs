use std::collections::BTreeMap;
use std::f64::consts::PI;

use gear_core::adaptive::{run_protocol, ProtocolResult};
use gear_core::angle::circular_distance;
use gear_core::rng::{derive_seed, SeededRng};
use rayon::prelude::*;

use super::{describe, Output};
use crate::config::AdaptiveConfig;
use crate::error::Result;
use crate::table::{int, num, Table};

/// True angle of run `r`: the configured one, or uniform from stream 1 of the
/// run seed (the protocol itself draws from stream 0).
pub fn run_angle(c: &AdaptiveConfig, run_seed: u64) -> f64 {
    c.true_theta
        .unwrap_or_else(|| 2.0 * PI * SeededRng::with_stream(run_seed, 1).uniform())
}

/// Distance to θ* modulo the π reflection.
pub fn error_mod_pi(a: f64, b: f64) -> f64 {
    let d = circular_distance(a, b);
    d.min(PI - d)
}

pub(super) fn run(c: &AdaptiveConfig, seed: u64, out: &mut Output) -> Result<()> {
    let results: Vec<(u64, f64, ProtocolResult)> = (0..c.runs as u64)
        .into_par_iter()
        .map(|r| {
            let s = derive_seed(seed, r);
            let theta = run_angle(c, s);
            Ok((s, theta, run_protocol(theta, &c.protocol, s)?))
        })
        .collect::<Result<_>>()?;

    let mut runs = Table::new(
        "adaptive",
        &[
            "run",
            "seed",
            "theta_true",
            "theta_hat",
            "delta_theta",
            "final_candidates",
            "ambiguous",
            "error",
            "error_mod_pi",
            "photons_consumed",
            "m2",
            "m3",
            "fallback2",
            "fallback3",
            "bound3",
        ],
    );
    let mut steps = Table::new(
        "adaptive-steps",
        &[
            "run",
            "step",
            "m",
            "budget",
            "xi",
            "omega_lo",
            "omega_hi",
            "fallback",
            "theta_bar",
            "delta_theta",
            "photons_consumed",
            "candidates_in",
            "candidates_out",
        ],
    );
    let (mut unique, mut correct, mut correct_mod_pi, mut ratio) = (0usize, 0usize, 0usize, 0.0);
    let mut warnings: BTreeMap<String, usize> = BTreeMap::new();
    for (r, (s, theta, res)) in results.iter().enumerate() {
        let last = res.steps.last().expect("three steps");
        let bound = 1.0 / (2.0 * last.plan.m as f64 * (last.plan.budget as f64).sqrt());
        let err = circular_distance(res.theta_hat, *theta);
        let err_pi = error_mod_pi(res.theta_hat, *theta);
        unique += usize::from(!res.ambiguous);
        correct += usize::from(!res.ambiguous && err < 5.0 * res.delta_theta);
        correct_mod_pi += usize::from(err_pi < 5.0 * res.delta_theta);
        ratio += res.delta_theta / bound;
        for w in &res.warnings {
            *warnings.entry(describe(w)).or_default() += 1;
        }
        runs.push(vec![
            r.to_string(),
            int(*s),
            num(*theta),
            num(res.theta_hat),
            num(res.delta_theta),
            res.final_candidates().len().to_string(),
            res.ambiguous.to_string(),
            num(err),
            num(err_pi),
            int(res.photons_consumed),
            res.steps[1].plan.m.to_string(),
            last.plan.m.to_string(),
            res.steps[1].fallback.to_string(),
            last.fallback.to_string(),
            num(bound),
        ]);
        for st in &res.steps {
            steps.push(vec![
                r.to_string(),
                st.plan.step.to_string(),
                st.plan.m.to_string(),
                int(st.plan.budget),
                num(st.plan.xi),
                num(st.plan.omega.lo),
                num(st.plan.omega.hi),
                st.fallback.to_string(),
                num(st.estimate.theta_bar),
                num(st.estimate.delta_theta),
                int(st.estimate.photons_consumed),
                st.candidates_in.len().to_string(),
                st.candidates_out.len().to_string(),
            ]);
        }
    }
    out.table(&runs)?;
    out.sibling_table("steps.csv", &steps)?;

    let n = results.len() as f64;
    out.line("runs", results.len());
    out.line("budgets", format!("{:?}", c.protocol.budgets));
    if let [(_, theta, res)] = results.as_slice() {
        out.line("true_theta", theta);
        out.line("theta_hat", res.theta_hat);
        out.line("delta_theta", res.delta_theta);
        out.line("final_candidates", format!("{:?}", res.final_candidates()));
        out.line("candidate_counts", format!("{:?}", res.candidate_counts()));
    }
    out.line("unique_fraction", unique as f64 / n);
    out.line("correct_fraction", correct as f64 / n);
    out.line("correct_mod_pi_fraction", correct_mod_pi as f64 / n);
    out.line("mean_delta_over_bound", ratio / n);
    for (w, k) in warnings {
        out.line("warning", format!("{w} ({k} runs)"));
    }
    Ok(())
}
