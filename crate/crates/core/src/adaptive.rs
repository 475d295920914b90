//! Three-step adaptive estimation over the full turn `[0, 2π)`.
//!
//! Step 1 runs a classical probe (`m = 1`, `ξ = 0`) on `[0, π/2)` and leaves
//! four reflection candidates. Each later step raises the gear ratio, sets the
//! input phase so the running estimate sits at maximal sensitivity, prunes the
//! candidates by log-likelihood and refines the survivors on their own
//! bijectivity windows.
//!
//! Every gear fringe is π-periodic in θ, so `θ` and `θ + π` can never be told
//! apart by polarization data; a run therefore ends with that pair and reports
//! itself as ambiguous.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::angle::{circular_distance, distance_to_multiple, wrap_pi, wrap_two_pi};
use crate::bayes::{estimate_evidence, log_likelihood, EstimationResult, Evidence, Interval, DEFAULT_GRID_SIZE};
use crate::error::{Error, Result, Warning};
use crate::math::{floor, powf, sqrt, FRAC_PI_2, FRAC_PI_4, PI, TAU};
use crate::probe::ProbeSpec;
use crate::rng::derive_seed;
use crate::sampler::sample_single_photons;

/// Gear ratios of the demonstrated device set.
pub const DEVICE_RATIOS: [u32; 9] = [1, 2, 5, 7, 11, 21, 31, 51, 101];
pub const DEFAULT_BUDGETS: [u64; 3] = [100, 1_000, 10_000];
pub const DEFAULT_PRUNE_WINDOW: f64 = 10.0;
/// Symmetry trigger as a fraction of the step's bijectivity length.
pub const DEFAULT_SYMMETRY_TOLERANCE: f64 = 1.0 / 20.0;

const DEDUP_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepPlan {
    pub step: usize,
    pub m: u32,
    pub budget: u64,
    pub xi: f64,
    pub omega: Interval,
    /// Bijectivity length `π/(2m)`.
    pub period: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolConfig {
    pub budgets: [u64; 3],
    pub available_m: Vec<u32>,
    /// Fixed gear ratios; planned from the budgets when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub charges: Option<[u32; 3]>,
    pub visibility: f64,
    pub transmissivity: f64,
    pub grid_size: usize,
    pub prune_window: f64,
    pub symmetry_tolerance: f64,
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        ProtocolConfig {
            budgets: DEFAULT_BUDGETS,
            available_m: DEVICE_RATIOS.to_vec(),
            charges: None,
            visibility: 1.0,
            transmissivity: 1.0,
            grid_size: DEFAULT_GRID_SIZE,
            prune_window: DEFAULT_PRUNE_WINDOW,
            symmetry_tolerance: DEFAULT_SYMMETRY_TOLERANCE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub plan: StepPlan,
    /// Estimate for the principal candidate.
    pub estimate: EstimationResult,
    pub fallback: bool,
    pub candidates_in: Vec<f64>,
    /// Step log-likelihood at each incoming candidate (empty for step 1).
    pub log_likelihoods: Vec<f64>,
    /// Refined candidates kept after the step, principal first.
    pub candidates_out: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    pub steps: Vec<StepReport>,
    /// Final estimate in `[0, 2π)`.
    pub theta_hat: f64,
    pub delta_theta: f64,
    pub photons_consumed: u64,
    /// More than one candidate is left after the last step.
    pub ambiguous: bool,
    pub warnings: Vec<Warning>,
}

impl ProtocolResult {
    pub fn final_candidates(&self) -> &[f64] {
        self.steps.last().map_or(&[], |s| &s.candidates_out)
    }

    /// Number of candidates after each step.
    pub fn candidate_counts(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.candidates_out.len()).collect()
    }
}

fn next_charge(step: usize, previous: u32, budget: u64, available: &[u32]) -> Result<u32> {
    let ideal = floor(previous as f64 * PI * sqrt(budget as f64)) as u64;
    available
        .iter()
        .copied()
        .filter(|&m| m > previous && (m as u64) <= ideal)
        .max()
        .ok_or(Error::ChargePlan { step, previous, ideal })
}

/// Gear ratios `(m₁, m₂, m₃)`: `m₁ = 1`, then the largest available ratio not
/// above `⌊m_{j−1}·π·√M_{j−1}⌋`.
pub fn plan_charges(m1_budget: u64, m2_budget: u64, available_m: &[u32]) -> Result<[u32; 3]> {
    if !available_m.contains(&1) {
        return Err(Error::InvalidParameter {
            name: "available_m",
            value: 1.0,
            reason: "must contain the classical ratio 1",
        });
    }
    for (name, b) in [("M_1", m1_budget), ("M_2", m2_budget)] {
        if b == 0 {
            return Err(Error::CountTooSmall { name, min: 1, found: 0 });
        }
    }
    let m2 = next_charge(2, 1, m1_budget, available_m)?;
    let m3 = next_charge(3, m2, m2_budget, available_m)?;
    Ok([1, m2, m3])
}

/// Bijectivity length `π/(2m)` of a step with gear ratio `m`.
pub fn bijectivity_length(m: u32) -> f64 {
    PI / (2.0 * m as f64)
}

/// `ξ = π/4 − m·θ_prev` reduced into `[0, π)`.
pub fn adapt_phase(m: u32, theta_prev: f64) -> f64 {
    wrap_pi(FRAC_PI_4 - m as f64 * theta_prev)
}

fn dedup_angles(angles: &mut Vec<f64>) {
    let mut out: Vec<f64> = Vec::with_capacity(angles.len());
    for &a in angles.iter() {
        if !out.iter().any(|&b| circular_distance(a, b) < DEDUP_EPS) {
            out.push(a);
        }
    }
    *angles = out;
}

/// The four angles consistent with a step-1 estimate, deduplicated.
pub fn candidates_step1(theta_bar_1: f64) -> Vec<f64> {
    let t = theta_bar_1;
    let mut c = alloc::vec![wrap_two_pi(t), wrap_two_pi(PI - t), wrap_two_pi(PI + t), wrap_two_pi(TAU - t)];
    dedup_angles(&mut c);
    c
}

/// Indices of the candidates whose log-likelihood is within `window` of the best.
pub fn prune_candidates(log_likelihoods: &[f64], window: f64) -> Vec<usize> {
    let best = log_likelihoods.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (0..log_likelihoods.len())
        .filter(|&i| log_likelihoods[i] >= best - window)
        .collect()
}

/// Step log-likelihood of `evidence` under `spec` at each candidate angle.
pub fn candidate_log_likelihoods(spec: &ProbeSpec, evidence: &Evidence, candidates: &[f64]) -> Result<Vec<f64>> {
    candidates.iter().map(|&c| log_likelihood(spec, evidence, c)).collect()
}

/// Whether `θ_prev` is close enough to a multiple of `T/2` that the adapted
/// phase leaves the reflection candidates with equal likelihoods.
pub fn symmetry_triggered(theta_prev: f64, period: f64, tolerance: f64) -> bool {
    distance_to_multiple(theta_prev, period / 2.0) < tolerance * period
}

/// Returns `(ξ, fired)`: the planned phase, or the planned phase shifted by
/// `m·T/4 = π/8` when the trigger fires.
pub fn symmetry_fallback(xi_planned: f64, theta_prev: f64, period: f64, tolerance: f64) -> (f64, bool) {
    if symmetry_triggered(theta_prev, period, tolerance) {
        let m = PI / (2.0 * period);
        (wrap_pi(xi_planned + m * period / 4.0), true)
    } else {
        (xi_planned, false)
    }
}

/// Step `j` may run only if its bijectivity length covers the previous uncertainty.
pub fn check_resolution_constraint(step: usize, period: f64, previous_uncertainty: f64) -> Result<()> {
    if period >= previous_uncertainty {
        Ok(())
    } else {
        Err(Error::ResolutionConstraint {
            step,
            period,
            previous_uncertainty,
        })
    }
}

/// Window `[lo, lo + π/(2m))` on which `cos²(mθ + ξ)` is monotone and which contains θ.
pub fn bijectivity_window(m: u32, xi: f64, theta: f64) -> Interval {
    let mf = m as f64;
    let k = floor((mf * theta + xi) / FRAC_PI_2);
    let lo = (k * FRAC_PI_2 - xi) / mf;
    Interval {
        lo,
        hi: lo + bijectivity_length(m),
    }
}

fn budget_warning(budgets: [u64; 3]) -> Option<Warning> {
    let [a, b, c] = budgets.map(|x| x as f64);
    if a > sqrt(b) || sqrt(b) > powf(c, 0.25) {
        Some(Warning::BudgetOrdering { budgets })
    } else {
        None
    }
}

fn step_spec(config: &ProtocolConfig, m: u32, xi: f64) -> Result<ProbeSpec> {
    Ok(ProbeSpec::gear(m)?
        .with_xi(xi)
        .with_visibility(config.visibility)
        .with_transmissivity(config.transmissivity))
}

/// Runs the three-step protocol at hidden angle `true_theta`.
///
/// Step `j` draws its photons with seed `derive_seed(seed, j)`.
pub fn run_protocol(true_theta: f64, config: &ProtocolConfig, seed: u64) -> Result<ProtocolResult> {
    for (i, &b) in config.budgets.iter().enumerate() {
        if b == 0 {
            return Err(Error::CountTooSmall {
                name: ["M_1", "M_2", "M_3"][i],
                min: 1,
                found: 0,
            });
        }
    }
    let charges = match config.charges {
        Some(c) => {
            if c[0] == 0 || c[1] <= c[0] || c[2] <= c[1] {
                return Err(Error::InvalidParameter {
                    name: "charges",
                    value: c[0] as f64,
                    reason: "gear ratios must be positive and strictly increasing",
                });
            }
            c
        }
        None => plan_charges(config.budgets[0], config.budgets[1], &config.available_m)?,
    };
    let mut warnings = Vec::new();
    if let Some(w) = budget_warning(config.budgets) {
        warnings.push(w);
    }

    // Step 1.
    let omega1 = Interval::new(0.0, FRAC_PI_2)?;
    let spec1 = step_spec(config, charges[0], 0.0)?;
    let data1 = sample_single_photons(&spec1, true_theta, config.budgets[0], derive_seed(seed, 1))?;
    let evidence1 = Evidence::from_dataset(&data1)?;
    let (est1, _) = estimate_evidence(&spec1, &evidence1, omega1, config.grid_size)?;
    let mut photons = est1.photons_consumed;
    let mut candidates = candidates_step1(est1.theta_bar);
    let mut delta_prev = est1.delta_theta;
    let mut steps = alloc::vec![StepReport {
        plan: StepPlan {
            step: 1,
            m: charges[0],
            budget: config.budgets[0],
            xi: 0.0,
            omega: omega1,
            period: bijectivity_length(charges[0]),
        },
        estimate: est1,
        fallback: false,
        candidates_in: Vec::new(),
        log_likelihoods: Vec::new(),
        candidates_out: candidates.clone(),
    }];

    for j in 2..=3 {
        let m = charges[j - 1];
        let period = bijectivity_length(m);
        check_resolution_constraint(j, period, delta_prev)?;
        let principal = candidates[0];
        let (xi, fallback) = symmetry_fallback(adapt_phase(m, principal), principal, period, config.symmetry_tolerance);
        if fallback {
            warnings.push(Warning::SymmetryFallback { step: j });
        }
        let spec = step_spec(config, m, xi)?;
        let data = sample_single_photons(&spec, true_theta, config.budgets[j - 1], derive_seed(seed, j as u64))?;
        let evidence = Evidence::from_dataset(&data)?;
        photons += evidence.photons();

        let lls = candidate_log_likelihoods(&spec, &evidence, &candidates)?;
        let mut kept = prune_candidates(&lls, config.prune_window);
        // Stable order: best first, ties keep the incoming order.
        kept.sort_by(|&a, &b| lls[b].total_cmp(&lls[a]));
        if kept.len() > 2 {
            warnings.push(Warning::SymmetricCandidates { step: j });
        }

        let mut refined = Vec::with_capacity(kept.len());
        let mut principal_estimate = None;
        for &i in &kept {
            let window = bijectivity_window(m, xi, candidates[i]);
            let (est, _) = estimate_evidence(&spec, &evidence, window, config.grid_size)?;
            refined.push(wrap_two_pi(est.theta_bar));
            if principal_estimate.is_none() {
                principal_estimate = Some(est);
            }
        }
        dedup_angles(&mut refined);
        let estimate = principal_estimate.expect("pruning keeps the best candidate");
        delta_prev = estimate.delta_theta;
        let omega = estimate.interval;
        steps.push(StepReport {
            plan: StepPlan {
                step: j,
                m,
                budget: config.budgets[j - 1],
                xi,
                omega,
                period,
            },
            estimate,
            fallback,
            candidates_in: candidates,
            log_likelihoods: lls,
            candidates_out: refined.clone(),
        });
        candidates = refined;
    }

    Ok(ProtocolResult {
        theta_hat: candidates[0],
        delta_theta: delta_prev,
        photons_consumed: photons,
        ambiguous: candidates.len() > 1,
        steps,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charge_plan_examples() {
        assert_eq!(plan_charges(100, 1000, &DEVICE_RATIOS).unwrap(), [1, 31, 101]);
        assert_eq!(plan_charges(1, 1, &[1, 2, 5, 7]).unwrap()[1], 2);
        assert!(matches!(
            plan_charges(100, 1000, &[1, 31]),
            Err(Error::ChargePlan { step: 3, previous: 31, .. })
        ));
        assert!(plan_charges(100, 100, &[2, 5]).is_err());
        let ideal3 = floor(31.0 * PI * 10.0) as u64;
        assert_eq!(ideal3, 973);
    }

    #[test]
    fn phase_examples() {
        assert!((adapt_phase(7, 0.0) - FRAC_PI_4).abs() < 1e-15);
        assert!(adapt_phase(21, PI / 84.0).abs() < 1e-12 || (adapt_phase(21, PI / 84.0) - PI).abs() < 1e-12);
        let m = 11;
        let t = 0.4321;
        let xi = adapt_phase(m, t);
        let p = crate::probe::fringe_h(m as f64, xi, 1.0, t);
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn step1_candidates() {
        let c = candidates_step1(0.0);
        assert_eq!(c.len(), 2);
        let c = candidates_step1(PI / 6.0);
        let want = [PI / 6.0, 5.0 * PI / 6.0, 7.0 * PI / 6.0, 11.0 * PI / 6.0];
        for (a, b) in c.iter().zip(want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn resolution_and_fallback() {
        assert!(check_resolution_constraint(2, 0.075, 0.01).is_ok());
        assert!(check_resolution_constraint(2, 0.075, 0.08).is_err());
        let t = bijectivity_length(21);
        let (xi, fired) = symmetry_fallback(0.3, t / 2.0, t, DEFAULT_SYMMETRY_TOLERANCE);
        assert!(fired);
        assert!((xi - (0.3 + PI / 8.0)).abs() < 1e-12);
        let (xi, fired) = symmetry_fallback(0.3, t / 4.0, t, DEFAULT_SYMMETRY_TOLERANCE);
        assert!(!fired);
        assert_eq!(xi, 0.3);
    }

    #[test]
    fn window_contains_theta() {
        for &(m, xi, t) in &[(31u32, 0.2, 1.0), (101, 3.0, 5.5), (5, 0.0, 0.0)] {
            let w = bijectivity_window(m, xi, t);
            assert!(w.contains(t), "{m} {xi} {t}: {w:?}");
            assert!((w.length() - bijectivity_length(m)).abs() < 1e-12);
        }
        let xi = adapt_phase(31, 0.7);
        let w = bijectivity_window(31, xi, 0.7);
        assert!(((w.lo + w.hi) / 2.0 - 0.7).abs() < 1e-12);
    }

    #[test]
    fn protocol_bookkeeping() {
        let r = run_protocol(0.0, &ProtocolConfig::default(), 3).unwrap();
        assert_eq!(r.steps.len(), 3);
        assert_eq!(r.photons_consumed, 11_100);
        assert_eq!(r.candidate_counts(), [4, 2, 2]);
        assert!(r.ambiguous);
        let c = r.final_candidates();
        assert!((circular_distance(c[0], c[1]) - PI).abs() < 1e-9);
        let s1 = &r.steps[0].estimate;
        assert!(s1.theta_bar < 3.0 * s1.delta_theta);
        assert!(r.warnings.contains(&Warning::BudgetOrdering { budgets: DEFAULT_BUDGETS }));
    }

    #[test]
    fn resolution_failure_propagates() {
        let config = ProtocolConfig {
            budgets: [4, 1_000, 10_000],
            charges: Some([1, 101, 102]),
            ..ProtocolConfig::default()
        };
        assert!(matches!(run_protocol(0.7, &config, 1), Err(Error::ResolutionConstraint { step: 2, .. })));
    }
}
