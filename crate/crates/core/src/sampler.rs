//! Seeded synthetic measurement records for every probe strategy.
//!
//! A record sequence is generated sequentially from one [`SeededRng`] stream,
//! so `(spec, θ*, length, seed)` fixes it bit for bit. Single photons and pairs
//! consume exactly one uniform per record; coherent pulses draw `n_H` then
//! `n_V` from Poisson laws.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probe::{
    coherent_channel_means, conditional_probability, pair_detection_probability, CoherentCounts, PairOutcome,
    Polarization, ProbeSpec, SingleOutcome, Strategy,
};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Records {
    Single(Vec<SingleOutcome>),
    Coherent(Vec<CoherentCounts>),
    Pair(Vec<PairOutcome>),
}

impl Records {
    pub fn len(&self) -> usize {
        match self {
            Records::Single(r) => r.len(),
            Records::Coherent(r) => r.len(),
            Records::Pair(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn summarize(&self) -> CountsSummary {
        match self {
            Records::Single(r) => {
                let (mut h, mut v, mut lost) = (0, 0, 0);
                for o in r {
                    match o {
                        SingleOutcome::H => h += 1,
                        SingleOutcome::V => v += 1,
                        SingleOutcome::Lost => lost += 1,
                    }
                }
                CountsSummary::Single { h, v, lost }
            }
            Records::Coherent(r) => CountsSummary::Coherent {
                pulses: r.len() as u64,
                n_h: r.iter().map(|c| c.n_h).sum(),
                n_v: r.iter().map(|c| c.n_v).sum(),
            },
            Records::Pair(r) => {
                let mut counts = [0u64; 7];
                for o in r {
                    counts[o.index()] += 1;
                }
                CountsSummary::Pair { counts }
            }
        }
    }
}

/// Per-label totals of a record sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CountsSummary {
    Single { h: u64, v: u64, lost: u64 },
    Coherent { pulses: u64, n_h: u64, n_v: u64 },
    /// Indexed by [`PairOutcome::index`].
    Pair { counts: [u64; 7] },
}

impl CountsSummary {
    /// Number of records summarised.
    pub fn records(&self) -> u64 {
        match *self {
            CountsSummary::Single { h, v, lost } => h + v + lost,
            CountsSummary::Coherent { pulses, .. } => pulses,
            CountsSummary::Pair { counts } => counts.iter().sum(),
        }
    }

    pub fn lost(&self) -> u64 {
        match *self {
            CountsSummary::Single { lost, .. } => lost,
            CountsSummary::Coherent { .. } => 0,
            CountsSummary::Pair { counts } => counts[4..].iter().sum(),
        }
    }

    pub fn pair(&self, outcome: PairOutcome) -> u64 {
        match self {
            CountsSummary::Pair { counts } => counts[outcome.index()],
            _ => 0,
        }
    }
}

/// A seeded synthetic measurement record with its generating parameters.
///
/// `true_theta` is the hidden angle (θ_A for pairs). Estimators receive the
/// dataset but by convention never read it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub spec: ProbeSpec,
    pub true_theta: f64,
    pub true_theta_b: Option<f64>,
    pub seed: u64,
    records: Records,
    counts_summary: CountsSummary,
}

impl Dataset {
    pub fn from_parts(spec: ProbeSpec, true_theta: f64, true_theta_b: Option<f64>, seed: u64, records: Records) -> Self {
        let counts_summary = records.summarize();
        Dataset {
            spec,
            true_theta,
            true_theta_b,
            seed,
            records,
            counts_summary,
        }
    }

    pub fn records(&self) -> &Records {
        &self.records
    }

    pub fn counts_summary(&self) -> CountsSummary {
        self.counts_summary
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}

fn require_count(name: &'static str, n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::CountTooSmall { name, min: 1, found: 0 })
    } else {
        Ok(())
    }
}

/// Draws `photons` independent single-photon detections at angle `true_theta`.
///
/// Each record is Lost with probability `1 − η`, otherwise H or V from the
/// strategy's fringe law.
pub fn sample_single_photons(spec: &ProbeSpec, true_theta: f64, photons: u64, seed: u64) -> Result<Dataset> {
    require_count("photons", photons)?;
    if !spec.strategy.is_single_mode() {
        return Err(Error::WrongStrategy {
            operation: "sample_single_photons",
            strategy: spec.strategy,
        });
    }
    spec.validate()?;
    let eta = spec.transmissivity;
    let threshold_h = eta * conditional_probability(spec, Polarization::H, true_theta)?;
    let mut rng = SeededRng::new(seed);
    let records = (0..photons)
        .map(|_| {
            let u = rng.uniform();
            if u < threshold_h {
                SingleOutcome::H
            } else if u < eta {
                SingleOutcome::V
            } else {
                SingleOutcome::Lost
            }
        })
        .collect();
    Ok(Dataset::from_parts(spec.clone(), true_theta, None, seed, Records::Single(records)))
}

/// Draws H/V photon counts for `pulses` coherent pulses.
pub fn sample_coherent(spec: &ProbeSpec, true_theta: f64, pulses: u64, seed: u64) -> Result<Dataset> {
    require_count("pulses", pulses)?;
    spec.validate()?;
    let (lambda_h, lambda_v) = coherent_channel_means(spec, true_theta)?;
    let mut rng = SeededRng::new(seed);
    let records = (0..pulses)
        .map(|_| {
            let n_h = rng.poisson(lambda_h);
            let n_v = rng.poisson(lambda_v);
            CoherentCounts { n_h, n_v }
        })
        .collect();
    Ok(Dataset::from_parts(spec.clone(), true_theta, None, seed, Records::Coherent(records)))
}

/// Draws coincidence labels for `pairs` entangled pairs at stage angles `(θ_A, θ_B)`.
pub fn sample_entangled(spec: &ProbeSpec, theta_a: f64, theta_b: f64, pairs: u64, seed: u64) -> Result<Dataset> {
    require_count("pairs", pairs)?;
    if spec.strategy != Strategy::EntangledPair {
        return Err(Error::WrongStrategy {
            operation: "sample_entangled",
            strategy: spec.strategy,
        });
    }
    spec.validate()?;
    let mut probs = [0.0; 7];
    for o in PairOutcome::ALL {
        probs[o.index()] = pair_detection_probability(spec, theta_a, theta_b, o)?;
    }
    let mut rng = SeededRng::new(seed);
    let records = (0..pairs).map(|_| PairOutcome::ALL[rng.categorical(&probs)]).collect();
    Ok(Dataset::from_parts(spec.clone(), theta_a, Some(theta_b), seed, Records::Pair(records)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::PI;
    use crate::probe::BellState;

    #[test]
    fn all_h_at_fringe_maximum() {
        let spec = ProbeSpec::gear(7).unwrap();
        let d = sample_single_photons(&spec, 0.0, 2_000, 1).unwrap();
        assert_eq!(d.counts_summary(), CountsSummary::Single { h: 2_000, v: 0, lost: 0 });
    }

    #[test]
    fn summary_matches_length() {
        let spec = ProbeSpec::gear(3).unwrap().with_transmissivity(0.6);
        let d = sample_single_photons(&spec, 0.3, 777, 9).unwrap();
        assert_eq!(d.counts_summary().records(), d.len() as u64);
    }

    #[test]
    fn zero_budget_rejected() {
        let spec = ProbeSpec::gear(3).unwrap();
        assert!(sample_single_photons(&spec, 0.0, 0, 1).is_err());
        let c = ProbeSpec::coherent(3, 2.0).unwrap();
        assert!(sample_coherent(&c, 0.0, 0, 1).is_err());
        let e = ProbeSpec::entangled(BellState::PsiMinus, 3, 3).unwrap();
        assert!(sample_entangled(&e, 0.0, 0.0, 0, 1).is_err());
        assert!(sample_entangled(&spec, 0.0, 0.0, 10, 1).is_err());
    }

    #[test]
    fn half_transmission_survivors() {
        let spec = ProbeSpec::gear(7).unwrap().with_transmissivity(0.5);
        let d = sample_single_photons(&spec, 0.2, 10_000, 3).unwrap();
        let lost = d.counts_summary().lost() as f64;
        assert!((10_000.0 - lost - 5000.0).abs() < 200.0);
    }

    #[test]
    fn vacuum_coherent_pulses() {
        let spec = ProbeSpec::coherent(5, 0.0).unwrap();
        let d = sample_coherent(&spec, 0.4, 100, 2).unwrap();
        assert_eq!(d.counts_summary(), CountsSummary::Coherent { pulses: 100, n_h: 0, n_v: 0 });
    }

    #[test]
    fn singlet_anticorrelation() {
        let spec = ProbeSpec::entangled(BellState::PsiMinus, 7, 7).unwrap();
        let d = sample_entangled(&spec, 0.37, 0.37, 5_000, 4).unwrap();
        let s = d.counts_summary();
        assert_eq!(s.pair(PairOutcome::HH) + s.pair(PairOutcome::VV), 0);

        let spec = ProbeSpec::entangled(BellState::PhiMinus, 1, 1).unwrap();
        let d = sample_entangled(&spec, PI / 4.0, PI / 4.0, 5_000, 4).unwrap();
        let s = d.counts_summary();
        assert_eq!(s.pair(PairOutcome::HV) + s.pair(PairOutcome::VH), 0);
    }
}
