//! Grid Bayesian estimation on a bijectivity interval Ω.
//!
//! The log posterior is accumulated per node from sufficient statistics (the
//! H/V totals, or the summed photon counts of coherent pulses), a log prior is
//! added, and the grid is normalised with log-sum-exp. Posterior moments use
//! the trapezoidal rule on a uniform grid that includes both endpoints of Ω.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{ln, log_sum_exp, exp, sqrt, xlogy, TAU};
use crate::probe::{
    coherent_channel_means, conditional_probability, Polarization, ProbeSpec, SingleOutcome, Strategy,
};
use crate::sampler::{CountsSummary, Dataset};

pub const DEFAULT_GRID_SIZE: usize = 1024;
pub const MIN_GRID_SIZE: usize = 256;

/// Half-open angle interval `[lo, hi)`. `lo` may be negative or `hi` exceed
/// 2π; angles are unwrapped locally and wrapped only when reported.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let len = hi - lo;
        if !(len > 0.0 && len <= TAU + 1e-12) || !lo.is_finite() {
            return Err(Error::InvalidParameter {
                name: "omega length",
                value: len,
                reason: "must lie in (0, 2π]",
            });
        }
        Ok(Interval { lo, hi })
    }

    pub fn centered(center: f64, length: f64) -> Result<Self> {
        Interval::new(center - length / 2.0, center + length / 2.0)
    }

    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, theta: f64) -> bool {
        (self.lo..self.hi).contains(&theta)
    }
}

/// Sufficient statistics of a dataset for the angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Evidence {
    /// Detected H and V photons; losses carry no angle information.
    Polarization { h: u64, v: u64 },
    /// Summed counts over `pulses` coherent pulses.
    Coherent { pulses: u64, n_h: u64, n_v: u64 },
}

impl Evidence {
    pub fn from_dataset(dataset: &Dataset) -> Result<Self> {
        match dataset.counts_summary() {
            CountsSummary::Single { h, v, .. } => Ok(Evidence::Polarization { h, v }),
            CountsSummary::Coherent { pulses, n_h, n_v } => Ok(Evidence::Coherent { pulses, n_h, n_v }),
            CountsSummary::Pair { .. } => Err(Error::WrongStrategy {
                operation: "posterior",
                strategy: Strategy::EntangledPair,
            }),
        }
    }

    pub fn photons(&self) -> u64 {
        match *self {
            Evidence::Polarization { h, v } => h + v,
            Evidence::Coherent { n_h, n_v, .. } => n_h + n_v,
        }
    }
}

/// `p(x|θ)` of one single-photon outcome; a Lost photon has likelihood 1.
pub fn likelihood(outcome: SingleOutcome, theta: f64, spec: &ProbeSpec) -> Result<f64> {
    match outcome {
        SingleOutcome::H => conditional_probability(spec, Polarization::H, theta),
        SingleOutcome::V => conditional_probability(spec, Polarization::V, theta),
        SingleOutcome::Lost => Ok(1.0),
    }
}

/// Log-likelihood of the evidence at θ, up to θ-independent constants.
pub fn log_likelihood(spec: &ProbeSpec, evidence: &Evidence, theta: f64) -> Result<f64> {
    match *evidence {
        Evidence::Polarization { h, v } => {
            let p_h = conditional_probability(spec, Polarization::H, theta)?;
            Ok(xlogy(h as f64, p_h) + xlogy(v as f64, 1.0 - p_h))
        }
        Evidence::Coherent { pulses, n_h, n_v } => {
            let (lh, lv) = coherent_channel_means(spec, theta)?;
            Ok(xlogy(n_h as f64, lh) + xlogy(n_v as f64, lv) - pulses as f64 * (lh + lv))
        }
    }
}

/// Discretised a-posteriori distribution over Ω.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorGrid {
    omega: Interval,
    nodes: Vec<f64>,
    log_weights: Vec<f64>,
    normalized_weights: Vec<f64>,
}

impl PosteriorGrid {
    pub fn omega(&self) -> Interval {
        self.omega
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Unnormalised log posterior per node.
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// Quadrature masses per node; they sum to 1.
    pub fn normalized_weights(&self) -> &[f64] {
        &self.normalized_weights
    }

    pub fn step(&self) -> f64 {
        self.omega.length() / (self.nodes.len() - 1) as f64
    }

    /// Posterior density at each node (integrates to 1 over Ω).
    pub fn density(&self) -> Vec<f64> {
        let h = self.step();
        let last = self.nodes.len() - 1;
        self.normalized_weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let c = if i == 0 || i == last { 0.5 } else { 1.0 };
                w / (c * h)
            })
            .collect()
    }
}

fn grid_nodes(omega: Interval, grid_size: usize) -> Vec<f64> {
    let h = omega.length() / (grid_size - 1) as f64;
    (0..grid_size).map(|i| omega.lo + i as f64 * h).collect()
}

fn normalize(omega: Interval, nodes: Vec<f64>, log_weights: Vec<f64>) -> Result<PosteriorGrid> {
    let last = nodes.len() - 1;
    let ln_half = ln(0.5);
    let scaled: Vec<f64> = log_weights
        .iter()
        .enumerate()
        .map(|(i, &l)| if i == 0 || i == last { l + ln_half } else { l })
        .collect();
    let total = log_sum_exp(&scaled);
    if total == f64::NEG_INFINITY || total.is_nan() {
        return Err(Error::DegeneratePosterior);
    }
    let normalized_weights = scaled.iter().map(|&l| exp(l - total)).collect();
    Ok(PosteriorGrid {
        omega,
        nodes,
        log_weights,
        normalized_weights,
    })
}

fn check_grid(grid_size: usize) -> Result<()> {
    if grid_size < MIN_GRID_SIZE {
        return Err(Error::CountTooSmall {
            name: "grid_size",
            min: MIN_GRID_SIZE as u64,
            found: grid_size as u64,
        });
    }
    Ok(())
}

/// Posterior from sufficient statistics. A missing prior means uniform on Ω.
pub fn posterior_from_evidence(
    spec: &ProbeSpec,
    evidence: &Evidence,
    omega: Interval,
    grid_size: usize,
    prior: Option<&[f64]>,
) -> Result<PosteriorGrid> {
    check_grid(grid_size)?;
    if let Some(p) = prior {
        if p.len() != grid_size {
            return Err(Error::PriorLength {
                expected: grid_size,
                found: p.len(),
            });
        }
    }
    let nodes = grid_nodes(omega, grid_size);
    let mut log_weights = Vec::with_capacity(grid_size);
    for (i, &theta) in nodes.iter().enumerate() {
        let mut l = log_likelihood(spec, evidence, theta)?;
        if let Some(p) = prior {
            l += ln(p[i]);
        }
        log_weights.push(l);
    }
    normalize(omega, nodes, log_weights)
}

/// Posterior over Ω from a dataset; Lost records are dropped up front.
pub fn posterior(dataset: &Dataset, omega: Interval, grid_size: usize, prior: Option<&[f64]>) -> Result<PosteriorGrid> {
    let evidence = Evidence::from_dataset(dataset)?;
    posterior_from_evidence(&dataset.spec, &evidence, omega, grid_size, prior)
}

/// Posterior from precomputed per-node log-likelihood terms.
///
/// `log_terms[k][i]` is the log-likelihood contribution of outcome class `k`
/// at node `i`; `counts[k]` multiplies it. Repeated estimation at a fixed probe
/// and grid reuses the terms instead of re-evaluating the fringe law.
pub fn posterior_from_terms(
    omega: Interval,
    log_terms: &[&[f64]],
    counts: &[u64],
) -> Result<PosteriorGrid> {
    let grid_size = log_terms.first().map_or(0, |t| t.len());
    check_grid(grid_size)?;
    let nodes = grid_nodes(omega, grid_size);
    let log_weights = (0..grid_size)
        .map(|i| {
            log_terms
                .iter()
                .zip(counts)
                .map(|(t, &n)| xlogy_terms(n, t[i]))
                .sum()
        })
        .collect();
    normalize(omega, nodes, log_weights)
}

#[inline]
fn xlogy_terms(n: u64, log_p: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * log_p
    }
}

/// Posterior mean `∫ θ P(θ|X) dθ` over Ω.
pub fn estimate(grid: &PosteriorGrid) -> f64 {
    grid.nodes
        .iter()
        .zip(&grid.normalized_weights)
        .map(|(t, w)| t * w)
        .sum()
}

/// Posterior standard deviation `√∫ (θ − θ̄)² P(θ|X) dθ` over Ω.
pub fn uncertainty(grid: &PosteriorGrid, theta_bar: f64) -> f64 {
    let var: f64 = grid
        .nodes
        .iter()
        .zip(&grid.normalized_weights)
        .map(|(t, w)| (t - theta_bar) * (t - theta_bar) * w)
        .sum();
    sqrt(var)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    pub theta_bar: f64,
    pub delta_theta: f64,
    pub m_used: u32,
    pub xi_used: f64,
    pub photons_consumed: u64,
    pub interval: Interval,
}

/// Builds the posterior over Ω and returns its mean and spread.
pub fn estimate_dataset(dataset: &Dataset, omega: Interval, grid_size: usize) -> Result<(EstimationResult, PosteriorGrid)> {
    let evidence = Evidence::from_dataset(dataset)?;
    estimate_evidence(&dataset.spec, &evidence, omega, grid_size)
}

pub fn estimate_evidence(
    spec: &ProbeSpec,
    evidence: &Evidence,
    omega: Interval,
    grid_size: usize,
) -> Result<(EstimationResult, PosteriorGrid)> {
    let grid = posterior_from_evidence(spec, evidence, omega, grid_size, None)?;
    let theta_bar = estimate(&grid);
    let result = EstimationResult {
        theta_bar,
        delta_theta: uncertainty(&grid, theta_bar),
        m_used: spec.phase_multiplier()?,
        xi_used: spec.xi,
        photons_consumed: evidence.photons(),
        interval: omega,
    };
    Ok((result, grid))
}
