//! Sinusoidal fringe fitting.
//!
//! The model is `y(θ) = c·[1 + V·cos(2mθ + 2ξ)]`, fitted in the coordinates
//! `(c, u, w)` with `u = V·cos 2ξ` and `w = V·sin 2ξ`, so
//! `y = c·(1 + u·cos 2mθ − w·sin 2mθ)`. A constant background cannot be told
//! apart from the fringe amplitude, so `c` carries both (`c = A/2`).
//!
//! For a fixed `m` the model is linear in `(c, c·u, c·w)`; that weighted linear
//! solve seeds a damped Gauss-Newton (Levenberg-Marquardt) refinement in
//! `(c, u, w)`, whose curvature gives the standard errors.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Warning};
use crate::math::{atan2, cos, sin, sqrt, FRAC_PI_2, PI};
use crate::probe::PairOutcome;
use crate::sampler::{CountsSummary, Dataset};

pub const MAX_ITERATIONS: usize = 200;
/// Free parameters of the fringe model.
const N_PARAMS: usize = 3;
const MIN_POINTS_PER_HALF_PERIOD: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringePoint {
    pub angle: f64,
    pub value: f64,
    pub sigma: f64,
}

/// Which counts of a dataset form the fringe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Channel {
    H,
    V,
    Pair(PairOutcome),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeScan {
    points: Vec<FringePoint>,
}

impl FringeScan {
    pub fn new(points: Vec<FringePoint>) -> Result<Self> {
        for p in &points {
            if !(p.sigma > 0.0) || !p.angle.is_finite() || !p.value.is_finite() {
                return Err(Error::InvalidParameter {
                    name: "fringe point",
                    value: p.sigma,
                    reason: "needs finite angle and value and a positive error",
                });
            }
        }
        Ok(FringeScan { points })
    }

    /// Count data with Poisson errors `√max(n, 1)`.
    pub fn from_counts(angles: &[f64], counts: &[u64]) -> Result<Self> {
        if angles.len() != counts.len() {
            return Err(Error::InvalidParameter {
                name: "counts length",
                value: counts.len() as f64,
                reason: "must match the number of angles",
            });
        }
        let points = angles
            .iter()
            .zip(counts)
            .map(|(&angle, &n)| FringePoint {
                angle,
                value: n as f64,
                sigma: sqrt((n as f64).max(1.0)),
            })
            .collect();
        FringeScan::new(points)
    }

    /// One point per dataset, at its set angle, counting `channel`.
    pub fn from_datasets(datasets: &[Dataset], channel: Channel) -> Result<Self> {
        let mut angles = Vec::with_capacity(datasets.len());
        let mut counts = Vec::with_capacity(datasets.len());
        for d in datasets {
            let n = match (d.counts_summary(), channel) {
                (CountsSummary::Single { h, .. }, Channel::H) => h,
                (CountsSummary::Single { v, .. }, Channel::V) => v,
                (CountsSummary::Coherent { n_h, .. }, Channel::H) => n_h,
                (CountsSummary::Coherent { n_v, .. }, Channel::V) => n_v,
                (s @ CountsSummary::Pair { .. }, Channel::Pair(o)) => s.pair(o),
                _ => {
                    return Err(Error::WrongStrategy {
                        operation: "fringe channel",
                        strategy: d.spec.strategy,
                    })
                }
            };
            angles.push(d.true_theta);
            counts.push(n);
        }
        FringeScan::from_counts(&angles, &counts)
    }

    pub fn points(&self) -> &[FringePoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Angular extent `max θ − min θ`.
    pub fn span(&self) -> f64 {
        let lo = self.points.iter().map(|p| p.angle).fold(f64::INFINITY, f64::min);
        let hi = self.points.iter().map(|p| p.angle).fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }

    /// Mean number of samples per half-period `π/(2m)` of the fringe.
    pub fn points_per_half_period(&self, m: u32) -> f64 {
        let span = self.span();
        if self.len() < 2 || span <= 0.0 {
            return 0.0;
        }
        let spacing = span / (self.len() - 1) as f64;
        PI / (2.0 * m as f64) / spacing
    }

    /// Frequencies `1..=m_max` that the sampling can resolve: at least two
    /// samples per half-period.
    pub fn default_candidates(&self) -> Vec<u32> {
        let mut m_max = 1u32;
        while self.points_per_half_period(m_max + 1) >= 2.0 {
            m_max += 1;
            if m_max == u32::MAX - 1 {
                break;
            }
        }
        (1..=m_max).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitErrors {
    pub offset: f64,
    pub visibility: f64,
    pub xi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeFitResult {
    pub m: u32,
    /// Clamped to `[0, 1]`.
    pub visibility: f64,
    /// Phase in `[0, π)`.
    pub xi: f64,
    /// Mean level `c = A/2`.
    pub offset: f64,
    pub chi2: f64,
    pub dof: usize,
    pub stderr: FitErrors,
    pub iterations: usize,
    pub warnings: Vec<Warning>,
}

impl FringeFitResult {
    pub fn chi2_per_dof(&self) -> f64 {
        if self.dof == 0 {
            f64::NAN
        } else {
            self.chi2 / self.dof as f64
        }
    }

    /// Fitted curve at `θ`.
    pub fn evaluate(&self, theta: f64) -> f64 {
        self.offset * (1.0 + self.visibility * cos(2.0 * self.m as f64 * theta + 2.0 * self.xi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyScan {
    pub best: u32,
    /// `(m, χ²)` for every candidate, in ascending `m`.
    pub chi2: Vec<(u32, f64)>,
    pub warnings: Vec<Warning>,
}

type Mat3 = [[f64; 3]; 3];

fn solve3(a: &Mat3, b: &[f64; 3]) -> Option<[f64; 3]> {
    let mut m = *a;
    let mut x = *b;
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        x.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= f * m[col][k];
            }
            x[row] -= f * x[col];
        }
    }
    let mut out = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| m[row][k] * out[k]).sum();
        out[row] = (x[row] - s) / m[row][row];
    }
    Some(out)
}

fn invert3(a: &Mat3) -> Option<Mat3> {
    let mut inv = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut e = [0.0; 3];
        e[j] = 1.0;
        let col = solve3(a, &e)?;
        for i in 0..3 {
            inv[i][j] = col[i];
        }
    }
    Some(inv)
}

struct Basis {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

fn basis(scan: &FringeScan, m: u32) -> Basis {
    let k = 2.0 * m as f64;
    Basis {
        cos: scan.points.iter().map(|p| cos(k * p.angle)).collect(),
        sin: scan.points.iter().map(|p| sin(k * p.angle)).collect(),
    }
}

fn chi2(scan: &FringeScan, b: &Basis, p: &[f64; 3]) -> f64 {
    let [c, u, w] = *p;
    scan.points
        .iter()
        .enumerate()
        .map(|(i, pt)| {
            let r = (pt.value - c * (1.0 + u * b.cos[i] - w * b.sin[i])) / pt.sigma;
            r * r
        })
        .sum()
}

/// `(JᵀWJ, JᵀWr)` of the model in `(c, u, w)`.
fn normal_equations(scan: &FringeScan, b: &Basis, p: &[f64; 3]) -> (Mat3, [f64; 3]) {
    let [c, u, w] = *p;
    let mut jtj = [[0.0; 3]; 3];
    let mut jtr = [0.0; 3];
    for (i, pt) in scan.points.iter().enumerate() {
        let wt = 1.0 / (pt.sigma * pt.sigma);
        let shape = 1.0 + u * b.cos[i] - w * b.sin[i];
        let j = [shape, c * b.cos[i], -c * b.sin[i]];
        let r = pt.value - c * shape;
        for a in 0..3 {
            jtr[a] += wt * j[a] * r;
            for bb in 0..3 {
                jtj[a][bb] += wt * j[a] * j[bb];
            }
        }
    }
    (jtj, jtr)
}

/// Weighted linear solve for `(c, c·u, c·w)`.
fn linear_guess(scan: &FringeScan, b: &Basis) -> Option<[f64; 3]> {
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for (i, pt) in scan.points.iter().enumerate() {
        let wt = 1.0 / (pt.sigma * pt.sigma);
        let row = [1.0, b.cos[i], -b.sin[i]];
        for a in 0..3 {
            aty[a] += wt * row[a] * pt.value;
            for bb in 0..3 {
                ata[a][bb] += wt * row[a] * row[bb];
            }
        }
    }
    let [c, cu, cw] = solve3(&ata, &aty)?;
    if c.abs() < 1e-300 {
        return Some([c, 0.0, 0.0]);
    }
    Some([c, cu / c, cw / c])
}

fn degenerate(m: u32) -> Error {
    Error::InvalidParameter {
        name: "fringe frequency",
        value: m as f64,
        reason: "design matrix is singular for these sample angles",
    }
}

fn fit_fixed(scan: &FringeScan, m: u32) -> Result<FringeFitResult> {
    let b = basis(scan, m);
    let mut p = linear_guess(scan, &b).ok_or_else(|| degenerate(m))?;
    let mut current = chi2(scan, &b, &p);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (jtj, jtr) = normal_equations(scan, &b, &p);
        let mut damped = jtj;
        for (d, row) in damped.iter_mut().enumerate() {
            row[d] += lambda * jtj[d][d].max(1e-300);
        }
        let Some(step) = solve3(&damped, &jtr) else {
            break;
        };
        let trial = [p[0] + step[0], p[1] + step[1], p[2] + step[2]];
        let next = chi2(scan, &b, &trial);
        if next <= current {
            let gain = current - next;
            p = trial;
            current = next;
            lambda = (lambda / 10.0).max(1e-12);
            let scale = p.iter().map(|x| x.abs()).fold(1.0, f64::max);
            let size = step.iter().map(|x| x.abs()).fold(0.0, f64::max);
            if gain <= 1e-12 * (1.0 + current) || size <= 1e-14 * scale {
                converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                converged = true;
                break;
            }
        }
    }

    let (jtj, _) = normal_equations(scan, &b, &p);
    let cov = invert3(&jtj);
    let [c, u, w] = p;
    let v = sqrt(u * u + w * w);
    let xi = crate::angle::wrap_pi(atan2(w, u) / 2.0);
    let stderr = match cov {
        Some(cov) => {
            let var = |i: usize| cov[i][i].max(0.0);
            let sigma_v = if v > 0.0 {
                let g = [u / v, w / v];
                sqrt((g[0] * g[0] * cov[1][1] + 2.0 * g[0] * g[1] * cov[1][2] + g[1] * g[1] * cov[2][2]).max(0.0))
            } else {
                sqrt((var(1) + var(2)) / 2.0)
            };
            let sigma_xi = if v > 0.0 {
                let g = [-w / (2.0 * v * v), u / (2.0 * v * v)];
                sqrt((g[0] * g[0] * cov[1][1] + 2.0 * g[0] * g[1] * cov[1][2] + g[1] * g[1] * cov[2][2]).max(0.0))
            } else {
                FRAC_PI_2
            };
            FitErrors {
                offset: sqrt(var(0)),
                visibility: sigma_v,
                xi: sigma_xi,
            }
        }
        None => FitErrors {
            offset: f64::INFINITY,
            visibility: f64::INFINITY,
            xi: f64::INFINITY,
        },
    };

    let mut warnings = Vec::new();
    let density = scan.points_per_half_period(m);
    if density < MIN_POINTS_PER_HALF_PERIOD {
        warnings.push(Warning::SparseSampling {
            points_per_half_period: density,
        });
    }
    let result = FringeFitResult {
        m,
        visibility: v.clamp(0.0, 1.0),
        xi,
        offset: c,
        chi2: current,
        dof: scan.len() - N_PARAMS,
        stderr,
        iterations,
        warnings,
    };
    if converged {
        Ok(result)
    } else {
        Err(Error::FitNotConverged {
            iterations,
            best: alloc::boxed::Box::new(result),
        })
    }
}

fn check_points(scan: &FringeScan) -> Result<()> {
    let min = 4 * N_PARAMS;
    if scan.len() < min {
        return Err(Error::CountTooSmall {
            name: "fringe points",
            min: min as u64,
            found: scan.len() as u64,
        });
    }
    Ok(())
}

/// Fits the fringe model at a fixed frequency, or picks the frequency from the
/// resolvable candidates when `m_fixed` is `None`.
pub fn fit_fringe(scan: &FringeScan, m_fixed: Option<u32>) -> Result<FringeFitResult> {
    match m_fixed {
        Some(m) => {
            check_points(scan)?;
            if m == 0 {
                return Err(degenerate(0));
            }
            fit_fixed(scan, m)
        }
        None => fit_fringe_among(scan, &scan.default_candidates()),
    }
}

/// Selects `m` from `candidates` by [`frequency_scan`], then fits at that `m`.
/// Scan warnings are carried over to the result.
pub fn fit_fringe_among(scan: &FringeScan, candidates: &[u32]) -> Result<FringeFitResult> {
    let fs = frequency_scan(scan, candidates)?;
    let mut fit = fit_fixed(scan, fs.best)?;
    fit.warnings.extend(fs.warnings);
    Ok(fit)
}

/// Candidate frequency with the smallest fitted χ²; ties go to the smaller `m`.
pub fn frequency_scan(scan: &FringeScan, candidates: &[u32]) -> Result<FrequencyScan> {
    check_points(scan)?;
    let mut ms: Vec<u32> = candidates.iter().copied().filter(|&m| m > 0).collect();
    ms.sort_unstable();
    ms.dedup();
    if ms.is_empty() {
        return Err(Error::CountTooSmall {
            name: "frequency candidates",
            min: 1,
            found: 0,
        });
    }
    let mut table = Vec::with_capacity(ms.len());
    for &m in &ms {
        let c2 = match fit_fixed(scan, m) {
            Ok(f) => f.chi2,
            Err(Error::FitNotConverged { best, .. }) => best.chi2,
            Err(_) => f64::INFINITY,
        };
        table.push((m, c2));
    }
    let mut best = 0;
    for i in 1..table.len() {
        if table[i].1 < table[best].1 {
            best = i;
        }
    }
    let mut warnings = Vec::new();
    let runner_up = (0..table.len())
        .filter(|&i| i != best)
        .min_by(|&i, &j| table[i].1.total_cmp(&table[j].1));
    if let Some(r) = runner_up {
        let delta = table[r].1 - table[best].1;
        if delta < 1.0 {
            warnings.push(Warning::AmbiguousFrequency {
                best: table[best].0,
                runner_up: table[r].0,
                delta_chi2: delta,
            });
        }
    }
    Ok(FrequencyScan {
        best: table[best].0,
        chi2: table,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(m: u32, v: f64, xi: f64, level: f64, n: usize, span: f64) -> FringeScan {
        let points = (0..n)
            .map(|i| {
                let angle = span * i as f64 / (n - 1) as f64;
                let value = level * (1.0 + v * cos(2.0 * m as f64 * angle + 2.0 * xi));
                FringePoint {
                    angle,
                    value,
                    sigma: sqrt(value.max(1.0)),
                }
            })
            .collect();
        FringeScan::new(points).unwrap()
    }

    #[test]
    fn noiseless_fit_is_exact() {
        let scan = synthetic(18, 0.826, 0.3, 500.0, 200, PI / 2.0);
        let fit = fit_fringe(&scan, Some(18)).unwrap();
        assert!((fit.visibility - 0.826).abs() < 1e-9);
        assert!((fit.xi - 0.3).abs() < 1e-9);
        assert!((fit.offset - 500.0).abs() < 1e-7);
        assert!(fit.chi2 < 1e-12);
    }

    #[test]
    fn frequency_is_recovered() {
        let scan = synthetic(18, 0.826, 0.1, 500.0, 300, PI / 2.0);
        let fs = frequency_scan(&scan, &[9, 17, 18, 19]).unwrap();
        assert_eq!(fs.best, 18);
        assert!(fs.warnings.is_empty());
    }

    #[test]
    fn constant_data_is_ambiguous() {
        let scan = synthetic(1, 0.0, 0.0, 100.0, 64, PI);
        let fs = frequency_scan(&scan, &[3, 5, 7]).unwrap();
        assert_eq!(fs.best, 3);
        assert!(matches!(fs.warnings[0], Warning::AmbiguousFrequency { .. }));
        let fit = fit_fringe(&scan, Some(5)).unwrap();
        assert!(fit.visibility < 1e-9);
    }

    #[test]
    fn too_few_points() {
        let scan = synthetic(1, 0.5, 0.0, 100.0, 11, PI);
        assert!(matches!(fit_fringe(&scan, Some(1)), Err(Error::CountTooSmall { .. })));
    }

    #[test]
    fn sparse_sampling_warns() {
        let scan = synthetic(21, 0.9, 0.0, 100.0, 40, PI / 2.0);
        let fit = fit_fringe(&scan, Some(21)).unwrap();
        assert!(fit.warnings.iter().any(|w| matches!(w, Warning::SparseSampling { .. })));
    }
}
