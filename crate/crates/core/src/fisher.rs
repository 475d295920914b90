//! Fisher information and Cramér-Rao bounds for every probe strategy.
//!
//! Information is reported per photon sent, so losses show up as a factor
//! `η` and the bound is `Δθ ≥ 1/√(ν·N·f)` for ν probes of N photons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Warning};
use crate::math::{cos2, exp, ln_factorial, powf, sin, sin2, sqrt, xlogy};
use crate::probe::{ProbeSpec, Strategy};

/// Quantum Fisher information of one gear photon, `4m²`.
pub fn qfi_single_photon(m: u32) -> f64 {
    let m = m as f64;
    4.0 * m * m
}

/// QFI per photon sent through a channel of transmissivity `η`.
pub fn qfi_with_losses(m: u32, eta: f64) -> f64 {
    eta * qfi_single_photon(m)
}

/// `C(θ) = sin²(2mθ+2ξ) / (1 − V² cos²(2mθ+2ξ))`, in `[0, 1]`.
///
/// Equals 1 at `θ = π/(4m) + kπ/(2m) − ξ/m`. With `V = 1` the ratio is 1
/// everywhere except at fringe extrema, where it is 0/0 and reported as
/// [`Error::DegenerateCFunction`].
pub fn c_function(m: u32, visibility: f64, theta: f64, xi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&visibility) {
        return Err(Error::InvalidParameter {
            name: "visibility",
            value: visibility,
            reason: "must lie in [0, 1]",
        });
    }
    let arg = 2.0 * (m as f64 * theta + xi);
    let num = sin2(arg);
    let den = 1.0 - visibility * visibility * cos2(arg);
    if den <= f64::EPSILON {
        return Err(Error::DegenerateCFunction);
    }
    Ok((num / den).clamp(0.0, 1.0))
}

/// Classical Fisher information of H/V analysis per detected probe.
///
/// The ideal law gives `(2k)²` for every θ, with `k` the phase multiplier.
/// With `V < 1` it is `4k²V²C(θ)`. At a `V = 1` fringe extremum one outcome
/// has zero probability and zero slope; the analytic limit is returned.
pub fn cfi_polarization(spec: &ProbeSpec, theta: f64) -> Result<f64> {
    if !spec.strategy.is_single_mode() {
        return Err(Error::WrongStrategy {
            operation: "cfi_polarization",
            strategy: spec.strategy,
        });
    }
    let k = spec.phase_multiplier()?;
    let v = spec.effective_visibility();
    let ideal = qfi_single_photon(k);
    if v == 1.0 {
        return Ok(ideal);
    }
    Ok(ideal * v * v * c_function(k, v, theta, spec.xi)?)
}

/// Analytic and numeric information for one probe at one angle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub strategy: Strategy,
    /// Phase multiplier of the fringe (gear ratio, N, mN or m_A ± m_B).
    pub m: u32,
    /// Photons per probe (mean photons per pulse for coherent probes).
    pub n_photons: f64,
    pub nu: u64,
    pub visibility: f64,
    pub transmissivity: f64,
    /// `None` means the angle-optimal value (`C = 1`) was reported.
    pub theta_eval: Option<f64>,
    pub qfi_per_photon: f64,
    pub cfi_per_photon: f64,
    /// Lower bound on Δθ in radians; infinite when the probe carries no information.
    pub crb: f64,
}

/// Cramér-Rao bound for `nu` repetitions of the probe.
///
/// Dispatch: polarization-only `1/(2√(νN))`; NOON `1/(2N√ν)`; gear
/// `1/(2mV√(ηνN)·√C(θ))`; gear NOON `1/(2mN√ν)`; coherent pulses as a gear with
/// `N = |α|²`; entangled co-rotation as a two-photon probe with multiplier
/// `m_A ± m_B`. Without an angle the gear bound uses `C = 1`.
pub fn crb(spec: &ProbeSpec, nu: u64, theta: Option<f64>) -> Result<BoundReport> {
    if nu == 0 {
        return Err(Error::CountTooSmall {
            name: "nu",
            min: 1,
            found: 0,
        });
    }
    spec.validate()?;
    let k = spec.phase_multiplier()?;
    let v = spec.effective_visibility();
    let eta = spec.transmissivity;
    let c = |m: u32| -> Result<f64> {
        match theta {
            None => Ok(1.0),
            Some(_) if v == 1.0 => Ok(1.0),
            Some(t) => c_function(m, v, t, spec.xi),
        }
    };
    let ideal = qfi_single_photon(k);
    // (photons per probe, qfi per photon, cfi per photon)
    let (n, qfi, cfi) = match spec.strategy {
        Strategy::ClassicalPolarization => (spec.n_photons as f64, 4.0, 4.0),
        Strategy::NoonPolarization | Strategy::GearNoon => {
            let n = spec.n_photons as f64;
            (n, ideal / n, ideal / n)
        }
        Strategy::GearSinglePhoton => (
            spec.n_photons as f64,
            eta * ideal,
            eta * ideal * v * v * c(k)?,
        ),
        Strategy::CoherentGear => (spec.mean_photons, eta * ideal, eta * ideal * v * v * c(k)?),
        Strategy::EntangledPair => {
            let pair = ideal * v * v * c(k)?;
            (2.0, eta * eta * ideal / 2.0, eta * eta * pair / 2.0)
        }
    };
    let total = nu as f64 * n * cfi;
    let bound = if total > 0.0 { 1.0 / sqrt(total) } else { f64::INFINITY };
    Ok(BoundReport {
        strategy: spec.strategy,
        m: k,
        n_photons: n,
        nu,
        visibility: v,
        transmissivity: eta,
        theta_eval: theta,
        qfi_per_photon: qfi,
        cfi_per_photon: cfi,
        crb: bound,
    })
}

/// Heuristic m-dependence of the effective factor `V√η`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeuristicVisibilityModel {
    pub v0: f64,
    pub eta0: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl HeuristicVisibilityModel {
    /// Fitted degradation `γ = 0.026`, `δ = 0.62` with unit baseline factors.
    pub const FITTED: HeuristicVisibilityModel = HeuristicVisibilityModel {
        v0: 1.0,
        eta0: 1.0,
        gamma: 0.026,
        delta: 0.62,
    };

    pub fn ideal() -> Self {
        HeuristicVisibilityModel {
            gamma: 0.0,
            ..Self::FITTED
        }
    }

    /// `max(0, 1 − γ·m^δ)`.
    pub fn degradation(&self, m: u32) -> f64 {
        (1.0 - self.gamma * powf(m as f64, self.delta)).max(0.0)
    }
}

/// `V√η → v0·√eta0·max(0, 1 − γ·m^δ)`.
pub fn heuristic_effective_factor(model: &HeuristicVisibilityModel, m: u32) -> f64 {
    model.v0 * sqrt(model.eta0) * model.degradation(m)
}

/// Precision gain `Δθ⁰/Δθ^m = m·(1 − γ·m^δ)` of a gear over polarization only.
pub fn enhancement_ratio(m: u32, model: &HeuristicVisibilityModel) -> f64 {
    m as f64 * model.degradation(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentFisher {
    pub value: f64,
    /// Probability mass outside the truncated count square.
    pub tail_mass: f64,
    pub warnings: alloc::vec::Vec<Warning>,
}

/// Classical Fisher information of H/V photon counting on a coherent pulse.
///
/// Sums `(∂_θ p)²/p` over `n_H, n_V ≤ truncation` with analytic derivatives of
/// the product-Poisson law. The exact value is `4m²|α|²`. If one channel mean
/// vanishes (a fringe extremum) its `λ'²/λ` limit is added analytically, since
/// every term carrying counts in that channel has zero probability.
pub fn coherent_cfi_numeric(m: u32, mean_photons: f64, theta: f64, truncation: u64) -> Result<CoherentFisher> {
    if !(mean_photons >= 0.0 && mean_photons.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "mean_photons",
            value: mean_photons,
            reason: "must be a non-negative real",
        });
    }
    if (truncation as f64) < 10.0 * mean_photons {
        return Err(Error::InvalidParameter {
            name: "truncation",
            value: truncation as f64,
            reason: "must be at least 10 times the mean photon number",
        });
    }
    let mf = m as f64;
    let phase = mf * theta;
    let lambda_h = mean_photons * cos2(phase);
    let lambda_v = mean_photons * sin2(phase);
    // dλ_H/dθ = −m|α|² sin 2mθ, dλ_V/dθ = +m|α|² sin 2mθ
    let slope = mf * mean_photons * sin(2.0 * phase);
    let (dh, dv) = (-slope, slope);

    let ln_pmf = |lambda: f64, n: u64| -> f64 {
        if lambda == 0.0 {
            if n == 0 {
                0.0
            } else {
                f64::NEG_INFINITY
            }
        } else {
            -lambda + xlogy(n as f64, lambda) - ln_factorial(n)
        }
    };
    let score = |lambda: f64, d: f64, n: u64| -> f64 {
        if lambda == 0.0 {
            0.0
        } else {
            (n as f64 / lambda - 1.0) * d
        }
    };

    let mut info = 0.0;
    let mut mass = 0.0;
    for n_h in 0..=truncation {
        let lh = ln_pmf(lambda_h, n_h);
        if lh == f64::NEG_INFINITY {
            continue;
        }
        let sh = score(lambda_h, dh, n_h);
        for n_v in 0..=truncation {
            let lv = ln_pmf(lambda_v, n_v);
            if lv == f64::NEG_INFINITY {
                continue;
            }
            let p = exp(lh + lv);
            let s = sh + score(lambda_v, dv, n_v);
            info += p * s * s;
            mass += p;
        }
    }
    let limit = 4.0 * mf * mf * mean_photons;
    if lambda_h == 0.0 && mean_photons > 0.0 {
        info += limit * sin2(phase);
    }
    if lambda_v == 0.0 && mean_photons > 0.0 {
        info += limit * cos2(phase);
    }
    let tail_mass = (1.0 - mass).max(0.0);
    let mut warnings = alloc::vec::Vec::new();
    if tail_mass > 1e-10 {
        warnings.push(Warning::TruncatedTail { mass: tail_mass });
    }
    Ok(CoherentFisher {
        value: info,
        tail_mass,
        warnings,
    })
}
