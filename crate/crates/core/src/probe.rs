//! Probe strategies as parametric probability laws over detection outcomes.
//!
//! Every single-mode law has the form `p(H|θ) = V·cos²(kθ + ξ) + (1 − V)/2`
//! where the phase multiplier `k` is 1 for polarization-only probes, `m` for a
//! gear, `N` for a NOON state and `m·N` for a gear NOON state. Visibility only
//! enters the gear single-photon law; the NOON laws are ideal. Loss is an
//! explicit outcome with probability `1 − η` that carries no angle information.

use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{cos2, exp, ln_factorial, sin2, xlogy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    ClassicalPolarization,
    GearSinglePhoton,
    NoonPolarization,
    GearNoon,
    CoherentGear,
    EntangledPair,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::ClassicalPolarization,
        Strategy::GearSinglePhoton,
        Strategy::NoonPolarization,
        Strategy::GearNoon,
        Strategy::CoherentGear,
        Strategy::EntangledPair,
    ];

    /// Strategies whose records are single H/V/Lost detections.
    pub fn is_single_mode(self) -> bool {
        matches!(
            self,
            Strategy::ClassicalPolarization
                | Strategy::GearSinglePhoton
                | Strategy::NoonPolarization
                | Strategy::GearNoon
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::ClassicalPolarization => "ClassicalPolarization",
            Strategy::GearSinglePhoton => "GearSinglePhoton",
            Strategy::NoonPolarization => "NoonPolarization",
            Strategy::GearNoon => "GearNoon",
            Strategy::CoherentGear => "CoherentGear",
            Strategy::EntangledPair => "EntangledPair",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellState {
    PsiMinus,
    PhiMinus,
}

/// Topological charge of a q-plate. Integer or half-integer, stored as `2q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Charge(u32);

impl Charge {
    pub const ZERO: Charge = Charge(0);

    pub fn from_twice(twice_q: u32) -> Self {
        Charge(twice_q)
    }

    pub fn new(q: f64) -> Result<Self> {
        let twice = 2.0 * q;
        if !q.is_finite() || q < 0.0 || twice != libm::round(twice) || twice > u32::MAX as f64 {
            return Err(Error::InvalidParameter {
                name: "q",
                value: q,
                reason: "must be a non-negative integer or half-integer",
            });
        }
        Ok(Charge(twice as u32))
    }

    pub fn twice(self) -> u32 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl TryFrom<f64> for Charge {
    type Error = Error;

    fn try_from(q: f64) -> Result<Self> {
        Charge::new(q)
    }
}

impl From<Charge> for f64 {
    fn from(c: Charge) -> f64 {
        c.value()
    }
}

/// Half-wave-plate configuration selecting `m = 2q + 1` or `m = 2q − 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum HwpSign {
    #[default]
    Plus,
    Minus,
}

impl HwpSign {
    pub fn as_i8(self) -> i8 {
        match self {
            HwpSign::Plus => 1,
            HwpSign::Minus => -1,
        }
    }
}

impl TryFrom<i8> for HwpSign {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            1 => Ok(HwpSign::Plus),
            -1 => Ok(HwpSign::Minus),
            _ => Err(Error::InvalidParameter {
                name: "hwp_sign",
                value: v as f64,
                reason: "must be +1 or -1",
            }),
        }
    }
}

impl From<HwpSign> for i8 {
    fn from(s: HwpSign) -> i8 {
        s.as_i8()
    }
}

/// Gear ratio `m = 2q ± 1`, rejected when below 1.
pub fn gear_ratio(q: Charge, hwp_sign: HwpSign) -> Result<u32> {
    let m = match hwp_sign {
        HwpSign::Plus => Some(q.twice() + 1),
        HwpSign::Minus => q.twice().checked_sub(1),
    };
    match m {
        Some(m) if m >= 1 => Ok(m),
        _ => Err(Error::InvalidGearRatio {
            q: q.value(),
            hwp_sign: hwp_sign.as_i8(),
        }),
    }
}

/// Strategy selector plus every physical parameter a probe may need.
///
/// Parameters that the selected strategy does not use are carried along but
/// never validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSpec {
    pub strategy: Strategy,
    pub q: Charge,
    pub hwp_sign: HwpSign,
    /// Input phase ξ in radians.
    pub xi: f64,
    pub visibility: f64,
    /// Visibility of the V intensity channel for coherent pulses; defaults to
    /// `visibility` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub visibility_v: Option<f64>,
    pub transmissivity: f64,
    /// Photons per probe for NOON and gear NOON states.
    pub n_photons: u32,
    /// Mean photon number `|α|²` per coherent pulse.
    pub mean_photons: f64,
    pub bell_state: BellState,
    pub q_a: Charge,
    pub q_b: Charge,
    pub hwp_sign_a: HwpSign,
    pub hwp_sign_b: HwpSign,
}

impl Default for ProbeSpec {
    fn default() -> Self {
        ProbeSpec {
            strategy: Strategy::GearSinglePhoton,
            q: Charge::ZERO,
            hwp_sign: HwpSign::Plus,
            xi: 0.0,
            visibility: 1.0,
            visibility_v: None,
            transmissivity: 1.0,
            n_photons: 1,
            mean_photons: 1.0,
            bell_state: BellState::PsiMinus,
            q_a: Charge::ZERO,
            q_b: Charge::ZERO,
            hwp_sign_a: HwpSign::Plus,
            hwp_sign_b: HwpSign::Plus,
        }
    }
}

/// Charge and wave-plate sign realising gear ratio `m` with `m = 2q + 1`.
pub fn charge_for_ratio(m: u32) -> Result<Charge> {
    if m == 0 {
        return Err(Error::InvalidParameter {
            name: "m",
            value: 0.0,
            reason: "gear ratio must be at least 1",
        });
    }
    Ok(Charge::from_twice(m - 1))
}

impl ProbeSpec {
    pub fn new(strategy: Strategy) -> Self {
        ProbeSpec {
            strategy,
            ..ProbeSpec::default()
        }
    }

    /// Single-photon gear with ratio `m` (realised as `q = (m − 1)/2`, HWP in).
    pub fn gear(m: u32) -> Result<Self> {
        Ok(ProbeSpec {
            q: charge_for_ratio(m)?,
            ..ProbeSpec::new(Strategy::GearSinglePhoton)
        })
    }

    pub fn coherent(m: u32, mean_photons: f64) -> Result<Self> {
        Ok(ProbeSpec {
            q: charge_for_ratio(m)?,
            mean_photons,
            ..ProbeSpec::new(Strategy::CoherentGear)
        })
    }

    pub fn entangled(bell_state: BellState, m_a: u32, m_b: u32) -> Result<Self> {
        Ok(ProbeSpec {
            bell_state,
            q_a: charge_for_ratio(m_a)?,
            q_b: charge_for_ratio(m_b)?,
            ..ProbeSpec::new(Strategy::EntangledPair)
        })
    }

    pub fn with_xi(mut self, xi: f64) -> Self {
        self.xi = xi;
        self
    }

    pub fn with_visibility(mut self, visibility: f64) -> Self {
        self.visibility = visibility;
        self
    }

    pub fn with_transmissivity(mut self, eta: f64) -> Self {
        self.transmissivity = eta;
        self
    }

    pub fn with_photons(mut self, n: u32) -> Self {
        self.n_photons = n;
        self
    }

    pub fn gear_ratio(&self) -> Result<u32> {
        gear_ratio(self.q, self.hwp_sign)
    }

    pub fn arm_ratios(&self) -> Result<(u32, u32)> {
        Ok((
            gear_ratio(self.q_a, self.hwp_sign_a)?,
            gear_ratio(self.q_b, self.hwp_sign_b)?,
        ))
    }

    /// Factor multiplying θ inside the fringe argument.
    pub fn phase_multiplier(&self) -> Result<u32> {
        match self.strategy {
            Strategy::ClassicalPolarization => Ok(1),
            Strategy::GearSinglePhoton | Strategy::CoherentGear => self.gear_ratio(),
            Strategy::NoonPolarization => Ok(self.n_photons),
            Strategy::GearNoon => Ok(self.gear_ratio()? * self.n_photons),
            Strategy::EntangledPair => {
                let (a, b) = self.arm_ratios()?;
                Ok(match self.bell_state {
                    BellState::PhiMinus => a + b,
                    BellState::PsiMinus => a.abs_diff(b),
                })
            }
        }
    }

    /// Fringe visibility seen by the strategy's polarization detection.
    pub fn effective_visibility(&self) -> f64 {
        match self.strategy {
            Strategy::GearSinglePhoton | Strategy::CoherentGear | Strategy::EntangledPair => {
                self.visibility
            }
            _ => 1.0,
        }
    }

    /// Checks the parameters the selected strategy actually uses.
    pub fn validate(&self) -> Result<()> {
        if !self.xi.is_finite() {
            return Err(invalid("xi", self.xi, "must be finite"));
        }
        if !(self.transmissivity > 0.0 && self.transmissivity <= 1.0) {
            return Err(invalid("transmissivity", self.transmissivity, "must lie in (0, 1]"));
        }
        let check_v = |name, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(invalid(name, v, "must lie in [0, 1]"))
            }
        };
        match self.strategy {
            Strategy::ClassicalPolarization => {}
            Strategy::GearSinglePhoton => {
                self.gear_ratio()?;
                check_v("visibility", self.visibility)?;
            }
            Strategy::NoonPolarization | Strategy::GearNoon => {
                if self.n_photons == 0 {
                    return Err(Error::CountTooSmall {
                        name: "n_photons",
                        min: 1,
                        found: 0,
                    });
                }
                if self.strategy == Strategy::GearNoon {
                    self.gear_ratio()?;
                }
            }
            Strategy::CoherentGear => {
                self.gear_ratio()?;
                check_v("visibility", self.visibility)?;
                if let Some(v) = self.visibility_v {
                    check_v("visibility_v", v)?;
                }
                if !(self.mean_photons >= 0.0 && self.mean_photons.is_finite()) {
                    return Err(invalid("mean_photons", self.mean_photons, "must be a non-negative real"));
                }
            }
            Strategy::EntangledPair => {
                self.arm_ratios()?;
                check_v("visibility", self.visibility)?;
            }
        }
        Ok(())
    }
}

fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}

/// Polarization found by Bob's H/V analyser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

/// Single-photon detection record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SingleOutcome {
    H,
    V,
    Lost,
}

impl SingleOutcome {
    pub const ALL: [SingleOutcome; 3] = [SingleOutcome::H, SingleOutcome::V, SingleOutcome::Lost];

    pub fn label(self) -> &'static str {
        match self {
            SingleOutcome::H => "H",
            SingleOutcome::V => "V",
            SingleOutcome::Lost => "Lost",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.label() == s)
    }
}

impl fmt::Display for SingleOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Coincidence record of an entangled pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PairOutcome {
    HH,
    HV,
    VH,
    VV,
    LossA,
    LossB,
    LossBoth,
}

impl PairOutcome {
    pub const ALL: [PairOutcome; 7] = [
        PairOutcome::HH,
        PairOutcome::HV,
        PairOutcome::VH,
        PairOutcome::VV,
        PairOutcome::LossA,
        PairOutcome::LossB,
        PairOutcome::LossBoth,
    ];

    pub const DETECTED: [PairOutcome; 4] = [PairOutcome::HH, PairOutcome::HV, PairOutcome::VH, PairOutcome::VV];

    pub fn label(self) -> &'static str {
        match self {
            PairOutcome::HH => "HH",
            PairOutcome::HV => "HV",
            PairOutcome::VH => "VH",
            PairOutcome::VV => "VV",
            PairOutcome::LossA => "LossA",
            PairOutcome::LossB => "LossB",
            PairOutcome::LossBoth => "LossBoth",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.label() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn is_loss(self) -> bool {
        matches!(self, PairOutcome::LossA | PairOutcome::LossB | PairOutcome::LossBoth)
    }
}

impl fmt::Display for PairOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Photon counts of one coherent pulse in the H and V output ports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct CoherentCounts {
    pub n_h: u64,
    pub n_v: u64,
}

fn require_single_mode(spec: &ProbeSpec, outcome: &'static str) -> Result<()> {
    if spec.strategy.is_single_mode() {
        Ok(())
    } else {
        Err(Error::OutcomeNotInSpace {
            outcome,
            strategy: spec.strategy,
        })
    }
}

/// `p(H|θ)` for the fringe with multiplier `k`, phase `ξ` and visibility `V`.
#[inline]
pub fn fringe_h(k: f64, xi: f64, visibility: f64, theta: f64) -> f64 {
    visibility * cos2(k * theta + xi) + (1.0 - visibility) / 2.0
}

/// Probability of `pol` given that the photon arrived at the analyser.
pub fn conditional_probability(spec: &ProbeSpec, pol: Polarization, theta: f64) -> Result<f64> {
    require_single_mode(spec, "H/V")?;
    let k = spec.phase_multiplier()? as f64;
    let p_h = fringe_h(k, spec.xi, spec.effective_visibility(), theta);
    Ok(match pol {
        Polarization::H => p_h,
        Polarization::V => 1.0 - p_h,
    })
}

/// Probability of a single-mode outcome, including the loss channel.
pub fn detection_probability(spec: &ProbeSpec, outcome: SingleOutcome, theta: f64) -> Result<f64> {
    require_single_mode(spec, outcome.label())?;
    let eta = spec.transmissivity;
    Ok(match outcome {
        SingleOutcome::H => eta * conditional_probability(spec, Polarization::H, theta)?,
        SingleOutcome::V => eta * conditional_probability(spec, Polarization::V, theta)?,
        SingleOutcome::Lost => 1.0 - eta,
    })
}

/// Poisson means `(λ_H, λ_V)` of a coherent pulse after loss.
pub fn coherent_channel_means(spec: &ProbeSpec, theta: f64) -> Result<(f64, f64)> {
    if spec.strategy != Strategy::CoherentGear {
        return Err(Error::WrongStrategy {
            operation: "coherent_channel_means",
            strategy: spec.strategy,
        });
    }
    let m = spec.gear_ratio()? as f64;
    let flux = spec.transmissivity * spec.mean_photons;
    let phase = m * theta + spec.xi;
    let v_h = spec.visibility;
    let v_v = spec.visibility_v.unwrap_or(v_h);
    let lambda_h = flux * (v_h * cos2(phase) + (1.0 - v_h) / 2.0);
    let lambda_v = flux * (v_v * sin2(phase) + (1.0 - v_v) / 2.0);
    Ok((lambda_h, lambda_v))
}

/// Natural log of the product-Poisson count law of one coherent pulse.
pub fn coherent_count_log_probability(spec: &ProbeSpec, theta: f64, counts: CoherentCounts) -> Result<f64> {
    let (lh, lv) = coherent_channel_means(spec, theta)?;
    Ok(poisson_ln_pmf(lh, counts.n_h) + poisson_ln_pmf(lv, counts.n_v))
}

/// Product-Poisson probability of `(n_H, n_V)` for one coherent pulse.
///
/// With `η = V = 1` this is `e^{−|α|²}(cos²(mθ+ξ)|α|²)^{n_H}(sin²(mθ+ξ)|α|²)^{n_V}/(n_H! n_V!)`.
/// Evaluated in the log domain, so large counts do not overflow.
pub fn coherent_count_probability(spec: &ProbeSpec, theta: f64, n_h: u64, n_v: u64) -> Result<f64> {
    Ok(exp(coherent_count_log_probability(spec, theta, CoherentCounts { n_h, n_v })?))
}

pub(crate) fn poisson_ln_pmf(lambda: f64, n: u64) -> f64 {
    if lambda == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    -lambda + xlogy(n as f64, lambda) - ln_factorial(n)
}

/// Coincidence probability for a detected pair (both photons arrived).
///
/// ψ⁻ depends on `Δ = m_Aθ_A − m_Bθ_B`, φ⁻ on `Σ = m_Aθ_A + m_Bθ_B`; the
/// visibility mixes the ideal law with the uniform `1/4` distribution.
pub fn entangled_joint_probability(
    spec: &ProbeSpec,
    theta_a: f64,
    theta_b: f64,
    outcome: PairOutcome,
) -> Result<f64> {
    if spec.strategy != Strategy::EntangledPair {
        return Err(Error::WrongStrategy {
            operation: "entangled_joint_probability",
            strategy: spec.strategy,
        });
    }
    if outcome.is_loss() {
        return Err(Error::OutcomeNotInSpace {
            outcome: outcome.label(),
            strategy: spec.strategy,
        });
    }
    let (m_a, m_b) = spec.arm_ratios()?;
    let (a, b) = (m_a as f64 * theta_a, m_b as f64 * theta_b);
    let arg = match spec.bell_state {
        BellState::PsiMinus => a - b,
        BellState::PhiMinus => a + b,
    };
    let ideal = match outcome {
        PairOutcome::HH | PairOutcome::VV => 0.5 * sin2(arg),
        _ => 0.5 * cos2(arg),
    };
    let v = spec.visibility;
    Ok(v * ideal + (1.0 - v) / 4.0)
}

/// Full seven-outcome pair law: each arm transmits independently with `η`.
pub fn pair_detection_probability(
    spec: &ProbeSpec,
    theta_a: f64,
    theta_b: f64,
    outcome: PairOutcome,
) -> Result<f64> {
    let eta = spec.transmissivity;
    Ok(match outcome {
        PairOutcome::LossA => (1.0 - eta) * eta,
        PairOutcome::LossB => eta * (1.0 - eta),
        PairOutcome::LossBoth => (1.0 - eta) * (1.0 - eta),
        detected => eta * eta * entangled_joint_probability(spec, theta_a, theta_b, detected)?,
    })
}

/// q-plate conversion efficiencies and total transmissivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImperfectionModel {
    pub eps_1: f64,
    pub eps_2: f64,
    pub eta: f64,
}

/// Visibility left after imperfect q-plate conversion.
///
/// Dropping the doubly-unconverted term and renormalising the remaining
/// convex mixture gives `V = ε₁ε₂ / (ε₁ε₂ + ε₁(1−ε₂) + (1−ε₁)ε₂)`, which
/// always lies in `[0, 1]`.
pub fn visibility_from_efficiencies(model: &ImperfectionModel) -> Result<f64> {
    for (name, eps) in [("eps_1", model.eps_1), ("eps_2", model.eps_2)] {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(invalid(name, eps, "conversion efficiency must lie in (0, 1]"));
        }
    }
    let (e1, e2) = (model.eps_1, model.eps_2);
    let pure = e1 * e2;
    Ok(pure / (pure + e1 * (1.0 - e2) + (1.0 - e1) * e2))
}
