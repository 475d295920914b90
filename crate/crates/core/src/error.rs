use alloc::boxed::Box;

use crate::fringe::FringeFitResult;
use crate::probe::Strategy;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("gear ratio 2q{hwp_sign:+} is below 1 for q = {q}")]
    InvalidGearRatio { q: f64, hwp_sign: i8 },

    #[error("{name} = {value} is invalid: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{name} must be at least {min}, got {found}")]
    CountTooSmall {
        name: &'static str,
        min: u64,
        found: u64,
    },

    #[error("{operation} does not accept {strategy:?} probes")]
    WrongStrategy {
        operation: &'static str,
        strategy: Strategy,
    },

    #[error("outcome {outcome} is not in the outcome space of {strategy:?}")]
    OutcomeNotInSpace {
        outcome: &'static str,
        strategy: Strategy,
    },

    #[error("C(θ) is degenerate: V = 1 at a fringe extremum")]
    DegenerateCFunction,

    #[error("posterior is degenerate: every grid node has zero likelihood")]
    DegeneratePosterior,

    #[error("prior has {found} weights but the grid has {expected} nodes")]
    PriorLength { expected: usize, found: usize },

    #[error(
        "step {step}: bijectivity interval {period} is shorter than the previous \
         uncertainty {previous_uncertainty}; increase M_{prev} or lower m_{step}",
        prev = step - 1
    )]
    ResolutionConstraint {
        step: usize,
        period: f64,
        previous_uncertainty: f64,
    },

    #[error("step {step}: no available gear ratio in ({previous}, {ideal}]")]
    ChargePlan {
        step: usize,
        previous: u32,
        ideal: u64,
    },

    #[error("fringe fit did not converge after {iterations} iterations")]
    FitNotConverged {
        iterations: usize,
        best: Box<FringeFitResult>,
    },
}

/// Non-fatal conditions attached to results instead of being logged.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum Warning {
    /// Truncated probability mass of a numeric sum exceeds 1e-10.
    TruncatedTail { mass: f64 },
    /// Best and runner-up chi-squared of a frequency scan differ by less than 1.
    AmbiguousFrequency { best: u32, runner_up: u32, delta_chi2: f64 },
    /// Budgets violate the recommended `M1 ≲ √M2 ≲ ⁴√M3` ordering.
    BudgetOrdering { budgets: [u64; 3] },
    /// Fewer than eight samples per fringe half-period.
    SparseSampling { points_per_half_period: f64 },
    /// Step data could not separate the candidate reflections.
    SymmetricCandidates { step: usize },
    /// The φ phase offset was applied to break a reflection symmetry.
    SymmetryFallback { step: usize },
}
