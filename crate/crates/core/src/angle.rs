//! Angle helpers: wrapping onto `[0, 2π)` and wrap-aware distances.

use crate::math::{rem_euclid, PI, TAU};

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_two_pi(theta: f64) -> f64 {
    rem_euclid(theta, TAU)
}

/// Wraps a phase into `[0, π)`, the period of `cos²`.
pub fn wrap_pi(phase: f64) -> f64 {
    rem_euclid(phase, PI)
}

/// Angular distance on the circle, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_two_pi(a - b);
    if d > PI {
        TAU - d
    } else {
        d
    }
}

/// Distance from `x` to the nearest integer multiple of `step`.
pub fn distance_to_multiple(x: f64, step: f64) -> f64 {
    let r = rem_euclid(x, step);
    r.min(step - r)
}
