//! Photonic-gear angular metrology: probe laws, Fisher information and
//! Cramér-Rao bounds, seeded Monte Carlo sampling, grid Bayesian estimation,
//! the three-step adaptive protocol, and sinusoidal fringe fitting.
//!
//! The crate is `no_std` and only needs `alloc`. Transcendental functions go
//! through `libm`, so results are bit-identical across targets for a given
//! seed. File formats, configs and the command-line harness live in the
//! `gearsim` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod adaptive;
pub mod angle;
pub mod bayes;
mod error;
pub mod fisher;
pub mod fringe;
mod math;
pub mod probe;
pub mod rng;
pub mod sampler;

pub use error::{Error, Result, Warning};
pub use probe::{BellState, Charge, HwpSign, ProbeSpec, Strategy};
