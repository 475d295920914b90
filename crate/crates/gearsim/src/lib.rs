//! Reproducible photonic-gear experiments: configs, CSV output and the
//! command implementations behind the `gearsim` binary.

pub mod commands;
pub mod config;
pub mod dataset_io;
pub mod error;
pub mod table;

pub use commands::{default_output, run, RunSummary};
pub use config::{Experiment, ExperimentConfig};
pub use error::{Error, Result};
