use gear_core::rng::derive_seed;
use gear_core::sampler::{sample_coherent, sample_entangled, sample_single_photons};
use gear_core::Strategy;

use super::Output;
use crate::config::SampleConfig;
use crate::dataset_io::write_dataset;
use crate::error::Result;

pub(super) fn run(c: &SampleConfig, seed: u64, out: &mut Output) -> Result<()> {
    let s = derive_seed(seed, 0);
    let d = match c.probe.strategy {
        Strategy::CoherentGear => sample_coherent(&c.probe, c.true_theta, c.records, s)?,
        Strategy::EntangledPair => {
            let tb = c.true_theta_b.unwrap_or(c.true_theta);
            sample_entangled(&c.probe, c.true_theta, tb, c.records, s)?
        }
        _ => sample_single_photons(&c.probe, c.true_theta, c.records, s)?,
    };
    let path = out.primary().to_path_buf();
    write_dataset(&path, &d)?;
    out.file(path);
    out.line("strategy", c.probe.strategy.name());
    out.line("records", d.len());
    out.line("counts", format!("{:?}", d.counts_summary()));
    Ok(())
}
