use gear_core::fisher::{crb, enhancement_ratio, heuristic_effective_factor};
use gear_core::probe::charge_for_ratio;

use super::Output;
use crate::config::{BoundsConfig, EnhancementConfig};
use crate::error::Result;
use crate::table::{int, num, Table};

pub(super) fn run(c: &BoundsConfig, out: &mut Output) -> Result<()> {
    let mut t = Table::new(
        "bounds",
        &[
            "m",
            "phase_multiplier",
            "qfi_per_photon",
            "cfi_per_photon",
            "crb",
            "crb_m1",
            "crb_ratio",
            "enhancement_ratio",
            "ideal_ratio",
            "effective_factor",
        ],
    );
    let with_m = |m: u32| -> Result<_> {
        let mut spec = c.probe.clone();
        spec.q = charge_for_ratio(m)?;
        Ok(spec)
    };
    let base = crb(&with_m(1)?, c.nu, c.theta)?;
    let mut peak = (0, f64::NEG_INFINITY);
    for &m in &c.m_values {
        let b = crb(&with_m(m)?, c.nu, c.theta)?;
        let e = enhancement_ratio(m, &c.model);
        if e > peak.1 {
            peak = (m, e);
        }
        t.push(vec![
            m.to_string(),
            b.m.to_string(),
            num(b.qfi_per_photon),
            num(b.cfi_per_photon),
            num(b.crb),
            num(base.crb),
            num(base.crb / b.crb),
            num(e),
            int(m),
            num(heuristic_effective_factor(&c.model, m)),
        ]);
    }
    out.table(&t)?;
    out.line("strategy", c.probe.strategy.name());
    out.line("nu", c.nu);
    out.line("model", format!("gamma={} delta={}", c.model.gamma, c.model.delta));
    out.line("peak_m", peak.0);
    out.line("peak_enhancement", peak.1);
    Ok(())
}

pub(super) fn run_curve(c: &EnhancementConfig, out: &mut Output) -> Result<()> {
    let mut t = Table::new("enhancement-curve", &["m", "enhancement_ratio", "ideal_ratio"]);
    let mut peak = (0, f64::NEG_INFINITY);
    for m in 1..=c.m_max {
        let e = enhancement_ratio(m, &c.model);
        if e > peak.1 {
            peak = (m, e);
        }
        t.push(vec![m.to_string(), num(e), int(m)]);
    }
    out.table(&t)?;
    out.line("model", format!("gamma={} delta={}", c.model.gamma, c.model.delta));
    out.line("peak_m", peak.0);
    out.line("peak_enhancement", peak.1);
    Ok(())
}
