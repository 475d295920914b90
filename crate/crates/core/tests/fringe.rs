use std::f64::consts::PI;

use gear_core::fringe::{fit_fringe, fit_fringe_among, frequency_scan, Channel, FringePoint, FringeScan};
use gear_core::probe::{detection_probability, PairOutcome, SingleOutcome};
use gear_core::rng::{derive_seed, SeededRng};
use gear_core::sampler::{sample_entangled, sample_single_photons, Dataset};
use gear_core::{BellState, ProbeSpec, Warning};
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn angles(n: usize, span: f64) -> Vec<f64> {
    (0..n).map(|i| span * i as f64 / (n - 1) as f64).collect()
}

/// Poisson H counts with mean `photons·p(H|θ)`.
fn gear_sweep(spec: &ProbeSpec, thetas: &[f64], photons: u64, seed: u64) -> FringeScan {
    let mut rng = SeededRng::new(seed);
    let counts: Vec<u64> = thetas
        .iter()
        .map(|&t| rng.poisson(photons as f64 * detection_probability(spec, SingleOutcome::H, t).unwrap()))
        .collect();
    FringeScan::from_counts(thetas, &counts).unwrap()
}

#[test]
fn poisson_fringe_recovers_visibility() {
    let spec = ProbeSpec::gear(21).unwrap().with_visibility(0.95).with_xi(0.4);
    let scan = gear_sweep(&spec, &angles(200, PI / 2.0), 2_000, 1);
    let fit = fit_fringe(&scan, Some(21)).unwrap();
    assert!((fit.visibility - 0.95).abs() < 2.0 * fit.stderr.visibility, "{fit:?}");
    assert!((fit.xi - 0.4).abs() < 4.0 * fit.stderr.xi);
    assert!(fit.warnings.is_empty());
}

#[test]
fn residuals_pass_chi_squared() {
    let mut rng = SeededRng::new(50);
    let ms = [1u32, 2, 5, 7, 11, 21];
    for k in 0..50u64 {
        let m = ms[(rng.uniform() * ms.len() as f64) as usize];
        let v = 0.3 + 0.65 * rng.uniform();
        let xi = PI * rng.uniform();
        let spec = ProbeSpec::gear(m).unwrap().with_visibility(v).with_xi(xi);
        let scan = gear_sweep(&spec, &angles(120, PI / 2.0), 2_000, derive_seed(51, k));
        let fit = fit_fringe(&scan, Some(m)).unwrap();
        let law = ChiSquared::new(fit.dof as f64).unwrap();
        let p = 2.0 * law.sf(fit.chi2).min(law.cdf(fit.chi2));
        assert!(p > 1e-3, "tuple {k} m={m} V={v}: chi2 {} dof {} p {p}", fit.chi2, fit.dof);
    }
}

#[test]
fn visibility_bias_below_reported_error() {
    let spec = ProbeSpec::gear(7).unwrap().with_visibility(0.9).with_xi(0.2);
    let thetas = angles(64, PI / 2.0);
    let runs = 200;
    let (mut sum, mut err) = (0.0, 0.0);
    for s in 0..runs {
        let fit = fit_fringe(&gear_sweep(&spec, &thetas, 2_000, 1_000 + s), Some(7)).unwrap();
        sum += fit.visibility;
        err += fit.stderr.visibility;
    }
    let bias = sum / runs as f64 - 0.9;
    let stderr = err / runs as f64;
    assert!(bias.abs() < stderr, "bias {bias} stderr {stderr}");
}

#[test]
fn frequency_recovered_at_high_counts() {
    let mut rng = SeededRng::new(60);
    let thetas = angles(500, PI);
    let candidates: Vec<u32> = (1..=30).collect();
    let trials = 200;
    let mut hits = 0;
    for k in 0..trials {
        let m = 1 + (rng.uniform() * 30.0) as u32;
        let v = 0.5 + 0.5 * rng.uniform();
        let spec = ProbeSpec::gear(m).unwrap().with_visibility(v).with_xi(PI * rng.uniform());
        let scan = gear_sweep(&spec, &thetas, 1_000, derive_seed(61, k));
        if frequency_scan(&scan, &candidates).unwrap().best == m {
            hits += 1;
        }
    }
    assert!(hits as f64 / trials as f64 >= 0.99, "{hits}/{trials}");
}

#[test]
fn flat_fringe_has_visibility_consistent_with_zero() {
    let spec = ProbeSpec::gear(5).unwrap().with_visibility(0.0);
    let scan = gear_sweep(&spec, &angles(100, PI / 2.0), 1_000, 7);
    let fit = fit_fringe(&scan, Some(5)).unwrap();
    assert!(fit.visibility >= 0.0);
    assert!(fit.visibility < 3.0 * fit.stderr.visibility, "{fit:?}");
}

#[test]
fn phi_minus_doubles_fitted_frequency() {
    let thetas = angles(300, PI / 2.0);
    let single = gear_sweep(&ProbeSpec::gear(9).unwrap(), &thetas, 1_000, 2);
    let pairs: Vec<Dataset> = thetas
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let spec = ProbeSpec::entangled(BellState::PhiMinus, 9, 9).unwrap();
            sample_entangled(&spec, t, t, 2_000, derive_seed(3, i as u64)).unwrap()
        })
        .collect();
    let hh = FringeScan::from_datasets(&pairs, Channel::Pair(PairOutcome::HH)).unwrap();
    let a = fit_fringe(&single, None).unwrap();
    let b = fit_fringe(&hh, None).unwrap();
    assert_eq!(a.m, 9);
    assert_eq!(b.m, 18);
    assert!(b.visibility > 0.95);
}

#[test]
fn frequency_examples() {
    let scan = gear_sweep(&ProbeSpec::gear(18).unwrap().with_visibility(0.8), &angles(300, PI / 2.0), 1_000, 4);
    assert_eq!(frequency_scan(&scan, &[9, 17, 18, 19]).unwrap().best, 18);

    let flat: Vec<FringePoint> = angles(40, 1.0)
        .into_iter()
        .map(|angle| FringePoint { angle, value: 100.0, sigma: 10.0 })
        .collect();
    let flat = FringeScan::new(flat).unwrap();
    let fs = frequency_scan(&flat, &[3, 2, 5]).unwrap();
    assert_eq!(fs.best, 2);
    assert!(matches!(fs.warnings[0], Warning::AmbiguousFrequency { best: 2, .. }));
    let fit = fit_fringe_among(&flat, &[3, 2, 5]).unwrap();
    assert_eq!(fit.m, 2);
    assert!(!fit.warnings.is_empty());
}

#[test]
fn wrong_channel_is_rejected() {
    let d = sample_single_photons(&ProbeSpec::gear(1).unwrap(), 0.0, 10, 1).unwrap();
    assert!(FringeScan::from_datasets(&[d], Channel::Pair(PairOutcome::HH)).is_err());
}
