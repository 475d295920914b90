use std::f64::consts::PI;

use gear_core::bayes::{
    estimate, estimate_dataset, estimate_evidence, posterior, posterior_from_evidence, uncertainty, Evidence, Interval,
};
use gear_core::fisher::crb;
use gear_core::rng::derive_seed;
use gear_core::sampler::{sample_coherent, sample_single_photons};
use gear_core::{Error, ProbeSpec};

fn omega7() -> Interval {
    Interval::new(0.0, PI / 14.0).unwrap()
}

#[test]
fn posterior_concentrates_near_the_bound() {
    let spec = ProbeSpec::gear(7).unwrap();
    let d = sample_single_photons(&spec, 0.1, 10_000, 17).unwrap();
    let (r, _) = estimate_dataset(&d, omega7(), 1024).unwrap();
    let bound = 1.0 / (2.0 * 7.0 * 100.0);
    assert!(r.delta_theta < 2.0 * bound, "{}", r.delta_theta);
    assert!((r.theta_bar - 0.1).abs() < 5.0 * r.delta_theta);
    assert_eq!(r.m_used, 7);
    assert_eq!(r.photons_consumed, 10_000);
}

#[test]
fn grid_refinement_is_stable() {
    let spec = ProbeSpec::gear(7).unwrap();
    let d = sample_single_photons(&spec, 0.1, 10_000, 17).unwrap();
    let a = estimate(&posterior(&d, omega7(), 1024, None).unwrap());
    let b = estimate(&posterior(&d, omega7(), 2048, None).unwrap());
    assert!((a - b).abs() < 1e-6, "{a} {b}");
}

#[test]
fn uncertainty_scales_as_inverse_root_budget() {
    let spec = ProbeSpec::gear(7).unwrap();
    let theta = PI / 28.0;
    let budgets = [100u64, 300, 1_000, 3_000, 10_000, 30_000, 100_000];
    let reps = 20;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &m in &budgets {
        let mean: f64 = (0..reps)
            .map(|r| {
                let d = sample_single_photons(&spec, theta, m, derive_seed(m, r)).unwrap();
                estimate_dataset(&d, omega7(), 2048).unwrap().0.delta_theta
            })
            .sum::<f64>()
            / reps as f64;
        xs.push((m as f64).ln());
        ys.push(mean.ln());
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx) * (x - mx)).sum::<f64>();
    assert!((slope + 0.5).abs() < 0.05, "slope {slope}");
}

#[test]
fn locally_unbiased_at_maximal_sensitivity() {
    let spec = ProbeSpec::gear(7).unwrap();
    let theta = PI / 28.0;
    let runs = 200u64;
    let est: Vec<f64> = (0..runs)
        .map(|s| {
            let d = sample_single_photons(&spec, theta, 10_000, s).unwrap();
            estimate_dataset(&d, omega7(), 1024).unwrap().0.theta_bar
        })
        .collect();
    let mean = est.iter().sum::<f64>() / runs as f64;
    let sd = (est.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (runs - 1) as f64).sqrt();
    assert!((mean - theta).abs() < 3.0 * sd / (runs as f64).sqrt(), "bias {}", mean - theta);
}

#[test]
fn single_outcome_posterior_examples() {
    let spec = ProbeSpec::gear(1).unwrap();
    let omega = Interval::new(0.0, PI / 2.0).unwrap();
    // one V photon: density ∝ sin²θ, mirror image of the cos² case
    let g = posterior_from_evidence(&spec, &Evidence::Polarization { h: 0, v: 1 }, omega, 4097, None).unwrap();
    let tb = estimate(&g);
    assert!((tb - (PI / 2.0 - (PI / 4.0 - 1.0 / PI))).abs() < 1e-6);
    assert!(uncertainty(&g, tb) > 0.3);
}

#[test]
fn delta_like_posterior_hits_its_node() {
    let spec = ProbeSpec::gear(1).unwrap();
    let omega = Interval::new(0.0, 1.0).unwrap();
    let mut prior = vec![1e-300; 1024];
    prior[400] = 1.0;
    let g = posterior_from_evidence(&spec, &Evidence::Polarization { h: 0, v: 0 }, omega, 1024, Some(&prior)).unwrap();
    let node = g.nodes()[400];
    assert!((estimate(&g) - node).abs() < g.step());
}

#[test]
fn single_probe_gives_prior_scale() {
    let spec = ProbeSpec::gear(7).unwrap();
    let d = sample_single_photons(&spec, 0.1, 1, 4).unwrap();
    let (r, _) = estimate_dataset(&d, omega7(), 1024).unwrap();
    let uniform = (PI / 14.0) / 12f64.sqrt();
    assert!(r.delta_theta > 0.5 * uniform && r.delta_theta <= uniform * 1.01);
}

#[test]
fn coherent_data_are_estimated() {
    let spec = ProbeSpec::coherent(21, 5.0).unwrap().with_xi(PI / 4.0);
    let omega = Interval::new(-PI / 84.0, PI / 84.0).unwrap();
    let d = sample_coherent(&spec, 0.004, 2_000, 6).unwrap();
    let (r, _) = estimate_dataset(&d, omega, 1024).unwrap();
    let bound = crb(&spec, 2_000, Some(0.004)).unwrap().crb;
    assert!((r.theta_bar - 0.004).abs() < 5.0 * bound);
    assert!(r.delta_theta < 1.5 * bound);
}

#[test]
fn losses_do_not_bias() {
    let spec = ProbeSpec::gear(7).unwrap().with_transmissivity(0.3);
    let d = sample_single_photons(&spec, PI / 28.0, 20_000, 12).unwrap();
    let (r, _) = estimate_dataset(&d, omega7(), 1024).unwrap();
    assert!(r.photons_consumed < 20_000);
    assert!((r.theta_bar - PI / 28.0).abs() < 5.0 * r.delta_theta);
}

#[test]
fn estimation_errors() {
    let spec = ProbeSpec::gear(7).unwrap();
    let e = Evidence::Polarization { h: 3, v: 3 };
    assert!(matches!(
        estimate_evidence(&spec, &e, omega7(), 10),
        Err(Error::CountTooSmall { name: "grid_size", .. })
    ));
    assert!(matches!(
        posterior_from_evidence(&spec, &e, omega7(), 512, Some(&[1.0; 3])),
        Err(Error::PriorLength { expected: 512, found: 3 })
    ));
}
