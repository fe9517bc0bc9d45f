mod common;

use common::{disk, setup};
use jump_spectra::bessel::{bessel_j, bessel_zero};
use jump_spectra::measure::MeasureSpec;
use jump_spectra::stochastic::*;

fn l1(spec: &MeasureSpec, cfg: &WalkConfig) -> (f64, OccupationHistogram) {
    let s = setup(disk(), spec, 400.0);
    let bins = Bins::default_for(&s.basis.domain);
    let h = simulate_occupation(cfg, &s.basis.domain, spec, bins.clone()).unwrap();
    let pred = bins.average(stationary_density(&s.basis, &s.moments));
    (compare_stationary(&h, &pred).unwrap(), h)
}

#[test]
fn occupation_matches_the_adjoint_kernel() {
    let cfg = WalkConfig::new(1e-4, 20_000, 400, 21);
    for spec in [MeasureSpec::uniform(), MeasureSpec::ground_state()] {
        let (d, h) = l1(&spec, &cfg);
        assert!(d < 0.08, "{}: {d}", spec.name());
        assert!((h.mass() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn ground_state_restarts_follow_the_radial_law() {
    let j = bessel_zero(0, 1);
    let pts = restart_sample(&MeasureSpec::ground_state(), &disk(), 5000, 9).unwrap();
    let radii: Vec<f64> = pts.iter().map(|p| p[0].hypot(p[1])).collect();
    // P(|X| <= r) = r J_1(j r) / J_1(j)
    let (_, p) = ks_test(&radii, |r| r * bessel_j(1, j * r) / bessel_j(1, j));
    assert!(p > 0.01, "{p}");
}

#[test]
fn halving_the_step_stays_within_the_error_bar() {
    let spec = MeasureSpec::uniform();
    let s = setup(disk(), &spec, 400.0);
    let bins = Bins::default_for(&s.basis.domain);
    let pred = bins.average(stationary_density(&s.basis, &s.moments));
    let stats = |dt: f64| {
        let cfg = WalkConfig::new(dt, (2.0 / dt) as u64, 100, 4);
        let batches = simulate_batches(&cfg, &s.basis.domain, &spec, &bins, 10).unwrap();
        let d: Vec<f64> = batches.iter().map(|h| compare_stationary(h, &pred).unwrap()).collect();
        let mean = d.iter().sum::<f64>() / 10.0;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 9.0;
        (mean, (var / 10.0).sqrt())
    };
    let (a, ea) = stats(2e-4);
    let (b, eb) = stats(1e-4);
    let bar = 3.0 * (ea * ea + eb * eb).sqrt();
    assert!((a - b).abs() < bar, "{a} vs {b}, bar {bar}");
}

#[test]
fn csv_lists_bins() {
    let cfg = WalkConfig::new(1e-4, 1000, 4, 1);
    let (_, h) = l1(&MeasureSpec::uniform(), &cfg);
    let csv = h.to_csv(&h.normalized_density);
    assert!(csv.starts_with("bin_lo,bin_hi,density_empirical,density_predicted\n"));
    assert_eq!(csv.lines().count(), 21);
}
