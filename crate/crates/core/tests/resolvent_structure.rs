mod common;

use common::{disk, rectangle, setup, Setup};
use jump_spectra::measure::MeasureSpec;
use jump_spectra::resolvent::{random_probe, KreinModel, SpectralVector};
use jump_spectra::Complex64;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Matrix of `R_mu(z) - R_D(z)` in Dirichlet coordinates.
fn krein_difference(k: &KreinModel, z: Complex64) -> DMatrix<Complex64> {
    let n = k.len();
    let q = k.one_coeffs().to_vec();
    let mut m = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![c(0.0); n];
        e[j] = c(1.0);
        let v = SpectralVector::plain(e);
        let a = k.apply_rmu(z, &v).unwrap().l2_coeffs(&q);
        let b = k.apply_rd(z, &v).unwrap().coeffs;
        for i in 0..n {
            m[(i, j)] = a[i] - b[i];
        }
    }
    m
}

#[test]
fn krein_correction_has_rank_one() {
    for (domain, spec) in [
        (disk(), MeasureSpec::uniform()),
        (rectangle(), MeasureSpec::uniform()),
        (disk(), MeasureSpec::dirac([0.2, 0.1])),
    ] {
        let Setup { basis, moments, series } = setup(domain, &spec, 150.0);
        let k = KreinModel::new(&basis, &moments, &series);
        for z in [c(-1.0), c(-5.0), Complex64::new(3.0, 2.0)] {
            let sv = krein_difference(&k, z).svd(false, false).singular_values;
            assert!(sv[0] > 1e-6);
            assert!(sv[1] < 1e-9 * sv[0], "{}: {} vs {}", spec.name(), sv[1], sv[0]);
        }
    }
}

#[test]
fn only_constants_are_annihilated() {
    // H_mu on its domain: (u_0, c) with p . u_0 = 0 maps to H_D u_0.
    let Setup { basis, moments, series } = setup(disk(), &MeasureSpec::uniform(), 150.0);
    let k = KreinModel::new(&basis, &moments, &series);
    let n = k.len();
    let mut m = DMatrix::<f64>::zeros(n + 1, n + 1);
    for (i, mode) in basis.modes.iter().enumerate() {
        m[(i, i)] = mode.eigenvalue;
        m[(n, i)] = moments.moments[i];
    }
    let svd = m.svd(false, true);
    let zero = svd.singular_values.iter().filter(|s| **s < 1e-10).count();
    assert_eq!(zero, 1);
    let v_t = svd.v_t.unwrap();
    let (idx, _) = svd.singular_values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let null = v_t.row(idx);
    assert!((null[n].abs() - 1.0).abs() < 1e-12);

    let h1 = k.apply_hmu(&SpectralVector::one(n)).unwrap();
    assert!(h1.coeffs.iter().all(|x| x.norm() == 0.0));
}

#[test]
fn adjoint_kernel_is_a_positive_density() {
    for (domain, spec) in [(disk(), MeasureSpec::uniform()), (disk(), MeasureSpec::ground_state()), (rectangle(), MeasureSpec::uniform())] {
        let Setup { basis, moments, series } = setup(domain, &spec, 600.0);
        let k = KreinModel::new(&basis, &moments, &series);
        let g = k.adjoint_kernel().unwrap();
        assert!(k.adjoint_residual(c(0.0), &g).unwrap() < 1e-8);
        let re: Vec<f64> = g.coeffs.iter().map(|x| x.re).collect();
        let values = basis.synthesize(&re);
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        assert!(min > -1e-6 * max, "{}: min {min}", spec.name());
    }
}

#[test]
fn probes_satisfy_identity_and_adjoint_pairing() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for spec in [MeasureSpec::uniform(), MeasureSpec::ground_state()] {
        let Setup { basis, moments, series } = setup(disk(), &spec, 400.0);
        let k = KreinModel::new(&basis, &moments, &series);
        for z in [c(-1.0), c(-5.0)] {
            for _ in 0..20 {
                let u = random_probe(&mut rng, k.len());
                let v = random_probe(&mut rng, k.len());
                assert!(k.checked_identity_residual(z, &u, &moments).unwrap() < 1e-8);
                assert!(k.adjoint_pairing_defect(z, &u, &v).unwrap() < 1e-8);
            }
        }
        assert!(k.nonselfadjointness_witness(&mut rng, 20).unwrap() > 1e-6);
    }
}

#[test]
fn corrupted_moments_break_the_checked_identity() {
    let Setup { basis, moments, .. } = setup(disk(), &MeasureSpec::uniform(), 400.0);
    let bad = moments.corrupted(1.5);
    let series = jump_spectra::secular::SecularSeries::new(&basis, &bad);
    let k = KreinModel::new(&basis, &bad, &series);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let u = random_probe(&mut rng, k.len());
    // the model is self-consistent, only the independent domain check sees the fault
    assert!(k.resolvent_identity_residual(c(-1.0), &u).unwrap() < 1e-12);
    assert!(k.checked_identity_residual(c(-1.0), &u, &moments).unwrap() > 1e-6);
    assert!(k.normalization_defect() > 1e-6);
}
