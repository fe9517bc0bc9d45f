mod common;

use common::{disk, rectangle, setup};
use jump_spectra::measure::MeasureSpec;
use jump_spectra::secular::ComplexBox;
use jump_spectra::spectrum::{assemble_spectrum, EntryKind};
use jump_spectra::Complex64;
use std::f64::consts::PI;

// Abramowitz & Stegun, Table 9.5
const J01: f64 = 2.404825557695773;
const J11: f64 = 3.831705970207512;
const J21: f64 = 5.135622301840683;
const J02: f64 = 5.520078110286311;
const J31: f64 = 6.380161895923984;
const J12: f64 = 7.015586669815619;

#[test]
fn disk_eigenvalues_match_tabulated_zeros() {
    let s = setup(disk(), &MeasureSpec::uniform(), 60.0);
    let expected = [J01, J11, J11, J21, J21, J02, J31, J31, J12, J12].map(|j| j * j);
    let got = s.basis.eigenvalues();
    for (g, e) in got.iter().zip(expected) {
        assert!((g - e).abs() < 1e-11 * e, "{g} vs {e}");
    }
}

#[test]
fn rectangle_eigenvalues_match_closed_form() {
    let s = setup(rectangle(), &MeasureSpec::uniform(), 40.0);
    let h = 1.2337;
    let mut expected: Vec<f64> = (1..10)
        .flat_map(|m| (1..10).map(move |n| (m * m) as f64 + (n * n) as f64 / (h * h)))
        .filter(|l| *l < 40.0)
        .collect();
    expected.sort_by(f64::total_cmp);
    assert_eq!(s.basis.eigenvalues().len(), expected.len());
    for (g, e) in s.basis.eigenvalues().iter().zip(&expected) {
        assert!((g - e).abs() < 1e-12 * e);
    }
}

#[test]
fn ground_state_secular_function_is_one_pole() {
    let s = setup(disk(), &MeasureSpec::ground_state(), 2000.0);
    let l1 = J01 * J01;
    let mut checked = 0;
    for i in 0..200 {
        let x = -10.0 + 60.0 * i as f64 / 199.0;
        if s.basis.eigenvalues().iter().any(|l| (x - l).abs() < 0.1) {
            continue;
        }
        let (m, bound) = s.series.eval_real(x).unwrap();
        let exact = 1.0 / (l1 - x);
        assert!((m - exact).abs() < 1e-8, "x = {x}: {m} vs {exact}");
        assert!(bound < 1e-8);
        checked += 1;
    }
    assert!(checked >= 100);
}

#[test]
fn ground_state_spectrum_is_dirichlet_minus_first() {
    let s = setup(disk(), &MeasureSpec::ground_state(), 2000.0);
    let window = ComplexBox::new((-1.0, 60.0), (-15.0, 15.0));
    let report = assemble_spectrum(&s.series, &s.basis, &s.moments, window).unwrap();
    assert_eq!(report.entries[0].kind, EntryKind::KernelZero);
    let rest: Vec<f64> = report.entries[1..].iter().map(|e| e.value.re).collect();
    let dirichlet: Vec<f64> = s.basis.distinct_eigenvalues().into_iter().map(|(l, _)| l).filter(|l| *l < 60.0).skip(1).collect();
    assert_eq!(rest.len(), dirichlet.len());
    for (a, b) in rest.iter().zip(&dirichlet) {
        assert!((a - b).abs() <= 1e-8 * b);
    }
    assert!(report.nonreal().next().is_none());
    assert_eq!(report.excluded.len(), 1);
    assert!((report.excluded[0].value - J01 * J01).abs() < 1e-9);
}

#[test]
fn uniform_disk_torsion_moments() {
    let s = setup(disk(), &MeasureSpec::uniform(), 2000.0);
    // m(0) = <T> = 1/8 and m'(0) = <H_D^{-2} 1> = 1/48 for T = (1 - r^2)/4
    let v = s.series.eval(Complex64::new(0.0, 0.0)).unwrap();
    assert!((v.value.re - 0.125).abs() < 1e-6);
    let d = s.series.eval_derivative(Complex64::new(0.0, 0.0)).unwrap();
    assert!((d.re - 1.0 / 48.0).abs() < 1e-8);
}

#[test]
fn uniform_rectangle_torsion_mean_matches_single_series() {
    // \int T = a^3 b / 12 - (16 a^4 / pi^5) sum_{n odd} tanh(n pi b / 2a) / n^5
    let (a, b) = (PI, 1.2337 * PI);
    let tail: f64 = (0..200)
        .map(|k| {
            let n = (2 * k + 1) as f64;
            (n * PI * b / (2.0 * a)).tanh() / n.powi(5)
        })
        .sum();
    let integral = a.powi(3) * b / 12.0 - 16.0 * a.powi(4) / PI.powi(5) * tail;
    let s = setup(rectangle(), &MeasureSpec::uniform(), 2000.0);
    let v = s.series.eval(Complex64::new(0.0, 0.0)).unwrap();
    assert!((v.value.re - integral / (a * b)).abs() < 1e-6, "{} vs {}", v.value.re, integral / (a * b));
}

#[test]
fn dirac_secular_function_is_the_green_function_mean() {
    // for mu = delta_0 on the disk, m(0) = T(0) = 1/4
    let s = setup(disk(), &MeasureSpec::dirac([0.0, 0.0]), 2000.0);
    let v = s.series.eval(Complex64::new(0.0, 0.0)).unwrap();
    assert!((v.value.re - 0.25).abs() <= v.bound.max(1e-9));
}
