mod common;

use common::{disk, setup};
use jump_spectra::enclosure::DirichletDistance;
use jump_spectra::measure::{compute_moments, BaseMeasure, MeasureSpec, Perturbation};
use jump_spectra::{build_basis, Complex64, ModeLabel, Parity};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn secular_function_is_conjugate_symmetric(re in -20.0f64..50.0, im in 0.05f64..15.0) {
        for spec in [MeasureSpec::uniform(), MeasureSpec::dirac([0.3, -0.2])] {
            let s = setup(disk(), &spec, 300.0);
            let z = Complex64::new(re, im);
            let a = s.series.eval(z).unwrap();
            let b = s.series.eval(z.conj()).unwrap();
            prop_assert!((a.value - b.value.conj()).norm() <= 1e-14 * a.value.norm().max(1.0));
            prop_assert_eq!(a.bound, b.bound);
        }
    }

    #[test]
    fn moments_are_affine_in_the_perturbation(s in -1.0f64..1.0, a in -0.05f64..0.05, b in -0.05f64..0.05) {
        let basis = build_basis(disk(), 200.0).unwrap();
        let terms = [
            (ModeLabel::Disk { m: 0, k: 2, parity: Parity::Cos }, a),
            (ModeLabel::Disk { m: 1, k: 1, parity: Parity::Sin }, b),
        ];
        let v = Perturbation::zero_mean_modes(&basis.domain, &terms).unwrap();
        let base = compute_moments(&MeasureSpec::uniform(), &basis).unwrap();
        let full = compute_moments(&MeasureSpec::perturbed(BaseMeasure::Uniform, v.clone()), &basis).unwrap();
        let part = compute_moments(&MeasureSpec::perturbed(BaseMeasure::Uniform, v.scaled(s)), &basis).unwrap();
        for ((p0, p1), ps) in base.moments.iter().zip(&full.moments).zip(&part.moments) {
            prop_assert!((ps - (p0 + s * (p1 - p0))).abs() < 1e-12);
        }
    }

    #[test]
    fn matryoshka_sets_nest(re in -5.0f64..80.0, im in 0.001f64..20.0, t1 in 0.0f64..1.0, t2 in 0.0f64..1.0) {
        let basis = build_basis(disk(), 200.0).unwrap();
        let d = DirichletDistance::new(&basis);
        let (lo, hi) = if t1 < t2 { (t1, t2) } else { (t2, t1) };
        let r = d.ratio(Complex64::new(re, im));
        prop_assert!(r >= 0.0);
        if r <= lo {
            prop_assert!(r <= hi);
        }
    }
}
