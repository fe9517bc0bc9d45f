#![allow(dead_code)]

use jump_spectra::measure::{compute_moments, MeasureMoments, MeasureSpec};
use jump_spectra::secular::SecularSeries;
use jump_spectra::{build_basis, BasisSet, DomainSpec};
use std::f64::consts::PI;

pub struct Setup {
    pub basis: BasisSet,
    pub moments: MeasureMoments,
    pub series: SecularSeries,
}

pub fn setup(domain: DomainSpec, spec: &MeasureSpec, cutoff: f64) -> Setup {
    let basis = build_basis(domain, cutoff).unwrap();
    let moments = compute_moments(spec, &basis).unwrap();
    let series = SecularSeries::new(&basis, &moments);
    Setup { basis, moments, series }
}

pub fn disk() -> DomainSpec {
    DomainSpec::unit_disk()
}

pub fn rectangle() -> DomainSpec {
    DomainSpec::rectangle(PI, 1.2337 * PI).unwrap()
}
