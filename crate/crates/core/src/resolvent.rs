//! The operator, its resolvent and its adjoint, acting on Dirichlet coefficients.
//!
//! A vector in the domain of `H_mu` is stored as `u = u_0 + c` with `u_0` vanishing
//! on the boundary and `<u_0>_mu = 0`. Plain `L^2` vectors have `c = 0`. All maps
//! are exact on the span of the retained modes, where the constant function is
//! represented by its truncated expansion `q_n = (1, chi_n)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::basis::BasisSet;
use crate::error::{Error, Result};
use crate::measure::MeasureMoments;
use crate::secular::SecularSeries;

/// Tolerance of the domain check `<u_0>_mu = 0`, relative to `max(1, ||u||)`.
pub const DOMAIN_TOL: f64 = 1e-8;
/// Minimum distance from a Dirichlet eigenvalue for `R_D`.
pub const RD_POLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralVector {
    /// `(u_0, chi_n)`
    pub coeffs: Vec<Complex64>,
    /// The constant `c` in `u = u_0 + c`.
    pub constant_part: Complex64,
    /// Contribution of the modes above the cutoff to `<u_0>_mu`.
    pub tail_functional: Complex64,
}

impl SpectralVector {
    pub fn plain(coeffs: Vec<Complex64>) -> Self {
        Self {
            coeffs,
            constant_part: Complex64::new(0.0, 0.0),
            tail_functional: Complex64::new(0.0, 0.0),
        }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::plain(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    /// The constant function `1` as a domain vector (`u_0 = 0`, `c = 1`).
    pub fn one(len: usize) -> Self {
        Self {
            constant_part: Complex64::new(1.0, 0.0),
            ..Self::plain(vec![Complex64::new(0.0, 0.0); len])
        }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Plain coefficients `(u, chi_n) = (u_0, chi_n) + c q_n`.
    pub fn l2_coeffs(&self, q: &[f64]) -> Vec<Complex64> {
        self.coeffs.iter().zip(q).map(|(u, qn)| u + self.constant_part * qn).collect()
    }

    /// Scales every component.
    pub fn scaled(&self, s: Complex64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
            constant_part: self.constant_part * s,
            tail_functional: self.tail_functional * s,
        }
    }
}

/// `(a, b) = sum a_n conj(b_n)`
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Random complex probe with Gaussian coefficients decaying like `1/n`.
pub fn random_probe<R: Rng + ?Sized>(rng: &mut R, len: usize) -> SpectralVector {
    let coeffs = (0..len)
        .map(|n| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im) / (1.0 + n as f64)
        })
        .collect();
    SpectralVector::plain(coeffs)
}

/// The truncated Krein model of `H_mu` built from a basis and measure moments.
#[derive(Debug, Clone)]
pub struct KreinModel<'a> {
    pub basis: &'a BasisSet,
    pub moments: &'a MeasureMoments,
    pub series: &'a SecularSeries,
    lambdas: Vec<f64>,
    q: Vec<f64>,
}

impl<'a> KreinModel<'a> {
    pub fn new(basis: &'a BasisSet, moments: &'a MeasureMoments, series: &'a SecularSeries) -> Self {
        Self {
            basis,
            moments,
            series,
            lambdas: basis.eigenvalues(),
            q: basis.one_coeffs(),
        }
    }

    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn one_coeffs(&self) -> &[f64] {
        &self.q
    }

    fn p(&self) -> &[f64] {
        &self.moments.moments
    }

    fn check_len(&self, v: &SpectralVector) -> Result<()> {
        if v.len() != self.len() {
            return Err(Error::InvalidInput(format!(
                "vector has {} coefficients, basis has {}",
                v.len(),
                self.len()
            )));
        }
        Ok(())
    }

    fn check_rd(&self, z: Complex64) -> Result<()> {
        for &l in &self.lambdas {
            let d = (z - l).norm();
            if d <= RD_POLE_TOL {
                return Err(Error::PoleProximity {
                    lambda: format!("{z}"),
                    pole: l,
                    distance: d,
                });
            }
        }
        Ok(())
    }

    /// `sum_n q_n p_n / (lambda_n - z)` over every retained mode.
    pub fn secular_model(&self, z: Complex64) -> Complex64 {
        self.lambdas
            .iter()
            .zip(&self.q)
            .zip(self.p())
            .map(|((l, q), p)| q * p / (l - z))
            .sum()
    }

    fn secular_model_derivative(&self, z: Complex64) -> Complex64 {
        self.lambdas
            .iter()
            .zip(&self.q)
            .zip(self.p())
            .map(|((l, q), p)| {
                let d = l - z;
                q * p / (d * d)
            })
            .sum()
    }

    /// Newton refinement of a zero of the truncated secular function.
    pub fn model_root(&self, guess: Complex64) -> Result<Complex64> {
        let mut z = guess;
        for _ in 0..100 {
            let f = self.secular_model(z);
            let d = self.secular_model_derivative(z);
            if d.norm() == 0.0 {
                break;
            }
            let step = f / d;
            z -= step;
            if step.norm() <= 1e-14 * z.norm().max(1.0) {
                return Ok(z);
            }
        }
        if (z - guess).norm() > 1e-3 * guess.norm().max(1.0) {
            return Err(Error::Conditioning(format!(
                "truncated secular root drifted from {guess} to {z}"
            )));
        }
        Ok(z)
    }

    /// Pointwise `(R_D(z) 1)(x)`, resummed as `T(x) + z sum_n q_n chi_n(x) / (lambda_n (lambda_n - z))`.
    pub fn resolvent_of_one_at(&self, z: Complex64, x: crate::domain::Point) -> Result<Complex64> {
        self.check_rd(z)?;
        let mut sum = Complex64::new(0.0, 0.0);
        for (n, (l, q)) in self.lambdas.iter().zip(&self.q).enumerate() {
            if *q != 0.0 {
                sum += q * self.basis.eval(n, x) / (l * (l - z));
            }
        }
        Ok(self.basis.domain.torsion(x) + z * sum)
    }

    /// `<u_0>_mu` including the recorded tail contribution.
    pub fn functional(&self, u: &SpectralVector) -> Complex64 {
        u.coeffs.iter().zip(self.p()).map(|(c, p)| c * p).sum::<Complex64>() + u.tail_functional
    }

    /// `R_D(z) v` for a plain vector (a domain vector is first expanded in `L^2`).
    pub fn apply_rd(&self, z: Complex64, v: &SpectralVector) -> Result<SpectralVector> {
        self.check_len(v)?;
        self.check_rd(z)?;
        let v = v.l2_coeffs(&self.q);
        Ok(SpectralVector::plain(
            v.iter().zip(&self.lambdas).map(|(c, l)| c / (l - z)).collect(),
        ))
    }

    /// Refuses `z` unless `|m(z)|` certifiably exceeds its truncation bound.
    fn certify_resolvent_set(&self, z: Complex64) -> Result<()> {
        let v = self.series.eval(z)?;
        if z.norm() == 0.0 || v.value.norm() <= v.bound {
            return Err(Error::NotInResolventSet {
                lambda: format!("{z}"),
                value: v.value.norm(),
                bound: v.bound,
            });
        }
        Ok(())
    }

    /// Krein formula `R_D v - (z R_D 1 + 1) <R_D v>_mu / (z m(z))`.
    pub fn apply_rmu(&self, z: Complex64, v: &SpectralVector) -> Result<SpectralVector> {
        self.check_len(v)?;
        self.certify_resolvent_set(z)?;
        self.check_rd(z)?;
        let r = self.apply_rd(z, v)?;
        let f: Complex64 = r.coeffs.iter().zip(self.p()).map(|(c, p)| c * p).sum();
        let m = self.secular_model(z);
        let ratio = f / m;
        let coeffs = r
            .coeffs
            .iter()
            .zip(&self.q)
            .zip(&self.lambdas)
            .map(|((c, q), l)| c - q / (l - z) * ratio)
            .collect();
        Ok(SpectralVector {
            coeffs,
            constant_part: -ratio / z,
            tail_functional: Complex64::new(0.0, 0.0),
        })
    }

    /// `H_mu u = H_D u_0`, after checking `<u_0>_mu = 0`.
    pub fn apply_hmu(&self, u: &SpectralVector) -> Result<SpectralVector> {
        self.check_len(u)?;
        let defect = self.functional(u);
        let scale = norm(&u.l2_coeffs(&self.q)).max(1.0);
        if defect.norm() > DOMAIN_TOL * scale {
            return Err(Error::DomainMembership { defect: defect.norm() });
        }
        Ok(SpectralVector::plain(
            u.coeffs.iter().zip(&self.lambdas).map(|(c, l)| c * l).collect(),
        ))
    }

    /// Relative residual `||(H_mu - z) R_mu(z) v - v|| / ||v||`.
    pub fn resolvent_identity_residual(&self, z: Complex64, v: &SpectralVector) -> Result<f64> {
        let u = self.apply_rmu(z, v)?;
        let hu = self.apply_hmu(&u)?;
        let ul2 = u.l2_coeffs(&self.q);
        let vl2 = v.l2_coeffs(&self.q);
        let res: Vec<Complex64> = hu
            .coeffs
            .iter()
            .zip(&ul2)
            .zip(&vl2)
            .map(|((h, u), v)| h - z * u - v)
            .collect();
        Ok(norm(&res) / norm(&vl2))
    }

    /// The identity residual with `<u_0>_mu = 0` re-checked against independently computed moments.
    pub fn checked_identity_residual(&self, z: Complex64, v: &SpectralVector, reference: &MeasureMoments) -> Result<f64> {
        if reference.moments.len() != self.len() {
            return Err(Error::InvalidInput("reference moments do not match the basis".into()));
        }
        let r = self.resolvent_identity_residual(z, v)?;
        let u = self.apply_rmu(z, v)?;
        let defect: Complex64 = u.coeffs.iter().zip(&reference.moments).map(|(c, p)| c * p).sum();
        Ok(r.max(defect.norm() / norm(&v.l2_coeffs(&self.q))))
    }

    fn require_density(&self) -> Result<()> {
        if self.moments.l2_density_norm.is_none() {
            return Err(Error::UnsupportedMeasure(self.moments.spec.name().into()));
        }
        Ok(())
    }

    /// `R_D(z) v - (v, conj(z) R_D(conj z) 1 + 1) R_D(z) w / (z m(z))`.
    pub fn apply_rmu_star(&self, z: Complex64, v: &SpectralVector) -> Result<SpectralVector> {
        self.require_density()?;
        self.check_len(v)?;
        self.certify_resolvent_set(z.conj())?;
        let r = self.apply_rd(z, v)?;
        let vl2 = v.l2_coeffs(&self.q);
        // (v, conj(z) R_D(conj z) 1 + 1) = sum v_n q_n lambda_n / (lambda_n - z)
        let pairing: Complex64 = vl2
            .iter()
            .zip(&self.q)
            .zip(&self.lambdas)
            .map(|((v, q), l)| v * q * l / (l - z))
            .sum();
        let factor = pairing / (z * self.secular_model(z));
        Ok(SpectralVector::plain(
            r.coeffs
                .iter()
                .zip(self.p())
                .zip(&self.lambdas)
                .map(|((c, p), l)| c - factor * p / (l - z))
                .collect(),
        ))
    }

    /// `sum q_n p_n`, the truncated value of `(w, 1) = 1`.
    pub fn normalization(&self) -> f64 {
        self.q.iter().zip(self.p()).map(|(q, p)| q * p).sum()
    }

    /// `|1 - (w, 1)|` in the truncated space.
    pub fn normalization_defect(&self) -> f64 {
        (1.0 - self.normalization()).abs()
    }

    /// `H_mu^* g = H_D g - (H_D g, 1) w / (w, 1)` for `g` vanishing on the boundary.
    pub fn apply_hmu_star(&self, g: &SpectralVector) -> Result<SpectralVector> {
        self.require_density()?;
        self.check_len(g)?;
        let hd: Vec<Complex64> = g.l2_coeffs(&self.q).iter().zip(&self.lambdas).map(|(c, l)| c * l).collect();
        let against_one: Complex64 = hd.iter().zip(&self.q).map(|(h, q)| h * q).sum();
        let s = against_one / self.normalization();
        Ok(SpectralVector::plain(
            hd.iter().zip(self.p()).map(|(h, p)| h - s * p).collect(),
        ))
    }

    /// `R_D(z) w`, which spans `ker(H_mu^* - z)` when `z` is a secular root (or `z = 0`).
    pub fn adjoint_eigenvector(&self, z: Complex64) -> Result<SpectralVector> {
        self.require_density()?;
        self.apply_rd(z, &SpectralVector::from_real(self.p()))
    }

    /// `R_D(0) w`, the adjoint kernel.
    pub fn adjoint_kernel(&self) -> Result<SpectralVector> {
        self.adjoint_eigenvector(Complex64::new(0.0, 0.0))
    }

    /// `||H_mu^* g - z g|| / ||g||`.
    pub fn adjoint_residual(&self, z: Complex64, g: &SpectralVector) -> Result<f64> {
        let h = self.apply_hmu_star(g)?;
        let gl2 = g.l2_coeffs(&self.q);
        let r: Vec<Complex64> = h.coeffs.iter().zip(&gl2).map(|(a, b)| a - z * b).collect();
        Ok(norm(&r) / norm(&gl2))
    }

    /// `|(R_mu(conj z) u, v) - (u, R_mu^*(z) v)|`, relative to `||u|| ||v||`.
    pub fn adjoint_pairing_defect(&self, z: Complex64, u: &SpectralVector, v: &SpectralVector) -> Result<f64> {
        let left = self.apply_rmu(z.conj(), u)?.l2_coeffs(&self.q);
        let right = self.apply_rmu_star(z, v)?.coeffs;
        let ul2 = u.l2_coeffs(&self.q);
        let vl2 = v.l2_coeffs(&self.q);
        let d = inner(&left, &vl2) - inner(&ul2, &right);
        Ok(d.norm() / (norm(&ul2) * norm(&vl2)))
    }

    /// `max ||(R_mu(-1) - R_mu^*(-1)) v|| / ||v||` over random probes.
    pub fn nonselfadjointness_witness<R: Rng + ?Sized>(&self, rng: &mut R, probes: usize) -> Result<f64> {
        let z = Complex64::new(-1.0, 0.0);
        let mut best: f64 = 0.0;
        for _ in 0..probes.max(10) {
            let v = random_probe(rng, self.len());
            let a = self.apply_rmu(z, &v)?.l2_coeffs(&self.q);
            let b = self.apply_rmu_star(z, &v)?.coeffs;
            best = best.max(norm(&sub(&a, &b)) / norm(&v.coeffs));
        }
        Ok(best)
    }
}
