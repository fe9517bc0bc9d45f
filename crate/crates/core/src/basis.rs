//! Closed-form Dirichlet eigenbasis `{lambda_n, chi_n}` of `-Laplace`.
//!
//! Modes are enumerated up to a cutoff `Lambda`, ordered by eigenvalue with
//! ties broken by label. Grid projections and syntheses exploit the separable
//! structure of both bases, so they never materialise a dense
//! modes-by-nodes matrix.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::Range;

use crate::bessel::{bessel_j, bessel_j_all, bessel_j_with_derivative, bessel_zeros_below};
use crate::domain::{DomainSpec, Point, Shape};
use crate::error::{Error, Result};
use crate::quadrature::GridRule;

/// Relative tolerance used to group numerically equal eigenvalues.
pub const CLUSTER_TOL: f64 = 1e-9;

pub fn same_eigenvalue(a: f64, b: f64) -> bool {
    (a - b).abs() <= CLUSTER_TOL * (1.0 + a.abs().max(b.abs()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ModeLabel {
    /// `sin(m pi x / a) sin(n pi y / b)`
    Rect { m: u32, n: u32 },
    /// `J_m(j_{m,k} r) cos(m theta)` or `sin(m theta)`
    Disk { m: u32, k: u32, parity: Parity },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    /// One-based position in the global enumeration.
    pub index: usize,
    pub eigenvalue: f64,
    pub label: ModeLabel,
    /// `(1, chi_n)`
    pub one_coeff: f64,
    /// Multiplies the unnormalised product form (includes the sign convention).
    scale: f64,
    /// `sqrt(eigenvalue)` for disk modes (`j_{m,k}`), unused for rectangles.
    wavenumber: f64,
}

impl Mode {
    fn disk(m: u32, k: u32, parity: Parity, j: f64) -> Self {
        let j_next = bessel_j(m as usize + 1, j);
        // ||J_m(j r) trig(m theta)||^2 = pi J_1(j)^2 for m = 0 and (pi/2) J_{m+1}(j)^2 otherwise.
        let angular = if m == 0 { PI } else { 0.5 * PI };
        let norm = angular.sqrt() * j_next.abs();
        // Radial modes are signed so that (1, chi) > 0.
        let sign = if m == 0 { j_next.signum() } else { 1.0 };
        let one_coeff = if m == 0 { 2.0 * PI.sqrt() / j } else { 0.0 };
        Self {
            index: 0,
            eigenvalue: j * j,
            label: ModeLabel::Disk { m, k, parity },
            one_coeff,
            scale: sign / norm,
            wavenumber: j,
        }
    }

    fn rect(m: u32, n: u32, a: f64, b: f64) -> Self {
        let lam = (m as f64 * PI / a).powi(2) + (n as f64 * PI / b).powi(2);
        let one_coeff = if m % 2 == 1 && n % 2 == 1 {
            8.0 * (a * b).sqrt() / (m as f64 * n as f64 * PI * PI)
        } else {
            0.0
        };
        Self {
            index: 0,
            eigenvalue: lam,
            label: ModeLabel::Rect { m, n },
            one_coeff,
            scale: 2.0 / (a * b).sqrt(),
            wavenumber: lam.sqrt(),
        }
    }

    /// Builds the mode with a given label, independent of any cutoff.
    /// The returned index is 0 (not part of an enumeration).
    pub fn from_label(label: ModeLabel, domain: &DomainSpec) -> Result<Self> {
        match (label, domain.shape) {
            (ModeLabel::Disk { m, k, parity }, Shape::UnitDisk) if k >= 1 && !(m == 0 && parity == Parity::Sin) => {
                Ok(Self::disk(m, k, parity, crate::bessel::bessel_zero(m as usize, k as usize)))
            }
            (ModeLabel::Rect { m, n }, Shape::Rectangle { width, height }) if m >= 1 && n >= 1 => {
                Ok(Self::rect(m, n, width, height))
            }
            _ => Err(Error::InvalidInput(format!("{label:?} is not a Dirichlet mode of {:?}", domain.shape))),
        }
    }

    /// The positive ground state `chi_1`.
    pub fn ground_state(domain: &DomainSpec) -> Self {
        static DISK: std::sync::OnceLock<Mode> = std::sync::OnceLock::new();
        let label = match domain.shape {
            Shape::UnitDisk => {
                return DISK
                    .get_or_init(|| {
                        let mut mode = Self::disk(0, 1, Parity::Cos, crate::bessel::bessel_zero(0, 1));
                        mode.index = 1;
                        mode
                    })
                    .clone()
            }
            Shape::Rectangle { .. } => ModeLabel::Rect { m: 1, n: 1 },
        };
        let mut mode = Self::from_label(label, domain).expect("ground state label matches the domain");
        mode.index = 1;
        mode
    }

    /// `chi_n(p)`; zero outside the domain.
    pub fn eval(&self, domain: &DomainSpec, p: Point) -> f64 {
        match (self.label, domain.shape) {
            (ModeLabel::Disk { m, parity, .. }, Shape::UnitDisk) => {
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                if r >= 1.0 {
                    return 0.0;
                }
                let theta = p[1].atan2(p[0]);
                let angular = angular_factor(m, parity, theta);
                self.scale * bessel_j(m as usize, self.wavenumber * r) * angular
            }
            (ModeLabel::Rect { m, n }, Shape::Rectangle { width, height }) => {
                if !domain.contains(p) {
                    return 0.0;
                }
                self.scale * (m as f64 * PI * p[0] / width).sin() * (n as f64 * PI * p[1] / height).sin()
            }
            _ => panic!("mode label does not match domain shape"),
        }
    }

    /// Cartesian gradient `grad chi_n(p)`.
    pub fn gradient(&self, domain: &DomainSpec, p: Point) -> [f64; 2] {
        match (self.label, domain.shape) {
            (ModeLabel::Disk { m, parity, .. }, Shape::UnitDisk) => {
                let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
                let theta = p[1].atan2(p[0]);
                let (jv, jd) = bessel_j_with_derivative(m as usize, self.wavenumber * r);
                let ang = angular_factor(m, parity, theta);
                let dang = angular_derivative(m, parity, theta);
                let d_r = self.scale * self.wavenumber * jd * ang;
                let d_t_over_r = if r > 0.0 {
                    self.scale * jv * dang / r
                } else if m == 1 {
                    // J_1(j r)/r -> j/2 at the origin
                    self.scale * 0.5 * self.wavenumber * dang
                } else {
                    0.0
                };
                let (c, s) = (theta.cos(), theta.sin());
                [d_r * c - d_t_over_r * s, d_r * s + d_t_over_r * c]
            }
            (ModeLabel::Rect { m, n }, Shape::Rectangle { width, height }) => {
                let kx = m as f64 * PI / width;
                let ky = n as f64 * PI / height;
                [
                    self.scale * kx * (kx * p[0]).cos() * (ky * p[1]).sin(),
                    self.scale * ky * (kx * p[0]).sin() * (ky * p[1]).cos(),
                ]
            }
            _ => panic!("mode label does not match domain shape"),
        }
    }
}

fn angular_factor(m: u32, parity: Parity, theta: f64) -> f64 {
    match parity {
        Parity::Cos => (m as f64 * theta).cos(),
        Parity::Sin => (m as f64 * theta).sin(),
    }
}

fn angular_derivative(m: u32, parity: Parity, theta: f64) -> f64 {
    let mf = m as f64;
    match parity {
        Parity::Cos => -mf * (mf * theta).sin(),
        Parity::Sin => mf * (mf * theta).cos(),
    }
}

/// `(1, chi)` for a single mode of the domain's basis.
pub fn one_coefficient(mode: &Mode, domain: &DomainSpec) -> f64 {
    debug_assert!(matches!(
        (mode.label, domain.shape),
        (ModeLabel::Disk { .. }, Shape::UnitDisk) | (ModeLabel::Rect { .. }, Shape::Rectangle { .. })
    ));
    mode.one_coeff
}

#[derive(Debug, Clone)]
enum Tables {
    Disk {
        /// per mode: scaled `J_m(j r_i)`
        radial: Vec<Vec<f64>>,
        /// per mode: scaled `d/dr J_m(j r_i)`
        radial_deriv: Vec<Vec<f64>>,
        max_m: usize,
        cos: Vec<Vec<f64>>,
        sin: Vec<Vec<f64>>,
    },
    Rect {
        /// `sqrt(2/a) sin(m pi x_i / a)` for m = 0..=max_m
        x_tab: Vec<Vec<f64>>,
        x_deriv: Vec<Vec<f64>>,
        y_tab: Vec<Vec<f64>>,
        y_deriv: Vec<Vec<f64>>,
    },
}

/// Dirichlet modes up to a cutoff together with the quadrature grid used to
/// project onto them.
#[derive(Debug, Clone)]
pub struct BasisSet {
    pub domain: DomainSpec,
    pub modes: Vec<Mode>,
    pub cutoff: f64,
    pub quadrature: GridRule,
    tables: Tables,
}

/// Smallest grid that still samples the highest retained mode at the Nyquist rate.
pub fn required_resolution(domain: &DomainSpec, cutoff: f64) -> (usize, usize) {
    let k = cutoff.max(0.0).sqrt();
    match domain.shape {
        Shape::UnitDisk => ((2.0 * k / PI).ceil() as usize + 4, 2 * k.ceil() as usize + 2),
        Shape::Rectangle { width, height } => (
            2 * (width * k / PI).ceil() as usize + 2,
            2 * (height * k / PI).ceil() as usize + 2,
        ),
    }
}

/// Default grid: comfortably above the Nyquist rate so that pairwise products
/// of retained modes integrate to near machine precision.
pub fn default_resolution(domain: &DomainSpec, cutoff: f64) -> (usize, usize) {
    let k = cutoff.max(0.0).sqrt();
    match domain.shape {
        Shape::UnitDisk => {
            let n_theta = 4 * k.ceil() as usize + 32;
            (32 + (1.2 * k).ceil() as usize, n_theta.next_multiple_of(4))
        }
        Shape::Rectangle { width, height } => (
            32 + (2.5 * width * k / PI).ceil() as usize,
            32 + (2.5 * height * k / PI).ceil() as usize,
        ),
    }
}

/// Builds every Dirichlet mode with eigenvalue `<= cutoff` on the default grid.
pub fn build_basis(domain: DomainSpec, cutoff: f64) -> Result<BasisSet> {
    let (n1, n2) = default_resolution(&domain, cutoff);
    build_basis_with_resolution(domain, cutoff, n1, n2)
}

pub fn build_basis_with_resolution(domain: DomainSpec, cutoff: f64, n1: usize, n2: usize) -> Result<BasisSet> {
    let lowest = match domain.shape {
        Shape::UnitDisk => crate::bessel::bessel_zero(0, 1).powi(2),
        Shape::Rectangle { width, height } => (PI / width).powi(2) + (PI / height).powi(2),
    };
    if !(cutoff >= lowest) {
        return Err(Error::EmptyBasis { cutoff, lowest });
    }
    let (req1, req2) = required_resolution(&domain, cutoff);
    let axes = if domain.is_disk() { ("radius", "angle") } else { ("x", "y") };
    if n1 < req1 {
        return Err(Error::Resolution {
            axis: axes.0,
            nodes: n1,
            required: req1,
            cutoff,
        });
    }
    if n2 < req2 {
        return Err(Error::Resolution {
            axis: axes.1,
            nodes: n2,
            required: req2,
            cutoff,
        });
    }

    let mut modes = enumerate_modes(&domain, cutoff);
    modes.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue).then(a.label.cmp(&b.label)));
    for (i, mode) in modes.iter_mut().enumerate() {
        mode.index = i + 1;
    }
    let quadrature = GridRule::for_domain(&domain, n1, n2);
    let tables = build_tables(&domain, &modes, &quadrature);
    Ok(BasisSet {
        domain,
        modes,
        cutoff,
        quadrature,
        tables,
    })
}

fn enumerate_modes(domain: &DomainSpec, cutoff: f64) -> Vec<Mode> {
    let mut modes = Vec::new();
    match domain.shape {
        Shape::UnitDisk => {
            let zeros = bessel_zeros_below(cutoff.sqrt());
            for (m, list) in zeros.iter().enumerate() {
                for (k, &j) in list.iter().enumerate() {
                    if j * j > cutoff {
                        continue;
                    }
                    let (m, k) = (m as u32, k as u32 + 1);
                    modes.push(Mode::disk(m, k, Parity::Cos, j));
                    if m > 0 {
                        modes.push(Mode::disk(m, k, Parity::Sin, j));
                    }
                }
            }
        }
        Shape::Rectangle { width, height } => {
            let mut m = 1u32;
            while (m as f64 * PI / width).powi(2) < cutoff {
                let mut n = 1u32;
                loop {
                    let mode = Mode::rect(m, n, width, height);
                    if mode.eigenvalue > cutoff {
                        break;
                    }
                    modes.push(mode);
                    n += 1;
                }
                m += 1;
            }
        }
    }
    modes
}

fn build_tables(domain: &DomainSpec, modes: &[Mode], rule: &GridRule) -> Tables {
    match (domain.shape, rule) {
        (Shape::UnitDisk, GridRule::Polar { radii, n_theta, .. }) => {
            let max_m = modes
                .iter()
                .map(|m| match m.label {
                    ModeLabel::Disk { m, .. } => m as usize,
                    _ => 0,
                })
                .max()
                .unwrap_or(0);
            let mut radial = Vec::with_capacity(modes.len());
            let mut radial_deriv = Vec::with_capacity(modes.len());
            for mode in modes {
                let ModeLabel::Disk { m, .. } = mode.label else { unreachable!() };
                let m = m as usize;
                let mut vals = Vec::with_capacity(radii.len());
                let mut ders = Vec::with_capacity(radii.len());
                for &r in radii {
                    let all = bessel_j_all(m + 1, mode.wavenumber * r);
                    let d = if m == 0 { -all[1] } else { 0.5 * (all[m - 1] - all[m + 1]) };
                    vals.push(mode.scale * all[m]);
                    ders.push(mode.scale * mode.wavenumber * d);
                }
                radial.push(vals);
                radial_deriv.push(ders);
            }
            let angles: Vec<f64> = (0..*n_theta).map(|j| 2.0 * PI * j as f64 / *n_theta as f64).collect();
            let cos = (0..=max_m)
                .map(|m| angles.iter().map(|t| (m as f64 * t).cos()).collect())
                .collect();
            let sin = (0..=max_m)
                .map(|m| angles.iter().map(|t| (m as f64 * t).sin()).collect())
                .collect();
            Tables::Disk {
                radial,
                radial_deriv,
                max_m,
                cos,
                sin,
            }
        }
        (Shape::Rectangle { width, height }, GridRule::Tensor { xs, ys, .. }) => {
            let (mut mx, mut my) = (0usize, 0usize);
            for mode in modes {
                if let ModeLabel::Rect { m, n } = mode.label {
                    mx = mx.max(m as usize);
                    my = my.max(n as usize);
                }
            }
            let table = |len: f64, pts: &[f64], max: usize| -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
                let s = (2.0 / len).sqrt();
                let vals = (0..=max)
                    .map(|m| pts.iter().map(|x| s * (m as f64 * PI * x / len).sin()).collect())
                    .collect();
                let ders = (0..=max)
                    .map(|m| {
                        let k = m as f64 * PI / len;
                        pts.iter().map(|x| s * k * (k * x).cos()).collect()
                    })
                    .collect();
                (vals, ders)
            };
            let (x_tab, x_deriv) = table(width, xs, mx);
            let (y_tab, y_deriv) = table(height, ys, my);
            Tables::Rect {
                x_tab,
                x_deriv,
                y_tab,
                y_deriv,
            }
        }
        _ => unreachable!("grid rule built for the domain"),
    }
}

impl BasisSet {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.eigenvalue).collect()
    }

    /// `(1, chi_n)` for all modes.
    pub fn one_coeffs(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.one_coeff).collect()
    }

    pub fn ground_state(&self) -> &Mode {
        &self.modes[0]
    }

    /// Index ranges of modes sharing an eigenvalue.
    pub fn clusters(&self) -> Vec<Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.modes.len() {
            if i == self.modes.len() || !same_eigenvalue(self.modes[i].eigenvalue, self.modes[start].eigenvalue) {
                out.push(start..i);
                start = i;
            }
        }
        out
    }

    /// Distinct eigenvalues with multiplicities.
    pub fn distinct_eigenvalues(&self) -> Vec<(f64, usize)> {
        self.clusters()
            .into_iter()
            .map(|r| (self.modes[r.start].eigenvalue, r.len()))
            .collect()
    }

    /// `dist(z, sigma(H_D))` using retained eigenvalues and `Lambda - Re z` for the rest.
    pub fn distance_to_spectrum(&self, re: f64, im: f64) -> f64 {
        let mut best = f64::INFINITY;
        for (lam, _) in self.distinct_eigenvalues() {
            best = best.min(((lam - re).powi(2) + im * im).sqrt());
        }
        best.min(((self.cutoff - re).max(0.0).powi(2) + im * im).sqrt())
    }

    /// Position of a label in the enumeration.
    pub fn position(&self, label: ModeLabel) -> Option<usize> {
        self.modes.iter().position(|m| m.label == label)
    }

    pub fn eval(&self, n: usize, p: Point) -> f64 {
        self.modes[n].eval(&self.domain, p)
    }

    /// Evaluates `sum_n coeffs[n] chi_n(p)` pointwise.
    pub fn eval_series(&self, coeffs: &[f64], p: Point) -> f64 {
        self.modes
            .iter()
            .zip(coeffs)
            .filter(|(_, c)| **c != 0.0)
            .map(|(m, c)| c * m.eval(&self.domain, p))
            .sum()
    }

    /// `(chi_n, f)` for every mode, with `f` given by its grid samples.
    pub fn project(&self, values: &[f64]) -> Vec<f64> {
        assert_eq!(values.len(), self.quadrature.len(), "grid size mismatch");
        match (&self.tables, &self.quadrature) {
            (
                Tables::Disk {
                    radial, max_m, cos, sin, ..
                },
                GridRule::Polar {
                    radial_weights,
                    n_theta,
                    ..
                },
            ) => {
                let n_r = radial_weights.len();
                let dt = 2.0 * PI / *n_theta as f64;
                let mut c_proj = vec![vec![0.0; n_r]; max_m + 1];
                let mut s_proj = vec![vec![0.0; n_r]; max_m + 1];
                for i in 0..n_r {
                    let row = &values[i * n_theta..(i + 1) * n_theta];
                    for m in 0..=*max_m {
                        let (mut a, mut b) = (0.0, 0.0);
                        for j in 0..*n_theta {
                            a += row[j] * cos[m][j];
                            b += row[j] * sin[m][j];
                        }
                        c_proj[m][i] = a * dt;
                        s_proj[m][i] = b * dt;
                    }
                }
                self.modes
                    .iter()
                    .zip(radial)
                    .map(|(mode, rad)| {
                        let ModeLabel::Disk { m, parity, .. } = mode.label else { unreachable!() };
                        let ang = match parity {
                            Parity::Cos => &c_proj[m as usize],
                            Parity::Sin => &s_proj[m as usize],
                        };
                        (0..n_r).map(|i| radial_weights[i] * rad[i] * ang[i]).sum()
                    })
                    .collect()
            }
            (
                Tables::Rect { x_tab, y_tab, .. },
                GridRule::Tensor {
                    x_weights, y_weights, ..
                },
            ) => {
                let (nx, ny) = (x_weights.len(), y_weights.len());
                let partial: Vec<Vec<f64>> = x_tab
                    .iter()
                    .map(|xm| {
                        let mut acc = vec![0.0; ny];
                        for i in 0..nx {
                            let w = x_weights[i] * xm[i];
                            let row = &values[i * ny..(i + 1) * ny];
                            for j in 0..ny {
                                acc[j] += w * row[j];
                            }
                        }
                        acc
                    })
                    .collect();
                self.modes
                    .iter()
                    .map(|mode| {
                        let ModeLabel::Rect { m, n } = mode.label else { unreachable!() };
                        let g = &partial[m as usize];
                        let yn = &y_tab[n as usize];
                        (0..ny).map(|j| y_weights[j] * yn[j] * g[j]).sum()
                    })
                    .collect()
            }
            _ => unreachable!(),
        }
    }

    /// Grid samples of `sum_n coeffs[n] chi_n`.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        self.synthesize_with(coeffs, Component::Value)
    }

    /// Grid samples of the two orthonormal gradient components of
    /// `sum_n coeffs[n] chi_n`: `(d_r, d_theta / r)` on the disk and
    /// `(d_x, d_y)` on the rectangle.
    pub fn synthesize_gradient(&self, coeffs: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (
            self.synthesize_with(coeffs, Component::First),
            self.synthesize_with(coeffs, Component::Second),
        )
    }

    fn synthesize_with(&self, coeffs: &[f64], component: Component) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.modes.len());
        match (&self.tables, &self.quadrature) {
            (
                Tables::Disk {
                    radial,
                    radial_deriv,
                    max_m,
                    cos,
                    sin,
                },
                GridRule::Polar { radii, n_theta, .. },
            ) => {
                let n_r = radii.len();
                let mut a_cos = vec![vec![0.0; n_r]; max_m + 1];
                let mut a_sin = vec![vec![0.0; n_r]; max_m + 1];
                for ((mode, c), (rad, der)) in self.modes.iter().zip(coeffs).zip(radial.iter().zip(radial_deriv)) {
                    if *c == 0.0 {
                        continue;
                    }
                    let ModeLabel::Disk { m, parity, .. } = mode.label else { unreachable!() };
                    let mf = m as f64;
                    // d/dtheta maps cos -> -m sin and sin -> m cos
                    let (target, factor) = match (component, parity) {
                        (Component::Second, Parity::Cos) => (&mut a_sin[m as usize], -mf),
                        (Component::Second, Parity::Sin) => (&mut a_cos[m as usize], mf),
                        (_, Parity::Cos) => (&mut a_cos[m as usize], 1.0),
                        (_, Parity::Sin) => (&mut a_sin[m as usize], 1.0),
                    };
                    for i in 0..n_r {
                        let base = match component {
                            Component::Value => rad[i],
                            Component::First => der[i],
                            Component::Second => rad[i] / radii[i],
                        };
                        target[i] += c * factor * base;
                    }
                }
                let mut out = vec![0.0; n_r * n_theta];
                for i in 0..n_r {
                    let row = &mut out[i * n_theta..(i + 1) * n_theta];
                    for m in 0..=*max_m {
                        let (ac, as_) = (a_cos[m][i], a_sin[m][i]);
                        if ac == 0.0 && as_ == 0.0 {
                            continue;
                        }
                        for j in 0..*n_theta {
                            row[j] += ac * cos[m][j] + as_ * sin[m][j];
                        }
                    }
                }
                out
            }
            (
                Tables::Rect {
                    x_tab,
                    x_deriv,
                    y_tab,
                    y_deriv,
                },
                GridRule::Tensor { xs, ys, .. },
            ) => {
                let (nx, ny) = (xs.len(), ys.len());
                let (xt, yt) = match component {
                    Component::Value => (x_tab, y_tab),
                    Component::First => (x_deriv, y_tab),
                    Component::Second => (x_tab, y_deriv),
                };
                let mut partial = vec![vec![0.0; ny]; xt.len()];
                for (mode, c) in self.modes.iter().zip(coeffs) {
                    if *c == 0.0 {
                        continue;
                    }
                    let ModeLabel::Rect { m, n } = mode.label else { unreachable!() };
                    let yn = &yt[n as usize];
                    let acc = &mut partial[m as usize];
                    for j in 0..ny {
                        acc[j] += c * yn[j];
                    }
                }
                let mut out = vec![0.0; nx * ny];
                for (m, acc) in partial.iter().enumerate() {
                    if acc.iter().all(|v| *v == 0.0) {
                        continue;
                    }
                    for i in 0..nx {
                        let xv = xt[m][i];
                        let row = &mut out[i * ny..(i + 1) * ny];
                        for j in 0..ny {
                            row[j] += xv * acc[j];
                        }
                    }
                }
                out
            }
            _ => unreachable!(),
        }
    }

    /// Weyl estimate `|Omega| Lambda / (4 pi)` of the counting function in 2-D.
    pub fn weyl_estimate(&self) -> f64 {
        self.domain.area * self.cutoff / (4.0 * PI)
    }
}

#[derive(Debug, Clone, Copy)]
enum Component {
    Value,
    First,
    Second,
}
