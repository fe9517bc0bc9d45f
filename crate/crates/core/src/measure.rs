//! Jump measures `mu` and their moments `<chi_n>_mu`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::basis::{BasisSet, Mode, ModeLabel};
use crate::domain::{DomainSpec, Point, Shape};
use crate::error::{Error, Result};

/// Tolerance on the total mass and on the mean of a perturbation.
pub const MASS_TOL: f64 = 1e-9;
/// Minimum distance of a point mass from the boundary.
pub const DIRAC_CLEARANCE: f64 = 1e-6;

pub type DensityFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// Samples on a regular lattice, interpolated bilinearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    /// `values[i][j]` at `(x_i, y_j)`, `i` along x.
    pub values: Vec<Vec<f64>>,
}

impl DensityGrid {
    pub fn new(x_range: (f64, f64), y_range: (f64, f64), values: Vec<Vec<f64>>) -> Result<Self> {
        let nx = values.len();
        if nx < 2 || values.iter().any(|row| row.len() != values[0].len()) || values[0].len() < 2 {
            return Err(Error::InvalidMeasure(
                "density grid must be rectangular with at least 2x2 samples".into(),
            ));
        }
        if !(x_range.1 > x_range.0 && y_range.1 > y_range.0) {
            return Err(Error::InvalidMeasure("density grid ranges must be increasing".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMeasure("density grid has non-finite samples".into()));
        }
        Ok(Self {
            x_range,
            y_range,
            values,
        })
    }

    /// Builds a grid from scattered `(x, y, w)` triples lying on a full lattice.
    pub fn from_triples(triples: &[(f64, f64, f64)]) -> Result<Self> {
        let mut xs: Vec<f64> = triples.iter().map(|t| t.0).collect();
        let mut ys: Vec<f64> = triples.iter().map(|t| t.1).collect();
        for v in [&mut xs, &mut ys] {
            v.sort_by(f64::total_cmp);
            v.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * (1.0 + b.abs()));
        }
        if xs.len() * ys.len() != triples.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} samples do not form a {} x {} lattice",
                triples.len(),
                xs.len(),
                ys.len()
            )));
        }
        let locate = |v: &[f64], x: f64| v.iter().position(|a| (a - x).abs() <= 1e-12 * (1.0 + x.abs()));
        let mut values = vec![vec![f64::NAN; ys.len()]; xs.len()];
        for &(x, y, w) in triples {
            let (i, j) = (locate(&xs, x).unwrap(), locate(&ys, y).unwrap());
            values[i][j] = w;
        }
        // a uniform lattice is assumed by the interpolation
        let uniform = |v: &[f64]| {
            let h = (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64;
            v.iter().enumerate().all(|(i, x)| (x - (v[0] + h * i as f64)).abs() <= 1e-9 * (1.0 + h))
        };
        if xs.len() < 2 || ys.len() < 2 || !uniform(&xs) || !uniform(&ys) {
            return Err(Error::InvalidMeasure("density samples must lie on a uniform lattice".into()));
        }
        Self::new((xs[0], xs[xs.len() - 1]), (ys[0], ys[ys.len() - 1]), values)
    }

    pub fn eval(&self, p: Point) -> f64 {
        let nx = self.values.len();
        let ny = self.values[0].len();
        let locate = |range: (f64, f64), n: usize, x: f64| {
            let t = ((x - range.0) / (range.1 - range.0) * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
            let i = (t.floor() as usize).min(n - 2);
            (i, t - i as f64)
        };
        let (i, s) = locate(self.x_range, nx, p[0]);
        let (j, t) = locate(self.y_range, ny, p[1]);
        let v = &self.values;
        (1.0 - s) * (1.0 - t) * v[i][j] + s * (1.0 - t) * v[i + 1][j] + (1.0 - s) * t * v[i][j + 1] + s * t * v[i + 1][j + 1]
    }
}

#[derive(Clone)]
pub enum Density {
    Function(DensityFn),
    Grid(DensityGrid),
}

impl Density {
    pub fn function<F: Fn(Point) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        Self::Function(Arc::new(f))
    }

    pub fn eval(&self, p: Point) -> f64 {
        match self {
            Self::Function(f) => f(p),
            Self::Grid(g) => g.eval(p),
        }
    }
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Function(_) => f.write_str("Density::Function(..)"),
            Self::Grid(g) => f.debug_tuple("Density::Grid").field(g).finish(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseMeasure {
    Uniform,
    GroundState,
}

/// Zero-mean perturbation `v` of a base density.
#[derive(Debug, Clone)]
pub enum Perturbation {
    /// Finite combination of Dirichlet modes, stored with the modes resolved.
    /// Moments and norms are exact in this representation.
    Modes(Vec<(Mode, f64)>),
    /// Arbitrary map, integrated by quadrature.
    Function(Density),
}

impl Perturbation {
    pub fn zero() -> Self {
        Self::Modes(Vec::new())
    }

    /// `sum_j a_j chi_j - s chi_1` with `s` chosen so that the integral vanishes.
    /// The result vanishes on the boundary, so it can perturb either base
    /// density without breaking positivity near the boundary at small amplitude.
    pub fn zero_mean_modes(domain: &DomainSpec, terms: &[(ModeLabel, f64)]) -> Result<Self> {
        let ground = Mode::ground_state(domain);
        let mut resolved: Vec<(Mode, f64)> = Vec::new();
        let mut mean = 0.0;
        for &(label, a) in terms {
            let mode = Mode::from_label(label, domain)?;
            mean += a * mode.one_coeff;
            match resolved.iter_mut().find(|(m, _)| m.label == label) {
                Some(entry) => entry.1 += a,
                None => resolved.push((mode, a)),
            }
        }
        let shift = mean / ground.one_coeff;
        match resolved.iter_mut().find(|(m, _)| m.label == ground.label) {
            Some(entry) => entry.1 -= shift,
            None if shift != 0.0 => resolved.push((ground, -shift)),
            None => {}
        }
        resolved.retain(|(_, a)| *a != 0.0);
        Ok(Self::Modes(resolved))
    }

    /// Multiplies the perturbation by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        match self {
            Self::Modes(terms) => Self::Modes(terms.iter().map(|(m, a)| (m.clone(), a * s)).collect()),
            Self::Function(d) => {
                let d = d.clone();
                Self::Function(Density::function(move |p| s * d.eval(p)))
            }
        }
    }

    pub fn eval(&self, domain: &DomainSpec, p: Point) -> f64 {
        match self {
            Self::Modes(terms) => terms.iter().map(|(m, a)| a * m.eval(domain, p)).sum(),
            Self::Function(d) => d.eval(p),
        }
    }

    /// `(chi_n, v)` for every basis mode, and the grid samples of `v`.
    fn project(&self, basis: &BasisSet) -> Result<(Vec<f64>, Vec<f64>)> {
        match self {
            Self::Modes(terms) => {
                let mut coeffs = vec![0.0; basis.len()];
                for (mode, a) in terms {
                    let idx = basis.position(mode.label).ok_or_else(|| {
                        Error::InvalidMeasure(format!(
                            "perturbation mode {:?} (eigenvalue {}) lies above the cutoff {}",
                            mode.label, mode.eigenvalue, basis.cutoff
                        ))
                    })?;
                    coeffs[idx] += a;
                }
                let grid = basis.synthesize(&coeffs);
                Ok((coeffs, grid))
            }
            Self::Function(d) => {
                let grid = basis.quadrature.sample(|p| d.eval(p))?;
                Ok((basis.project(&grid), grid))
            }
        }
    }

    /// `||v||_{L^2}`.
    pub fn l2_norm(&self, basis: &BasisSet) -> Result<f64> {
        match self {
            Self::Modes(terms) => Ok(terms.iter().map(|(_, a)| a * a).sum::<f64>().sqrt()),
            Self::Function(d) => {
                let grid = basis.quadrature.sample(|p| d.eval(p))?;
                Ok(basis.quadrature.integrate_samples(&grid.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum MeasureKind {
    Uniform,
    GroundState,
    Density(Density),
    DiracPoint(Point),
    /// Normalised arc length on the circle `r = radius` (unit disk only).
    Circle { radius: f64 },
    Perturbed { base: BaseMeasure, v: Perturbation },
}

/// Probability measure on the domain.
///
/// `boundary_mass` is the mass a measure may put on the boundary itself. Such
/// jumps restart the process on the boundary, so only the interior part matters:
/// a `Density` is supplied with interior mass `1 - boundary_mass` and is
/// renormalised on construction. The closed-form families are already
/// normalised interior laws and are unaffected.
#[derive(Debug, Clone)]
pub struct MeasureSpec {
    pub kind: MeasureKind,
    pub boundary_mass: f64,
}

impl MeasureSpec {
    pub fn new(kind: MeasureKind) -> Self {
        Self { kind, boundary_mass: 0.0 }
    }

    pub fn uniform() -> Self {
        Self::new(MeasureKind::Uniform)
    }

    pub fn ground_state() -> Self {
        Self::new(MeasureKind::GroundState)
    }

    pub fn dirac(x0: Point) -> Self {
        Self::new(MeasureKind::DiracPoint(x0))
    }

    pub fn circle(radius: f64) -> Self {
        Self::new(MeasureKind::Circle { radius })
    }

    pub fn density(d: Density) -> Self {
        Self::new(MeasureKind::Density(d))
    }

    pub fn perturbed(base: BaseMeasure, v: Perturbation) -> Self {
        Self::new(MeasureKind::Perturbed { base, v })
    }

    pub fn with_boundary_mass(mut self, mass: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&mass) {
            return Err(Error::InvalidMeasure(format!("boundary mass {mass} must lie in [0, 1)")));
        }
        self.boundary_mass = mass;
        Ok(self)
    }

    pub fn name(&self) -> &'static str {
        match &self.kind {
            MeasureKind::Uniform => "uniform",
            MeasureKind::GroundState => "ground_state",
            MeasureKind::Density(_) => "density",
            MeasureKind::DiracPoint(_) => "dirac",
            MeasureKind::Circle { .. } => "circle",
            MeasureKind::Perturbed {
                base: BaseMeasure::Uniform,
                ..
            } => "perturbed_uniform",
            MeasureKind::Perturbed {
                base: BaseMeasure::GroundState,
                ..
            } => "perturbed_ground_state",
        }
    }

    /// True when `mu` has an `L^2` density.
    pub fn has_density(&self) -> bool {
        !matches!(self.kind, MeasureKind::DiracPoint(_) | MeasureKind::Circle { .. })
    }

    /// Checks the measure against the domain before any moments are computed.
    pub fn validate(&self, domain: &DomainSpec) -> Result<()> {
        match &self.kind {
            MeasureKind::DiracPoint(x0) => {
                if domain.distance_to_boundary(*x0) < DIRAC_CLEARANCE {
                    return Err(Error::InvalidMeasure(format!(
                        "point mass at {x0:?} is closer than {DIRAC_CLEARANCE} to the boundary"
                    )));
                }
            }
            MeasureKind::Circle { radius } => {
                if !domain.is_disk() {
                    return Err(Error::InvalidMeasure("circle measure requires the unit disk".into()));
                }
                if !(*radius > 0.0 && *radius < 1.0) {
                    return Err(Error::InvalidMeasure(format!("circle radius {radius} must lie in (0, 1)")));
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Density `w(p)` of the measure, `None` for singular measures.
    pub fn density_at(&self, domain: &DomainSpec, p: Point) -> Option<f64> {
        if !domain.contains(p) {
            return self.has_density().then_some(0.0);
        }
        let interior = 1.0 - self.boundary_mass;
        match &self.kind {
            MeasureKind::Uniform => Some(1.0 / domain.area),
            MeasureKind::GroundState => Some(ground_density(domain, p)),
            MeasureKind::Density(d) => Some(d.eval(p) / interior),
            MeasureKind::Perturbed { base, v } => {
                let b = match base {
                    BaseMeasure::Uniform => 1.0 / domain.area,
                    BaseMeasure::GroundState => ground_density(domain, p),
                };
                Some(b + v.eval(domain, p))
            }
            MeasureKind::DiracPoint(_) | MeasureKind::Circle { .. } => None,
        }
    }
}

fn ground_density(domain: &DomainSpec, p: Point) -> f64 {
    let g = Mode::ground_state(domain);
    g.eval(domain, p) / g.one_coeff
}

/// Moments of a measure aligned with a basis.
#[derive(Debug, Clone)]
pub struct MeasureMoments {
    pub spec: MeasureSpec,
    /// `<chi_n>_mu`, which equals `(chi_n, w)` for a density `w`.
    pub moments: Vec<f64>,
    /// Quadrature (or exact) total mass.
    pub mass: f64,
    /// `||w||_{L^2}` when `mu` has an `L^2` density.
    pub l2_density_norm: Option<f64>,
    /// `||v||_{L^2}` for perturbed measures.
    pub v_l2_norm: Option<f64>,
    /// `<T>_mu` for the torsion function `T = H_D^{-1} 1`.
    pub torsion_mean: f64,
    /// Minimum of the density over the quadrature grid, when there is one.
    pub min_density: Option<f64>,
}

impl MeasureMoments {
    /// True when the secular tail has no rigorous bound.
    pub fn heuristic_tail(&self) -> bool {
        self.l2_density_norm.is_none()
    }

    /// `<f>_mu` for `f = sum_n coeffs[n] chi_n`.
    pub fn functional(&self, coeffs: &[f64]) -> f64 {
        self.moments.iter().zip(coeffs).map(|(p, c)| p * c).sum()
    }

    /// Replaces the moments by a corrupted copy (negative-control fault injection).
    pub fn corrupted(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for (i, p) in out.moments.iter_mut().enumerate() {
            if i % 2 == 1 {
                *p *= factor;
            }
        }
        out
    }
}

/// Computes `<chi_n>_mu` for every retained mode.
pub fn compute_moments(spec: &MeasureSpec, basis: &BasisSet) -> Result<MeasureMoments> {
    let domain = &basis.domain;
    spec.validate(domain)?;
    let n = basis.len();
    let area = domain.area;
    let ground = basis.ground_state();

    let (moments, mass, l2, v_norm, torsion_mean, min_density) = match &spec.kind {
        MeasureKind::Uniform => {
            let moments = basis.modes.iter().map(|m| m.one_coeff / area).collect();
            (moments, 1.0, Some(area.powf(-0.5)), None, domain.torsion_integral() / area, Some(1.0 / area))
        }
        MeasureKind::GroundState => {
            let mut moments = vec![0.0; n];
            moments[0] = 1.0 / ground.one_coeff;
            let t_mean = 1.0 / ground.eigenvalue;
            (moments, 1.0, Some(1.0 / ground.one_coeff), None, t_mean, Some(0.0))
        }
        MeasureKind::Density(d) => {
            let interior = 1.0 - spec.boundary_mass;
            let grid = basis.quadrature.sample(|p| d.eval(p) / interior)?;
            let min = check_nonnegative(basis, &grid)?;
            let mass = basis.quadrature.integrate_samples(&grid);
            let sq: Vec<f64> = grid.iter().map(|v| v * v).collect();
            let l2 = basis.quadrature.integrate_samples(&sq).sqrt();
            let torsion = basis.quadrature.sample(|p| domain.torsion(p))?;
            let t_mean = basis.quadrature.integrate_samples(
                &grid.iter().zip(&torsion).map(|(w, t)| w * t).collect::<Vec<_>>(),
            );
            (basis.project(&grid), mass, Some(l2), None, t_mean, Some(min))
        }
        MeasureKind::DiracPoint(x0) => {
            let moments = basis.modes.iter().map(|m| m.eval(domain, *x0)).collect();
            (moments, 1.0, None, None, domain.torsion(*x0), None)
        }
        MeasureKind::Circle { radius } => {
            // The angular average kills every m != 0 mode; radial modes are constant on the circle.
            let moments = basis
                .modes
                .iter()
                .map(|m| match m.label {
                    ModeLabel::Disk { m: 0, .. } => m.eval(domain, [*radius, 0.0]),
                    _ => 0.0,
                })
                .collect();
            (moments, 1.0, None, None, domain.torsion([*radius, 0.0]), None)
        }
        MeasureKind::Perturbed { base, v } => {
            let (v_coeffs, v_grid) = v.project(basis)?;
            let v_norm = v.l2_norm(basis)?;
            let v_mean = match v {
                Perturbation::Modes(terms) => terms.iter().map(|(m, a)| a * m.one_coeff).sum(),
                Perturbation::Function(_) => basis.quadrature.integrate_samples(&v_grid),
            };
            if v_mean.abs() > MASS_TOL {
                return Err(Error::MassDeficit {
                    mass: 1.0 + v_mean,
                    tolerance: MASS_TOL,
                });
            }
            let base_spec = match base {
                BaseMeasure::Uniform => MeasureSpec::uniform(),
                BaseMeasure::GroundState => MeasureSpec::ground_state(),
            };
            let b = compute_moments(&base_spec, basis)?;
            let base_grid: Vec<f64> = match base {
                BaseMeasure::Uniform => vec![1.0 / area; basis.quadrature.len()],
                BaseMeasure::GroundState => {
                    let mut c = vec![0.0; n];
                    c[0] = 1.0 / ground.one_coeff;
                    basis.synthesize(&c)
                }
            };
            let total: Vec<f64> = base_grid.iter().zip(&v_grid).map(|(a, b)| a + b).collect();
            let min = check_nonnegative(basis, &total)?;
            let moments: Vec<f64> = b.moments.iter().zip(&v_coeffs).map(|(a, c)| a + c).collect();
            // ||w||^2 = ||w_0||^2 + 2 (w_0, v) + ||v||^2, with (w_0, v) exact in coefficients
            let cross = match base {
                BaseMeasure::Uniform => v_mean / area,
                BaseMeasure::GroundState => v_coeffs[0] / ground.one_coeff,
            };
            let w0 = b.l2_density_norm.unwrap();
            let l2 = (w0 * w0 + 2.0 * cross + v_norm * v_norm).max(0.0).sqrt();
            let t_v = match v {
                Perturbation::Modes(terms) => terms.iter().map(|(m, a)| a * m.one_coeff / m.eigenvalue).sum(),
                Perturbation::Function(_) => {
                    let torsion = basis.quadrature.sample(|p| domain.torsion(p))?;
                    basis.quadrature.integrate_samples(
                        &v_grid.iter().zip(&torsion).map(|(w, t)| w * t).collect::<Vec<_>>(),
                    )
                }
            };
            (moments, 1.0 + v_mean, Some(l2), Some(v_norm), b.torsion_mean + t_v, Some(min))
        }
    };

    if (mass - 1.0).abs() > MASS_TOL {
        return Err(Error::MassDeficit {
            mass,
            tolerance: MASS_TOL,
        });
    }
    Ok(MeasureMoments {
        spec: spec.clone(),
        moments,
        mass,
        l2_density_norm: l2,
        v_l2_norm: v_norm,
        torsion_mean,
        min_density,
    })
}

fn check_nonnegative(basis: &BasisSet, grid: &[f64]) -> Result<f64> {
    let mut min = f64::INFINITY;
    let mut at = 0;
    for (i, v) in grid.iter().enumerate() {
        if *v < min {
            min = *v;
            at = i;
        }
    }
    if min < 0.0 {
        let p = basis.quadrature.points()[at];
        return Err(Error::Negativity {
            value: min,
            x: p[0],
            y: p[1],
        });
    }
    Ok(min)
}

/// Outcome of the admissibility checks on a perturbation `v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCertificate {
    pub base: BaseMeasure,
    pub k: usize,
    /// Minimum of `w_0 + v` over the quadrature grid.
    pub min_density: f64,
    pub pointwise_ok: bool,
    /// `\int v`
    pub mean: f64,
    pub mean_ok: bool,
    pub v_norm: f64,
    /// `min_{n<=k} |(chi_n, 1)| / |Omega|` for the uniform base, `|Omega|^{-1/2}` for the ground state.
    pub threshold: f64,
    pub smallness_ok: bool,
    /// `threshold - ||v||`
    pub margin: f64,
    pub passed: bool,
}

/// Smallness threshold for a perturbation of the given base at level `k`.
pub fn smallness_threshold(basis: &BasisSet, base: BaseMeasure, k: usize) -> f64 {
    let area = basis.domain.area;
    match base {
        BaseMeasure::Uniform => {
            basis
                .modes
                .iter()
                .take(k.max(1))
                .map(|m| m.one_coeff.abs())
                .fold(f64::INFINITY, f64::min)
                / area
        }
        BaseMeasure::GroundState => area.powf(-0.5),
    }
}

/// Checks positivity, zero mean and smallness of `v` at level `k`.
///
/// Panics if `spec` is not a perturbed measure.
pub fn check_hypothesis_v(spec: &MeasureSpec, basis: &BasisSet, k: usize) -> Result<HypothesisCertificate> {
    let MeasureKind::Perturbed { base, v } = &spec.kind else {
        panic!("check_hypothesis_v needs a perturbed measure");
    };
    let domain = &basis.domain;
    let (_, v_grid) = v.project(basis)?;
    let mean = match v {
        Perturbation::Modes(terms) => terms.iter().map(|(m, a)| a * m.one_coeff).sum(),
        Perturbation::Function(_) => basis.quadrature.integrate_samples(&v_grid),
    };
    let pts = basis.quadrature.points();
    let mut min_density = f64::INFINITY;
    for (p, vv) in pts.iter().zip(&v_grid) {
        let b = match base {
            BaseMeasure::Uniform => 1.0 / domain.area,
            BaseMeasure::GroundState => ground_density(domain, *p),
        };
        min_density = min_density.min(b + vv);
    }
    let v_norm = v.l2_norm(basis)?;
    let threshold = smallness_threshold(basis, *base, k);
    let pointwise_ok = min_density >= 0.0;
    let mean_ok = mean.abs() <= MASS_TOL;
    let smallness_ok = v_norm < threshold;
    Ok(HypothesisCertificate {
        base: *base,
        k,
        min_density,
        pointwise_ok,
        mean,
        mean_ok,
        v_norm,
        threshold,
        smallness_ok,
        margin: threshold - v_norm,
        passed: pointwise_ok && mean_ok && smallness_ok,
    })
}

/// Draws a random zero-mean perturbation built from a few low modes.
///
/// The modes are picked among the first `pool` modes (excluding the ground
/// state, which only compensates the mean), with Gaussian amplitudes. The
/// result is rescaled to `||v|| = fraction * target_norm` and then halved
/// until `w_0 + v >= 0` holds on the basis grid.
pub fn random_perturbation<R: Rng + ?Sized>(
    basis: &BasisSet,
    base: BaseMeasure,
    target_norm: f64,
    fraction: f64,
    pool: usize,
    radial_only: bool,
    rng: &mut R,
) -> Result<Perturbation> {
    let candidates: Vec<&Mode> = basis
        .modes
        .iter()
        .skip(1)
        .take(pool)
        .filter(|m| !radial_only || matches!(m.label, ModeLabel::Disk { m: 0, .. } | ModeLabel::Rect { .. }))
        .collect();
    if candidates.is_empty() {
        return Err(Error::InvalidInput("no modes available for a perturbation".into()));
    }
    let picks = 3.min(candidates.len());
    let mut terms = Vec::with_capacity(picks);
    let mut used = Vec::new();
    while terms.len() < picks {
        let idx = rng.random_range(0..candidates.len());
        if used.contains(&idx) {
            continue;
        }
        used.push(idx);
        let a: f64 = rng.sample(StandardNormal);
        terms.push((candidates[idx].label, a));
    }
    let v = Perturbation::zero_mean_modes(&basis.domain, &terms)?;
    let norm = v.l2_norm(basis)?;
    if norm == 0.0 {
        return Ok(v);
    }
    let mut v = v.scaled(fraction * target_norm / norm);
    for _ in 0..60 {
        let spec = MeasureSpec::perturbed(base, v.clone());
        match compute_moments(&spec, basis) {
            Ok(_) => return Ok(v),
            Err(Error::Negativity { .. }) => v = v.scaled(0.5),
            Err(e) => return Err(e),
        }
    }
    Err(Error::InvalidInput("could not make the perturbation pointwise admissible".into()))
}

/// Shape-specific description used in reports.
pub fn describe(spec: &MeasureSpec, domain: &DomainSpec) -> String {
    let shape = match domain.shape {
        Shape::UnitDisk => "unit disk".to_string(),
        Shape::Rectangle { width, height } => format!("rectangle {width} x {height}"),
    };
    format!("{} on {}", spec.name(), shape)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{build_basis, Parity};
    use crate::bessel::bessel_j;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn disk(cutoff: f64) -> BasisSet {
        build_basis(DomainSpec::unit_disk(), cutoff).unwrap()
    }

    #[test]
    fn ground_state_moments_are_a_delta() {
        let b = disk(200.0);
        let m = compute_moments(&MeasureSpec::ground_state(), &b).unwrap();
        assert!((m.moments[0] - 1.0 / b.modes[0].one_coeff).abs() < 1e-15);
        assert!(m.moments[1..].iter().all(|p| p.abs() < 1e-10));
        // cross-check against quadrature of the density itself
        let d = Density::function(|p| ground_density(&DomainSpec::unit_disk(), p));
        let q = compute_moments(&MeasureSpec::density(d), &b).unwrap();
        for (a, c) in m.moments.iter().zip(&q.moments) {
            assert!((a - c).abs() < 1e-10);
        }
        assert!((q.torsion_mean - m.torsion_mean).abs() < 1e-10);
    }

    #[test]
    fn uniform_moment_of_first_radial_mode() {
        let b = disk(100.0);
        let m = compute_moments(&MeasureSpec::uniform(), &b).unwrap();
        let expected = 2.0 * PI.sqrt() / 2.404825557695773 / PI;
        assert!((m.moments[0] - expected).abs() < 1e-13);
        assert!((m.moments[0] - 0.46921456048424964).abs() < 1e-13);
        assert!((m.torsion_mean - 0.125).abs() < 1e-15);
    }

    #[test]
    fn dirac_at_origin() {
        let b = disk(300.0);
        let m = compute_moments(&MeasureSpec::dirac([0.0, 0.0]), &b).unwrap();
        let j1 = 0.5191474972894669;
        assert!((m.moments[0] - 1.0 / (PI.sqrt() * j1)).abs() < 1e-12);
        assert!((m.moments[0] - 1.0867616361312724).abs() < 1e-12);
        for (mode, p) in b.modes.iter().zip(&m.moments) {
            if let ModeLabel::Disk { m: 0, .. } = mode.label {
                // signed so that chi_n has a positive mean
                let jn = bessel_j(1, mode.eigenvalue.sqrt());
                assert!((p - 1.0 / (PI.sqrt() * jn)).abs() < 1e-10);
            } else {
                assert!(p.abs() < 1e-12);
            }
        }
        assert!(m.heuristic_tail());
        assert!(compute_moments(&MeasureSpec::dirac([1.0, 0.0]), &b).is_err());
    }

    #[test]
    fn circle_moments_and_validation() {
        let b = disk(300.0);
        let r0 = 0.4;
        let m = compute_moments(&MeasureSpec::circle(r0), &b).unwrap();
        let radial: Vec<f64> = b
            .modes
            .iter()
            .zip(&m.moments)
            .filter(|(mode, _)| matches!(mode.label, ModeLabel::Disk { m: 0, .. }))
            .map(|(_, p)| *p)
            .collect();
        // J_0(j r0) / (sqrt(pi) J_1(j)) for k = 1, 2, 3 at r0 = 0.4
        for (p, frozen) in radial.iter().zip([0.8495343136354042, -0.1755947129134556, -0.7784204551820924]) {
            assert!((p - frozen).abs() < 1e-12, "{p} vs {frozen}");
        }
        for (mode, p) in b.modes.iter().zip(&m.moments) {
            match mode.label {
                ModeLabel::Disk { m: 0, .. } => {
                    let j = mode.eigenvalue.sqrt();
                    let expected = bessel_j(0, j * r0) / (PI.sqrt() * bessel_j(1, j));
                    assert!((p - expected).abs() < 1e-12);
                }
                _ => assert_eq!(*p, 0.0),
            }
        }
        let rect = build_basis(DomainSpec::rectangle(1.0, 1.0).unwrap(), 100.0).unwrap();
        assert!(matches!(
            compute_moments(&MeasureSpec::circle(0.3), &rect),
            Err(Error::InvalidMeasure(_))
        ));
    }

    #[test]
    fn density_checks() {
        let b = disk(100.0);
        let bad_mass = MeasureSpec::density(Density::function(|_| 0.5 / PI));
        assert!(matches!(compute_moments(&bad_mass, &b), Err(Error::MassDeficit { .. })));
        let negative = MeasureSpec::density(Density::function(|p| 2.0 / PI * (2.0 * p[0] * p[0] + 2.0 * p[1] * p[1] - 0.5)));
        assert!(matches!(compute_moments(&negative, &b), Err(Error::Negativity { .. })));
        // 2 (1 - r^2) / pi integrates to 1
        let ok = MeasureSpec::density(Density::function(|p| 2.0 * (1.0 - p[0] * p[0] - p[1] * p[1]) / PI));
        let m = compute_moments(&ok, &b).unwrap();
        assert!((m.mass - 1.0).abs() < 1e-12);
        // <T> = (2/pi) \int (1-r^2)^2/4 = (2/pi)(pi/12)
        assert!((m.torsion_mean - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_mass_renormalises_density() {
        let b = disk(60.0);
        let spec = MeasureSpec::density(Density::function(|_| 0.75 / PI))
            .with_boundary_mass(0.25)
            .unwrap();
        let m = compute_moments(&spec, &b).unwrap();
        let u = compute_moments(&MeasureSpec::uniform(), &b).unwrap();
        for (a, c) in m.moments.iter().zip(&u.moments) {
            assert!((a - c).abs() < 1e-12);
        }
        assert!(MeasureSpec::uniform().with_boundary_mass(1.0).is_err());
    }

    #[test]
    fn grid_density_interpolates_bilinearly() {
        let mut triples = Vec::new();
        for i in 0..5 {
            for j in 0..3 {
                let (x, y) = (i as f64 * 0.25, j as f64 * 0.5);
                triples.push((x, y, 1.0 + x + 2.0 * y));
            }
        }
        let g = DensityGrid::from_triples(&triples).unwrap();
        assert!((g.eval([0.3, 0.7]) - (1.0 + 0.3 + 1.4)).abs() < 1e-14);
        triples.pop();
        assert!(DensityGrid::from_triples(&triples).is_err());
    }

    #[test]
    fn perturbed_moments_are_linear() {
        let b = disk(300.0);
        let v = Perturbation::zero_mean_modes(
            &b.domain,
            &[
                (ModeLabel::Disk { m: 0, k: 2, parity: Parity::Cos }, 0.05),
                (ModeLabel::Disk { m: 2, k: 1, parity: Parity::Sin }, 0.03),
            ],
        )
        .unwrap();
        let pm = compute_moments(&MeasureSpec::perturbed(BaseMeasure::Uniform, v.clone()), &b).unwrap();
        let base = compute_moments(&MeasureSpec::uniform(), &b).unwrap();
        let (vc, _) = v.project(&b).unwrap();
        for i in 0..b.len() {
            assert!((pm.moments[i] - base.moments[i] - vc[i]).abs() < 1e-10);
        }
        // exact coefficients agree with quadrature of the function form
        let vf = v.clone();
        let dom = b.domain;
        let func = Perturbation::Function(Density::function(move |p| vf.eval(&dom, p)));
        let fm = compute_moments(&MeasureSpec::perturbed(BaseMeasure::Uniform, func), &b).unwrap();
        for i in 0..b.len() {
            assert!((fm.moments[i] - pm.moments[i]).abs() < 1e-10);
        }
        assert!((fm.v_l2_norm.unwrap() - pm.v_l2_norm.unwrap()).abs() < 1e-10);
        assert!((fm.torsion_mean - pm.torsion_mean).abs() < 1e-10);
        assert!((fm.l2_density_norm.unwrap() - pm.l2_density_norm.unwrap()).abs() < 1e-10);
    }

    #[test]
    fn hypothesis_thresholds() {
        let b = disk(100.0);
        let zero = MeasureSpec::perturbed(BaseMeasure::Uniform, Perturbation::zero());
        let c1 = check_hypothesis_v(&zero, &b, 1).unwrap();
        assert!(c1.passed);
        assert!((c1.threshold - 0.46921456048424964).abs() < 1e-13);
        assert_eq!(c1.margin, c1.threshold);
        let c2 = check_hypothesis_v(&zero, &b, 2).unwrap();
        assert_eq!(c2.threshold, 0.0);
        let v = Perturbation::zero_mean_modes(&b.domain, &[(ModeLabel::Disk { m: 0, k: 2, parity: Parity::Cos }, 0.01)])
            .unwrap();
        let c = check_hypothesis_v(&MeasureSpec::perturbed(BaseMeasure::Uniform, v.clone()), &b, 2).unwrap();
        assert!(!c.smallness_ok && !c.passed);
        let g = check_hypothesis_v(&MeasureSpec::perturbed(BaseMeasure::GroundState, v), &b, 1).unwrap();
        assert!((g.threshold - PI.powf(-0.5)).abs() < 1e-15);
        assert!(g.passed, "{g:?}");
    }

    #[test]
    fn random_perturbations_are_admissible() {
        let b = disk(200.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let t = smallness_threshold(&b, BaseMeasure::GroundState, 1);
            let v = random_perturbation(&b, BaseMeasure::GroundState, t, 0.5, 10, true, &mut rng).unwrap();
            let spec = MeasureSpec::perturbed(BaseMeasure::GroundState, v);
            let cert = check_hypothesis_v(&spec, &b, 1).unwrap();
            assert!(cert.passed, "{cert:?}");
        }
    }
}
