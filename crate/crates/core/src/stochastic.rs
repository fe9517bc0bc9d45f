//! Brownian motion that restarts from `mu` whenever it reaches the boundary.
//!
//! The walk uses Euler-Maruyama steps with variance `2 dt` per axis, so its generator
//! is the Laplacian. Occupation is time weighted at step midpoints. The long-run
//! occupation density is compared with `R_D(0) w / <T>_mu`, the normalised kernel of
//! the adjoint.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::basis::{BasisSet, Mode};
use crate::domain::{DomainSpec, Point, Shape};
use crate::error::{Error, Result};
use crate::measure::{MeasureKind, MeasureMoments, MeasureSpec};
use crate::quadrature::gauss_legendre_interval;

/// Overshoot correction for discretely monitored exits, `-zeta(1/2) / sqrt(2 pi)`.
pub const EXIT_SHIFT: f64 = 0.5825971579390106;
/// Rejection samplers below this acceptance rate are refused.
pub const MIN_EFFICIENCY: f64 = 0.01;
/// Largest `n_paths * n_steps` accepted by default.
pub const STEP_BUDGET: u64 = 2_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub step_dt: f64,
    pub n_steps: u64,
    pub n_paths: u64,
    pub seed: u64,
    /// Points closer than this to the boundary count as exits.
    pub boundary_tolerance: f64,
}

impl WalkConfig {
    /// Config with the boundary band set to the overshoot correction `0.5826 sqrt(2 dt)`.
    pub fn new(step_dt: f64, n_steps: u64, n_paths: u64, seed: u64) -> Self {
        Self {
            step_dt,
            n_steps,
            n_paths,
            seed,
            boundary_tolerance: EXIT_SHIFT * (2.0 * step_dt).sqrt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step_dt > 0.0 && self.step_dt.is_finite()) {
            return Err(Error::InvalidInput(format!("step_dt = {} must be positive", self.step_dt)));
        }
        if !(self.boundary_tolerance >= 0.0) {
            return Err(Error::InvalidInput("boundary_tolerance must be nonnegative".into()));
        }
        if self.n_steps == 0 || self.n_paths == 0 {
            return Err(Error::InvalidInput("n_steps and n_paths must be positive".into()));
        }
        if self.n_steps.saturating_mul(self.n_paths) > STEP_BUDGET {
            return Err(Error::InvalidInput(format!(
                "{} paths x {} steps exceeds the budget of {STEP_BUDGET}",
                self.n_paths, self.n_steps
            )));
        }
        Ok(())
    }
}

/// Draws restart points from `mu`.
#[derive(Debug, Clone)]
pub struct RestartSampler {
    domain: DomainSpec,
    measure: MeasureSpec,
    /// Bound on the density for rejection sampling.
    bound: Option<f64>,
}

impl RestartSampler {
    pub fn new(measure: &MeasureSpec, domain: &DomainSpec) -> Result<Self> {
        measure.validate(domain)?;
        let bound = match measure.kind {
            MeasureKind::Uniform | MeasureKind::DiracPoint(_) | MeasureKind::Circle { .. } => None,
            _ => Some(density_bound(measure, domain)?),
        };
        if let Some(m) = bound {
            let efficiency = 1.0 / (m * domain.area);
            if efficiency < MIN_EFFICIENCY {
                return Err(Error::DensityBound { efficiency });
            }
        }
        Ok(Self {
            domain: *domain,
            measure: measure.clone(),
            bound,
        })
    }

    /// Expected acceptance rate of the rejection step (1 for direct samplers).
    pub fn efficiency(&self) -> f64 {
        self.bound.map_or(1.0, |m| 1.0 / (m * self.domain.area))
    }

    fn uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self.domain.shape {
            Shape::UnitDisk => {
                let r = rng.random::<f64>().sqrt();
                let t = 2.0 * PI * rng.random::<f64>();
                [r * t.cos(), r * t.sin()]
            }
            Shape::Rectangle { width, height } => [width * rng.random::<f64>(), height * rng.random::<f64>()],
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match (&self.measure.kind, self.bound) {
            (MeasureKind::DiracPoint(x0), _) => *x0,
            (MeasureKind::Circle { radius }, _) => {
                let t = 2.0 * PI * rng.random::<f64>();
                [radius * t.cos(), radius * t.sin()]
            }
            (_, None) => self.uniform(rng),
            (_, Some(m)) => loop {
                let p = self.uniform(rng);
                let w = self.measure.density_at(&self.domain, p).unwrap_or(0.0);
                if rng.random::<f64>() * m < w {
                    return p;
                }
            },
        }
    }
}

/// `1.05 max w` over a fine grid.
fn density_bound(measure: &MeasureSpec, domain: &DomainSpec) -> Result<f64> {
    let (w, h) = match domain.shape {
        Shape::UnitDisk => (2.0, 2.0),
        Shape::Rectangle { width, height } => (width, height),
    };
    let origin = match domain.shape {
        Shape::UnitDisk => [-1.0, -1.0],
        Shape::Rectangle { .. } => [0.0, 0.0],
    };
    let n = 400;
    let mut max: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let p = [origin[0] + w * (i as f64 + 0.5) / n as f64, origin[1] + h * (j as f64 + 0.5) / n as f64];
            if domain.contains(p) {
                let v = measure.density_at(domain, p).unwrap_or(0.0);
                if !v.is_finite() {
                    return Err(Error::Evaluation { x: p[0], y: p[1] });
                }
                max = max.max(v);
            }
        }
    }
    if max <= 0.0 {
        return Err(Error::InvalidMeasure("density vanishes on the sampling grid".into()));
    }
    Ok(1.05 * max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Bins {
    /// Annuli of the unit disk.
    Radial { edges: Vec<f64> },
    /// Cells of a rectangle, row-major in `x`.
    Grid { x_edges: Vec<f64>, y_edges: Vec<f64> },
}

impl Bins {
    pub fn default_for(domain: &DomainSpec) -> Self {
        match domain.shape {
            Shape::UnitDisk => Bins::Radial {
                edges: (0..=20).map(|i| i as f64 / 20.0).collect(),
            },
            Shape::Rectangle { width, height } => Bins::Grid {
                x_edges: (0..=12).map(|i| width * i as f64 / 12.0).collect(),
                y_edges: (0..=12).map(|i| height * i as f64 / 12.0).collect(),
            },
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Bins::Radial { edges } => edges.len() - 1,
            Bins::Grid { x_edges, y_edges } => (x_edges.len() - 1) * (y_edges.len() - 1),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn areas(&self) -> Vec<f64> {
        match self {
            Bins::Radial { edges } => edges.windows(2).map(|e| PI * (e[1] * e[1] - e[0] * e[0])).collect(),
            Bins::Grid { x_edges, y_edges } => x_edges
                .windows(2)
                .flat_map(|x| y_edges.windows(2).map(move |y| (x[1] - x[0]) * (y[1] - y[0])))
                .collect(),
        }
    }

    /// `(lo, hi)` per bin: radii, or the `x` extent for grid cells.
    pub fn ranges(&self) -> Vec<(f64, f64)> {
        match self {
            Bins::Radial { edges } => edges.windows(2).map(|e| (e[0], e[1])).collect(),
            Bins::Grid { x_edges, y_edges } => x_edges
                .windows(2)
                .flat_map(|x| y_edges.windows(2).map(move |_| (x[0], x[1])))
                .collect(),
        }
    }

    pub fn locate(&self, p: Point) -> Option<usize> {
        fn find(edges: &[f64], v: f64) -> Option<usize> {
            let i = edges.partition_point(|e| *e <= v);
            (i > 0 && i < edges.len()).then(|| i - 1)
        }
        match self {
            Bins::Radial { edges } => find(edges, p[0].hypot(p[1])),
            Bins::Grid { x_edges, y_edges } => {
                Some(find(x_edges, p[0])? * (y_edges.len() - 1) + find(y_edges, p[1])?)
            }
        }
    }

    /// Bin averages of `f`.
    pub fn average<F: Fn(Point) -> f64>(&self, f: F) -> Vec<f64> {
        let (s, ws) = gauss_legendre_interval(12, 0.0, 1.0);
        let areas = self.areas();
        match self {
            Bins::Radial { edges } => edges
                .windows(2)
                .zip(&areas)
                .map(|(e, area)| {
                    let n_theta = 64;
                    let mut acc = 0.0;
                    for (u, w) in s.iter().zip(&ws) {
                        let r = e[0] + (e[1] - e[0]) * u;
                        for j in 0..n_theta {
                            let t = 2.0 * PI * j as f64 / n_theta as f64;
                            acc += w * (e[1] - e[0]) * r * (2.0 * PI / n_theta as f64) * f([r * t.cos(), r * t.sin()]);
                        }
                    }
                    acc / area
                })
                .collect(),
            Bins::Grid { x_edges, y_edges } => {
                let mut out = Vec::with_capacity(self.len());
                for x in x_edges.windows(2) {
                    for y in y_edges.windows(2) {
                        let mut acc = 0.0;
                        for (u, wu) in s.iter().zip(&ws) {
                            for (v, wv) in s.iter().zip(&ws) {
                                acc += wu * wv * f([x[0] + (x[1] - x[0]) * u, y[0] + (y[1] - y[0]) * v]);
                            }
                        }
                        out.push(acc);
                    }
                }
                out
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OccupationHistogram {
    pub bins: Bins,
    /// Midpoint visits per bin; each stands for `dt` of occupation time.
    pub counts: Vec<u64>,
    pub normalized_density: Vec<f64>,
    pub l1_distance: Option<f64>,
    pub restarts: u64,
    pub config: WalkConfig,
}

impl OccupationHistogram {
    fn from_counts(bins: Bins, counts: Vec<u64>, restarts: u64, config: WalkConfig) -> Self {
        let total: u64 = counts.iter().sum();
        let normalized_density = counts
            .iter()
            .zip(bins.areas())
            .map(|(c, a)| if total == 0 { 0.0 } else { *c as f64 / (total as f64 * a) })
            .collect();
        Self {
            bins,
            counts,
            normalized_density,
            l1_distance: None,
            restarts,
            config,
        }
    }

    /// `sum density * area`, which is 1 whenever anything was recorded.
    pub fn mass(&self) -> f64 {
        self.normalized_density.iter().zip(self.bins.areas()).map(|(d, a)| d * a).sum()
    }

    /// `bin_lo,bin_hi,density_empirical,density_predicted`
    pub fn to_csv(&self, predicted: &[f64]) -> String {
        let mut out = String::from("bin_lo,bin_hi,density_empirical,density_predicted\n");
        for (((lo, hi), e), p) in self.bins.ranges().iter().zip(&self.normalized_density).zip(predicted) {
            let _ = writeln!(out, "{lo:.6},{hi:.6},{e:.10e},{p:.10e}");
        }
        out
    }
}

fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// Runs `n_paths` independent walks and bins their midpoint occupation.
pub fn simulate_occupation(config: &WalkConfig, domain: &DomainSpec, measure: &MeasureSpec, bins: Bins) -> Result<OccupationHistogram> {
    config.validate()?;
    let sampler = RestartSampler::new(measure, domain)?;
    let sd = (2.0 * config.step_dt).sqrt();
    let tol = config.boundary_tolerance;
    let per_path = crate::par_map(config.n_paths as usize, |path| {
        let mut rng = path_rng(config.seed, path as u64);
        let mut counts = vec![0u64; bins.len()];
        let mut restarts = 0u64;
        let mut x = sampler.sample(&mut rng);
        for _ in 0..config.n_steps {
            let dx: f64 = rng.sample(StandardNormal);
            let dy: f64 = rng.sample(StandardNormal);
            let y = [x[0] + sd * dx, x[1] + sd * dy];
            let mid = [0.5 * (x[0] + y[0]), 0.5 * (x[1] + y[1])];
            if let Some(b) = bins.locate(mid).filter(|_| domain.contains(mid)) {
                counts[b] += 1;
            }
            if domain.distance_to_boundary(y) < tol {
                x = sampler.sample(&mut rng);
                restarts += 1;
            } else {
                x = y;
            }
        }
        (counts, restarts)
    });
    let mut counts = vec![0u64; bins.len()];
    let mut restarts = 0;
    for (c, r) in per_path {
        for (a, b) in counts.iter_mut().zip(c) {
            *a += b;
        }
        restarts += r;
    }
    Ok(OccupationHistogram::from_counts(bins, counts, restarts, *config))
}

/// Splits the paths into `batches` groups and returns one histogram per group.
pub fn simulate_batches(
    config: &WalkConfig,
    domain: &DomainSpec,
    measure: &MeasureSpec,
    bins: &Bins,
    batches: u64,
) -> Result<Vec<OccupationHistogram>> {
    if batches == 0 || config.n_paths % batches != 0 {
        return Err(Error::InvalidInput(format!("{} paths do not split into {batches} batches", config.n_paths)));
    }
    (0..batches)
        .map(|b| {
            let c = WalkConfig {
                n_paths: config.n_paths / batches,
                seed: config.seed.wrapping_add(b.wrapping_mul(0x9e37_79b9_7f4a_7c15)),
                ..*config
            };
            simulate_occupation(&c, domain, measure, bins.clone())
        })
        .collect()
}

/// Stationary density `h = R_D(0) w / <T>_mu` as a pointwise function.
pub fn stationary_density<'a>(basis: &'a BasisSet, moments: &'a MeasureMoments) -> Box<dyn Fn(Point) -> f64 + Sync + 'a> {
    let domain = basis.domain;
    match (&moments.spec.kind, domain.shape) {
        (MeasureKind::Uniform, Shape::UnitDisk) => Box::new(|p: Point| {
            let r2 = p[0] * p[0] + p[1] * p[1];
            if r2 < 1.0 { 2.0 * (1.0 - r2) / PI } else { 0.0 }
        }),
        (MeasureKind::GroundState, _) => {
            let g = Mode::ground_state(&domain);
            Box::new(move |p: Point| {
                if domain.contains(p) { g.eval(&domain, p) / g.one_coeff } else { 0.0 }
            })
        }
        _ => {
            let coeffs: Vec<f64> = basis
                .modes
                .iter()
                .zip(&moments.moments)
                .map(|(m, p)| p / (m.eigenvalue * moments.torsion_mean))
                .collect();
            Box::new(move |p: Point| if domain.contains(p) { basis.eval_series(&coeffs, p) } else { 0.0 })
        }
    }
}

/// `sum |empirical - predicted| * area`
pub fn compare_stationary(hist: &OccupationHistogram, predicted: &[f64]) -> Result<f64> {
    if predicted.len() != hist.bins.len() {
        return Err(Error::BinMismatch(format!(
            "histogram has {} bins, prediction has {}",
            hist.bins.len(),
            predicted.len()
        )));
    }
    Ok(hist
        .normalized_density
        .iter()
        .zip(predicted)
        .zip(hist.bins.areas())
        .map(|((e, p), a)| (e - p).abs() * a)
        .sum())
}

/// One-sample Kolmogorov-Smirnov statistic and its asymptotic p-value.
pub fn ks_test<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> (f64, f64) {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = cdf(*x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    let t = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let p: f64 = (1..=100)
        .map(|k| {
            let k = k as f64;
            2.0 * (-1f64).powf(k - 1.0) * (-2.0 * k * k * t * t).exp()
        })
        .sum();
    (d, p.clamp(0.0, 1.0))
}

/// Restart points drawn exactly as the walk draws them.
pub fn restart_sample(measure: &MeasureSpec, domain: &DomainSpec, n: usize, seed: u64) -> Result<Vec<Point>> {
    let sampler = RestartSampler::new(measure, domain)?;
    let mut rng = path_rng(seed, u64::MAX);
    Ok((0..n).map(|_| sampler.sample(&mut rng)).collect())
}
