//! Boundary-layer trial functions whose Rayleigh quotients escape to infinity
//! in any of the four axis directions.
//!
//! `psi_eps = 1 + phi_eps - b_eps theta` with `phi_eps = sqrt(eps) f(rho / eps)` in the
//! strip `rho < eps`, `f(s) = f'(0) s (1 - s)^2`, and `b_eps = <phi_eps>_mu`, so that
//! `<psi>_mu = 1 = psi` on the boundary. Green's identity gives
//! `(H psi, psi) = beta f'(0) eps^{-1/2} + \int |grad psi|^2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::domain::{DomainSpec, Point, Shape};
use crate::error::{Error, Result};
use crate::measure::{MeasureKind, MeasureSpec};
use crate::quadrature::{composite_gauss_legendre, gauss_legendre_interval, QuadRule};

/// Radius of the interior bump `theta`.
pub const BUMP_RADIUS: f64 = 0.25;
/// Tolerance on `<psi>_mu - 1`.
pub const DOMAIN_TOL: f64 = 1e-8;

const STRIP_NODES: usize = 16;
const TANGENT_NODES: usize = 48;
const ANGLE_NODES: usize = 256;
const CIRCLE_NODES: usize = 1024;

/// The four escape directions `f'(0)`.
pub fn directions() -> [Complex64; 4] {
    [
        Complex64::new(1.0, 0.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
        Complex64::new(0.0, -1.0),
    ]
}

pub fn direction_label(d: Complex64) -> String {
    match (d.re, d.im) {
        (x, y) if x == 1.0 && y == 0.0 => "1".into(),
        (x, y) if x == -1.0 && y == 0.0 => "-1".into(),
        (x, y) if x == 0.0 && y == 1.0 => "i".into(),
        (x, y) if x == 0.0 && y == -1.0 => "-i".into(),
        _ => format!("{}{:+}i", d.re, d.im),
    }
}

/// `f(s) = f'(0) s (1 - s)^2` and its derivative.
fn cubic(s: f64) -> (f64, f64) {
    let t = 1.0 - s;
    (s * t * t, t * (1.0 - 3.0 * s))
}

/// Unnormalised bump `exp(-1 / (1 - (r/R)^2))` and its radial derivative.
fn bump(r: f64) -> (f64, f64) {
    let u = r / BUMP_RADIUS;
    if u >= 1.0 {
        return (0.0, 0.0);
    }
    let d = 1.0 - u * u;
    let v = (-1.0 / d).exp();
    (v, v * (-2.0 * u / (BUMP_RADIUS * d * d)))
}

/// Nodes of the strip `rho < eps`, each tagged with `s = rho / eps`.
#[derive(Debug, Clone, Default)]
struct StripRule {
    points: Vec<Point>,
    weights: Vec<f64>,
    s: Vec<f64>,
}

impl StripRule {
    fn new(domain: &DomainSpec, eps: f64, refine: usize) -> Self {
        let (ss, ws) = gauss_legendre_interval(STRIP_NODES * refine, 0.0, 1.0);
        let mut rule = StripRule::default();
        match domain.shape {
            Shape::UnitDisk => {
                let n = ANGLE_NODES * refine;
                let dt = 2.0 * PI / n as f64;
                for (s, w) in ss.iter().zip(&ws) {
                    let r = 1.0 - eps * s;
                    for j in 0..n {
                        let t = dt * j as f64;
                        rule.push([r * t.cos(), r * t.sin()], eps * w * r * dt, *s);
                    }
                }
            }
            Shape::Rectangle { width, height } => {
                // mitred trapezoids, one per side, on which rho is the distance to that side
                let sides: [(f64, Box<dyn Fn(f64, f64) -> Point>); 4] = [
                    (width, Box::new(|x, y| [x, y])),
                    (width, Box::new(move |x, y| [x, height - y])),
                    (height, Box::new(|x, y| [y, x])),
                    (height, Box::new(move |x, y| [width - y, x])),
                ];
                for (len, map) in &sides {
                    for (s, w) in ss.iter().zip(&ws) {
                        let y = eps * s;
                        let breaks: Vec<f64> = (0..=8).map(|k| y + (len - 2.0 * y) * k as f64 / 8.0).collect();
                        let (xs, wx) = composite_gauss_legendre(&breaks, TANGENT_NODES * refine / 8 + 1);
                        for (x, a) in xs.iter().zip(&wx) {
                            rule.push(map(*x, y), eps * w * a, *s);
                        }
                    }
                }
            }
        }
        rule
    }

    fn push(&mut self, p: Point, w: f64, s: f64) {
        self.points.push(p);
        self.weights.push(w);
        self.s.push(s);
    }

    fn quad(&self) -> QuadRule {
        QuadRule {
            points: self.points.clone(),
            weights: self.weights.clone(),
        }
    }
}

fn bump_rule(center: Point, refine: usize) -> QuadRule {
    let breaks: Vec<f64> = (0..=4 * refine).map(|k| BUMP_RADIUS * k as f64 / (4 * refine) as f64).collect();
    let mut rule = QuadRule::annulus(&breaks, 24, 64);
    for p in &mut rule.points {
        p[0] += center[0];
        p[1] += center[1];
    }
    rule
}

/// `<g>_mu` for `g` supported inside `support`.
fn average(measure: &MeasureSpec, domain: &DomainSpec, support: &QuadRule, g: &dyn Fn(Point) -> Complex64) -> Result<Complex64> {
    match &measure.kind {
        MeasureKind::DiracPoint(x0) => Ok(g(*x0)),
        MeasureKind::Circle { radius } => {
            let dt = 2.0 * PI / CIRCLE_NODES as f64;
            let sum: Complex64 = (0..CIRCLE_NODES)
                .map(|j| {
                    let t = dt * j as f64;
                    g([radius * t.cos(), radius * t.sin()])
                })
                .sum();
            Ok(sum / CIRCLE_NODES as f64)
        }
        _ => support.integrate_complex(|p| g(p) * measure.density_at(domain, p).unwrap_or(0.0)),
    }
}

/// The trial function at one `(direction, eps)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeProfile {
    /// `f'(0)`
    pub direction: Complex64,
    pub epsilon: f64,
    pub theta_center: Point,
    /// `1 / <theta_0>_mu`, so that `<theta>_mu = 1`.
    pub theta_scale: f64,
    /// `<phi_eps>_mu`
    pub b_epsilon: Complex64,
}

impl ProbeProfile {
    pub fn new(direction: Complex64, epsilon: f64, domain: &DomainSpec, measure: &MeasureSpec) -> Result<Self> {
        let room = domain.inradius() - BUMP_RADIUS;
        if !(epsilon > 0.0 && epsilon < room) {
            return Err(Error::Geometry(format!(
                "epsilon = {epsilon} must lie in (0, {room}) so the boundary strip misses the bump"
            )));
        }
        measure.validate(domain)?;
        let center = domain.incenter();
        let theta_mass = average(measure, domain, &bump_rule(center, 1), &|p| {
            Complex64::new(bump(dist(p, center)).0, 0.0)
        })?
        .re;
        if theta_mass < 1e-12 {
            return Err(Error::Degenerate(format!(
                "measure puts no weight on the bump of radius {BUMP_RADIUS} at {center:?}"
            )));
        }
        let strip = StripRule::new(domain, epsilon, 1).quad();
        let b_epsilon = average(measure, domain, &strip, &|p| phi(domain, direction, epsilon, p))?;
        Ok(Self {
            direction,
            epsilon,
            theta_center: center,
            theta_scale: 1.0 / theta_mass,
            b_epsilon,
        })
    }

    /// `psi_eps(x)`
    pub fn eval(&self, domain: &DomainSpec, p: Point) -> Complex64 {
        let theta = self.theta_scale * bump(dist(p, self.theta_center)).0;
        1.0 + phi(domain, self.direction, self.epsilon, p) - self.b_epsilon * theta
    }
}

fn dist(p: Point, c: Point) -> f64 {
    (p[0] - c[0]).hypot(p[1] - c[1])
}

fn phi(domain: &DomainSpec, direction: Complex64, eps: f64, p: Point) -> Complex64 {
    let rho = domain.distance_to_boundary(p);
    if rho < 0.0 || rho >= eps {
        return Complex64::new(0.0, 0.0);
    }
    direction * eps.sqrt() * cubic(rho / eps).0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeResult {
    pub epsilon: f64,
    pub direction: Complex64,
    /// `(H psi, psi) / ||psi||^2`
    pub quotient: Complex64,
    /// `||psi||^2`
    pub norm_sq: f64,
    pub b_epsilon: Complex64,
    /// `beta f'(0) eps^{-1/2}`
    pub boundary_term: Complex64,
    /// `\int |grad psi|^2`
    pub volume_term: f64,
    /// `|<psi>_mu - 1|` on a finer rule.
    pub domain_defect: f64,
}

/// Rayleigh quotient of `psi_eps`, with the domain condition checked on an independent rule.
pub fn rayleigh_probe(profile: &ProbeProfile, domain: &DomainSpec, measure: &MeasureSpec) -> Result<ProbeResult> {
    let eps = profile.epsilon;
    let d = profile.direction;
    let b = profile.b_epsilon;
    let strip = StripRule::new(domain, eps, 1);
    let bumps = bump_rule(profile.theta_center, 1);
    let scale = profile.theta_scale;

    let mut grad_strip = 0.0;
    let mut norm_strip = 0.0;
    for (w, s) in strip.weights.iter().zip(&strip.s) {
        let (f, fp) = cubic(*s);
        grad_strip += w * (d * fp).norm_sqr() / eps;
        norm_strip += w * ((1.0 + d * eps.sqrt() * f).norm_sqr() - 1.0);
    }
    let grad_bump = bumps.integrate(|p| (scale * bump(dist(p, profile.theta_center)).1).powi(2))?;
    let norm_bump = bumps.integrate(|p| (1.0 - b * scale * bump(dist(p, profile.theta_center)).0).norm_sqr() - 1.0)?;

    let boundary_term = domain.boundary_weight * d / eps.sqrt();
    let volume_term = grad_strip + b.norm_sqr() * grad_bump;
    let norm_sq = domain.area + norm_strip + norm_bump;

    let fine_strip = StripRule::new(domain, eps, 2).quad();
    let fine_bump = bump_rule(profile.theta_center, 2);
    let phi_mean = average(measure, domain, &fine_strip, &|p| phi(domain, d, eps, p))?;
    let theta_mean = average(measure, domain, &fine_bump, &|p| {
        Complex64::new(scale * bump(dist(p, profile.theta_center)).0, 0.0)
    })?;
    let domain_defect = (phi_mean - b * theta_mean).norm();

    Ok(ProbeResult {
        epsilon: eps,
        direction: d,
        quotient: (boundary_term + volume_term) / norm_sq,
        norm_sq,
        b_epsilon: b,
        boundary_term,
        volume_term,
        domain_defect,
    })
}

/// Probes every `(direction, eps)` pair.
pub fn sweep(domain: &DomainSpec, measure: &MeasureSpec, epsilons: &[f64], dirs: &[Complex64]) -> Result<Vec<ProbeResult>> {
    let jobs: Vec<(Complex64, f64)> = dirs.iter().flat_map(|d| epsilons.iter().map(move |e| (*d, *e))).collect();
    crate::par_map(jobs.len(), |i| {
        let (d, e) = jobs[i];
        ProbeProfile::new(d, e, domain, measure).and_then(|p| rayleigh_probe(&p, domain, measure))
    })
    .into_iter()
    .collect()
}

/// `n` log-spaced values from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// Least squares of `ln |Re(conj(f'(0)) q)|` against `ln eps`.
pub fn blowup_fit(results: &[ProbeResult], direction: Complex64) -> Result<BlowupFit> {
    let pts: Vec<(f64, f64)> = results
        .iter()
        .filter(|r| (r.direction - direction).norm() < 1e-12)
        .map(|r| (r.epsilon.ln(), (direction.conj() * r.quotient).re.abs().ln()))
        .collect();
    if pts.len() < 4 {
        return Err(Error::Degenerate(format!("blow-up fit needs at least 4 points, got {}", pts.len())));
    }
    let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), p| (a.min(p.0), b.max(p.0)));
    if hi - lo < 2.0 * std::f64::consts::LN_10 * (1.0 - 1e-9) {
        return Err(Error::InvalidInput("epsilon grid must span at least two decades".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(BlowupFit {
        slope,
        intercept: my - slope * mx,
        r2: if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 },
        points: pts.len(),
    })
}

/// `epsilon,direction,re,im,norm`
pub fn sweep_csv(results: &[ProbeResult]) -> String {
    let mut out = String::from("epsilon,direction,re,im,norm\n");
    for r in results {
        let _ = writeln!(
            out,
            "{:.6e},{},{:.10e},{:.10e},{:.10e}",
            r.epsilon,
            direction_label(r.direction),
            r.quotient.re,
            r.quotient.im,
            r.norm_sq
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_constraints() {
        assert_eq!(cubic(0.0), (0.0, 1.0));
        assert_eq!(cubic(1.0), (0.0, 0.0));
        let h = 1e-6;
        for s in [0.1, 0.4, 0.8] {
            let fd = (cubic(s + h).0 - cubic(s - h).0) / (2.0 * h);
            assert!((fd - cubic(s).1).abs() < 1e-8);
            let fd = (bump(s * BUMP_RADIUS + h).0 - bump(s * BUMP_RADIUS - h).0) / (2.0 * h);
            assert!((fd - bump(s * BUMP_RADIUS).1).abs() < 1e-6);
        }
    }

    #[test]
    fn strip_rules_measure_the_strip() {
        let eps = 0.01;
        let disk = StripRule::new(&DomainSpec::unit_disk(), eps, 1);
        let area: f64 = disk.weights.iter().sum();
        assert!((area - PI * (1.0 - (1.0 - eps) * (1.0 - eps))).abs() < 1e-13);
        let rect = DomainSpec::rectangle(PI, 1.2337 * PI).unwrap();
        let r = StripRule::new(&rect, eps, 1);
        let area: f64 = r.weights.iter().sum();
        let exact = rect.area - (PI - 2.0 * eps) * (1.2337 * PI - 2.0 * eps);
        assert!((area - exact).abs() < 1e-12);
        for (p, s) in r.points.iter().zip(&r.s) {
            assert!((rect.distance_to_boundary(*p) - eps * s).abs() < 1e-12);
        }
    }

    #[test]
    fn disk_quotient_matches_leading_order() {
        let disk = DomainSpec::unit_disk();
        let mu = MeasureSpec::uniform();
        let p = ProbeProfile::new(Complex64::new(1.0, 0.0), 1e-4, &disk, &mu).unwrap();
        let r = rayleigh_probe(&p, &disk, &mu).unwrap();
        assert!((r.quotient.re - 200.0).abs() < 2.0, "{}", r.quotient);
        assert!(r.quotient.im.abs() < 1e-12);
        assert!((r.norm_sq - PI).abs() < 0.02 * PI);
        assert!(r.domain_defect < DOMAIN_TOL);

        let p = ProbeProfile::new(Complex64::new(0.0, 1.0), 1e-4, &disk, &mu).unwrap();
        let r = rayleigh_probe(&p, &disk, &mu).unwrap();
        assert!((r.quotient.im - 200.0).abs() < 2.0);
        assert!(r.quotient.re.abs() < 2.0);
    }

    #[test]
    fn uniform_b_is_exact() {
        // b = (2 / pi) pi eps^{3/2} \int f(s) (1 - eps s) ds for the uniform disk
        let disk = DomainSpec::unit_disk();
        let eps: f64 = 1e-3;
        let p = ProbeProfile::new(Complex64::new(1.0, 0.0), eps, &disk, &MeasureSpec::uniform()).unwrap();
        let exact = 2.0 * eps.powf(1.5) * (1.0 / 12.0 - eps / 30.0);
        assert!((p.b_epsilon.re - exact).abs() < 1e-15);
    }

    #[test]
    fn geometry_errors() {
        let disk = DomainSpec::unit_disk();
        let mu = MeasureSpec::uniform();
        assert!(matches!(ProbeProfile::new(Complex64::new(1.0, 0.0), 0.8, &disk, &mu), Err(Error::Geometry(_))));
        assert!(matches!(ProbeProfile::new(Complex64::new(1.0, 0.0), 0.0, &disk, &mu), Err(Error::Geometry(_))));
        let circle = MeasureSpec::circle(0.5);
        assert!(matches!(ProbeProfile::new(Complex64::new(1.0, 0.0), 0.01, &disk, &circle), Err(Error::Degenerate(_))));
    }

    #[test]
    fn fit_needs_points() {
        let disk = DomainSpec::unit_disk();
        let mu = MeasureSpec::uniform();
        let r = sweep(&disk, &mu, &[1e-2, 1e-3, 1e-4], &[Complex64::new(1.0, 0.0)]).unwrap();
        assert!(matches!(blowup_fit(&r, Complex64::new(1.0, 0.0)), Err(Error::Degenerate(_))));
        let r = sweep(&disk, &mu, &log_grid(1e-3, 1e-2, 5), &[Complex64::new(1.0, 0.0)]).unwrap();
        assert!(matches!(blowup_fit(&r, Complex64::new(1.0, 0.0)), Err(Error::InvalidInput(_))));
    }
}
