//! Gauss-Legendre rules and the product rules used on the two domains.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::domain::{DomainSpec, Point, Shape};
use crate::error::{Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_interval(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

/// Composite Gauss-Legendre rule over consecutive panels `breaks[i]..breaks[i+1]`.
pub fn composite_gauss_legendre(breaks: &[f64], per_panel: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for pair in breaks.windows(2) {
        if pair[1] > pair[0] {
            let (x, w) = gauss_legendre_interval(per_panel, pair[0], pair[1]);
            xs.extend(x);
            ws.extend(w);
        }
    }
    (xs, ws)
}

/// Separable product rule on a domain.
///
/// The disk uses Gauss-Legendre in the radius (Jacobian `r` folded into the
/// weights) times the uniform trapezoid rule in the angle. The rectangle uses a
/// tensor Gauss-Legendre rule. Grid values are stored row-major with the
/// first coordinate (`r` or `x`) as the slow index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GridRule {
    Polar {
        radii: Vec<f64>,
        radial_weights: Vec<f64>,
        n_theta: usize,
    },
    Tensor {
        xs: Vec<f64>,
        x_weights: Vec<f64>,
        ys: Vec<f64>,
        y_weights: Vec<f64>,
    },
}

impl GridRule {
    pub fn polar(n_r: usize, n_theta: usize) -> Self {
        let (r, w) = gauss_legendre_interval(n_r, 0.0, 1.0);
        let radial_weights = r.iter().zip(&w).map(|(r, w)| r * w).collect();
        Self::Polar {
            radii: r,
            radial_weights,
            n_theta,
        }
    }

    pub fn tensor(width: f64, height: f64, n_x: usize, n_y: usize) -> Self {
        let (xs, x_weights) = gauss_legendre_interval(n_x, 0.0, width);
        let (ys, y_weights) = gauss_legendre_interval(n_y, 0.0, height);
        Self::Tensor {
            xs,
            x_weights,
            ys,
            y_weights,
        }
    }

    /// Rule with `n1 x n2` nodes adapted to the domain.
    pub fn for_domain(domain: &DomainSpec, n1: usize, n2: usize) -> Self {
        match domain.shape {
            Shape::UnitDisk => Self::polar(n1, n2),
            Shape::Rectangle { width, height } => Self::tensor(width, height, n1, n2),
        }
    }

    /// Default resolution: exact to ~1e-12 for smooth, slowly varying integrands.
    pub fn default_for(domain: &DomainSpec) -> Self {
        match domain.shape {
            Shape::UnitDisk => Self::polar(64, 128),
            Shape::Rectangle { .. } => Self::for_domain(domain, 64, 64),
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match self {
            Self::Polar { radii, n_theta, .. } => (radii.len(), *n_theta),
            Self::Tensor { xs, ys, .. } => (xs.len(), ys.len()),
        }
    }

    pub fn len(&self) -> usize {
        let (a, b) = self.dims();
        a * b
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn angles(&self) -> Vec<f64> {
        match self {
            Self::Polar { n_theta, .. } => (0..*n_theta)
                .map(|j| 2.0 * PI * j as f64 / *n_theta as f64)
                .collect(),
            Self::Tensor { .. } => Vec::new(),
        }
    }

    /// Node coordinates in grid order.
    pub fn points(&self) -> Vec<Point> {
        match self {
            Self::Polar { radii, .. } => {
                let angles = self.angles();
                let trig: Vec<(f64, f64)> = angles.iter().map(|t| (t.cos(), t.sin())).collect();
                radii
                    .iter()
                    .flat_map(|&r| trig.iter().map(move |&(c, s)| [r * c, r * s]))
                    .collect()
            }
            Self::Tensor { xs, ys, .. } => xs
                .iter()
                .flat_map(|&x| ys.iter().map(move |&y| [x, y]))
                .collect(),
        }
    }

    /// Node weights in grid order.
    pub fn weights(&self) -> Vec<f64> {
        match self {
            Self::Polar {
                radial_weights,
                n_theta,
                ..
            } => {
                let dt = 2.0 * PI / *n_theta as f64;
                radial_weights
                    .iter()
                    .flat_map(|&w| std::iter::repeat_n(w * dt, *n_theta))
                    .collect()
            }
            Self::Tensor {
                x_weights,
                y_weights,
                ..
            } => x_weights
                .iter()
                .flat_map(|&wx| y_weights.iter().map(move |&wy| wx * wy))
                .collect(),
        }
    }

    /// Samples `f` at every node, failing on non-finite values.
    pub fn sample<F: Fn(Point) -> f64>(&self, f: F) -> Result<Vec<f64>> {
        self.points()
            .into_iter()
            .map(|p| {
                let v = f(p);
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Evaluation { x: p[0], y: p[1] })
                }
            })
            .collect()
    }

    pub fn integrate_samples(&self, values: &[f64]) -> f64 {
        self.weights().iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn integrate<F: Fn(Point) -> f64>(&self, f: F) -> Result<f64> {
        Ok(self.integrate_samples(&self.sample(f)?))
    }
}

/// Unstructured rule: arbitrary nodes with weights.
#[derive(Debug, Clone, Default)]
pub struct QuadRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    pub fn push(&mut self, p: Point, w: f64) {
        self.points.push(p);
        self.weights.push(w);
    }

    pub fn extend(&mut self, other: QuadRule) {
        self.points.extend(other.points);
        self.weights.extend(other.weights);
    }

    pub fn integrate_complex<F: Fn(Point) -> Complex64>(&self, f: F) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (p, w) in self.points.iter().zip(&self.weights) {
            let v = f(*p);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Evaluation { x: p[0], y: p[1] });
            }
            acc += v * *w;
        }
        Ok(acc)
    }

    pub fn integrate<F: Fn(Point) -> f64>(&self, f: F) -> Result<f64> {
        self.integrate_complex(|p| Complex64::new(f(p), 0.0)).map(|z| z.re)
    }

    /// Polar product rule on the annulus `r0 <= r <= r1` with radial panels.
    pub fn annulus(radial_breaks: &[f64], per_panel: usize, n_theta: usize) -> Self {
        let (rs, ws) = composite_gauss_legendre(radial_breaks, per_panel);
        let dt = 2.0 * PI / n_theta as f64;
        let mut rule = QuadRule::default();
        for (r, w) in rs.iter().zip(&ws) {
            for j in 0..n_theta {
                let t = dt * j as f64;
                rule.push([r * t.cos(), r * t.sin()], r * w * dt);
            }
        }
        rule
    }

    /// Tensor rule on a box with composite panels along each axis.
    pub fn tensor_box(x_breaks: &[f64], y_breaks: &[f64], per_panel: usize) -> Self {
        let (xs, wx) = composite_gauss_legendre(x_breaks, per_panel);
        let (ys, wy) = composite_gauss_legendre(y_breaks, per_panel);
        let mut rule = QuadRule::default();
        for (x, a) in xs.iter().zip(&wx) {
            for (y, b) in ys.iter().zip(&wy) {
                rule.push([*x, *y], a * b);
            }
        }
        rule
    }

    /// Collapsed-coordinate rule on the triangle with vertices `v0, v1, v2`.
    pub fn triangle(v0: Point, v1: Point, v2: Point, n: usize) -> Self {
        let (s, ws) = gauss_legendre_interval(n, 0.0, 1.0);
        let e1 = [v1[0] - v0[0], v1[1] - v0[1]];
        let e2 = [v2[0] - v0[0], v2[1] - v0[1]];
        let area2 = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
        let mut rule = QuadRule::default();
        for (u, wu) in s.iter().zip(&ws) {
            for (t, wt) in s.iter().zip(&ws) {
                // (u, t) in the unit square -> (u (1 - t), u t) in the reference triangle
                let a = u * (1.0 - t);
                let b = u * t;
                rule.push(
                    [v0[0] + a * e1[0] + b * e2[0], v0[1] + a * e1[1] + b * e2[1]],
                    wu * wt * u * area2,
                );
            }
        }
        rule
    }
}

/// `\int_\Omega f` with the default rule of the domain.
pub fn quadrature_integral<F: Fn(Point) -> Complex64>(f: F, domain: &DomainSpec) -> Result<Complex64> {
    let rule = GridRule::default_for(domain);
    let mut acc = Complex64::new(0.0, 0.0);
    for (p, w) in rule.points().into_iter().zip(rule.weights()) {
        let v = f(p);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::Evaluation { x: p[0], y: p[1] });
        }
        acc += v * w;
    }
    Ok(acc)
}
