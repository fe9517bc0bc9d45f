//! Closed-form domains with identity diffusion.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    UnitDisk,
    Rectangle { width: f64, height: f64 },
}

/// The diffusion matrix `a(x)`. Only the identity is supported, so the
/// ellipticity constant is 1 and `n . a n = 1` on the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diffusion {
    #[default]
    Identity,
}

impl Diffusion {
    pub fn ellipticity(&self) -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Shape", into = "Shape")]
pub struct DomainSpec {
    pub shape: Shape,
    pub diffusion: Diffusion,
    /// `|Omega|`
    pub area: f64,
    /// `beta = \int_{\partial\Omega} n . a n`, the perimeter for `a = I`.
    pub boundary_weight: f64,
}

impl TryFrom<Shape> for DomainSpec {
    type Error = Error;
    fn try_from(shape: Shape) -> Result<Self> {
        match shape {
            Shape::UnitDisk => Ok(Self::unit_disk()),
            Shape::Rectangle { width, height } => Self::rectangle(width, height),
        }
    }
}

impl From<DomainSpec> for Shape {
    fn from(d: DomainSpec) -> Self {
        d.shape
    }
}

impl DomainSpec {
    pub fn unit_disk() -> Self {
        Self {
            shape: Shape::UnitDisk,
            diffusion: Diffusion::Identity,
            area: PI,
            boundary_weight: 2.0 * PI,
        }
    }

    pub fn rectangle(width: f64, height: f64) -> Result<Self> {
        if !(width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "rectangle sides must be positive, got {width} x {height}"
            )));
        }
        Ok(Self {
            shape: Shape::Rectangle { width, height },
            diffusion: Diffusion::Identity,
            area: width * height,
            boundary_weight: 2.0 * (width + height),
        })
    }

    pub fn is_disk(&self) -> bool {
        matches!(self.shape, Shape::UnitDisk)
    }

    pub fn contains(&self, p: Point) -> bool {
        match self.shape {
            Shape::UnitDisk => p[0] * p[0] + p[1] * p[1] < 1.0,
            Shape::Rectangle { width, height } => {
                p[0] > 0.0 && p[0] < width && p[1] > 0.0 && p[1] < height
            }
        }
    }

    /// Distance to the boundary, `rho(x)`. Negative outside.
    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        match self.shape {
            Shape::UnitDisk => 1.0 - (p[0] * p[0] + p[1] * p[1]).sqrt(),
            Shape::Rectangle { width, height } => {
                let dx = p[0].min(width - p[0]);
                let dy = p[1].min(height - p[1]);
                dx.min(dy)
            }
        }
    }

    /// Center of the largest inscribed disk.
    pub fn incenter(&self) -> Point {
        match self.shape {
            Shape::UnitDisk => [0.0, 0.0],
            Shape::Rectangle { width, height } => [0.5 * width, 0.5 * height],
        }
    }

    pub fn inradius(&self) -> f64 {
        match self.shape {
            Shape::UnitDisk => 1.0,
            Shape::Rectangle { width, height } => 0.5 * width.min(height),
        }
    }

    /// Torsion function `T = H_D^{-1} 1`, i.e. `-Laplace T = 1`, `T = 0` on the boundary.
    pub fn torsion(&self, p: Point) -> f64 {
        match self.shape {
            Shape::UnitDisk => 0.25 * (1.0 - p[0] * p[0] - p[1] * p[1]),
            Shape::Rectangle { width, height } => rectangle_torsion(width, height, p),
        }
    }

    /// `\int T`, which equals `(H_D^{-1} 1, 1)`.
    pub fn torsion_integral(&self) -> f64 {
        match self.shape {
            Shape::UnitDisk => PI / 8.0,
            Shape::Rectangle { width: a, height: b } => {
                // a^3 b / 12 - sum_{n odd} 16 a^4 tanh(n pi b / 2a) / (n^5 pi^5)
                let mut sum = 0.0;
                let mut n = 1usize;
                loop {
                    let nf = n as f64;
                    let s = nf * PI / a;
                    let term = 16.0 * a.powi(4) * (0.5 * s * b).tanh() / (nf.powi(5) * PI.powi(5));
                    sum += term;
                    if term < 1e-18 * sum {
                        break;
                    }
                    n += 2;
                }
                a.powi(3) * b / 12.0 - sum
            }
        }
    }
}

impl DomainSpec {
    /// `||T||^2 = \int T^2`, which equals `sum_n (1, chi_n)^2 / lambda_n^2`.
    pub fn torsion_l2_squared(&self) -> f64 {
        match self.shape {
            Shape::UnitDisk => PI / 48.0,
            Shape::Rectangle { width: a, height: b } => {
                // sum over odd m, n of (64 ab / (m n pi^2)^2) / lambda_mn^2
                let c = 64.0 * a * b / PI.powi(4);
                let mut total = 0.0;
                let mut m = 1usize;
                loop {
                    let mf = m as f64;
                    let mut row = 0.0;
                    let mut n = 1usize;
                    loop {
                        let nf = n as f64;
                        let lam = PI * PI * (mf * mf / (a * a) + nf * nf / (b * b));
                        let term = c / (mf * mf * nf * nf * lam * lam);
                        row += term;
                        if term < 1e-19 * row {
                            break;
                        }
                        n += 2;
                    }
                    total += row;
                    if row < 1e-19 * total {
                        break;
                    }
                    m += 2;
                }
                total
            }
        }
    }
}

/// `x(a-x)/2 - (4a^2/pi^3) sum_{n odd} sin(n pi x/a) cosh(n pi (y-b/2)/a) / (n^3 cosh(n pi b/2a))`
fn rectangle_torsion(a: f64, b: f64, p: Point) -> f64 {
    let (x, y) = (p[0], p[1]);
    if x <= 0.0 || x >= a || y <= 0.0 || y >= b {
        return 0.0;
    }
    let base = 0.5 * x * (a - x);
    let yc = (y - 0.5 * b).abs();
    let t = PI * x / a;
    let prefactor = 4.0 * a * a / PI.powi(3);
    let mut corr = 0.0;
    let mut n = 1usize;
    // The hyperbolic ratio decays like exp(-n pi d / a) with d the distance to the
    // nearer horizontal side; near that side the n^-3 factor controls the tail.
    let d = 0.5 * b - yc;
    while n < 200_000 {
        let nf = n as f64;
        let s = nf * PI / a;
        let ratio = ((s * (yc - 0.5 * b)).exp() + (s * (-yc - 0.5 * b)).exp()) / (1.0 + (-s * b).exp());
        let term = prefactor * (nf * t).sin() * ratio / (nf * nf * nf);
        corr += term;
        let envelope = prefactor * ratio / (nf * nf * nf);
        if envelope < 1e-17 * base.max(1e-300) || (s * d > 45.0 && n > 3) {
            break;
        }
        n += 2;
    }
    base - corr
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_constants() {
        let d = DomainSpec::unit_disk();
        assert_eq!(d.area, PI);
        assert_eq!(d.boundary_weight, 2.0 * PI);
        let r = DomainSpec::rectangle(2.0, 3.0).unwrap();
        assert_eq!(r.area, 6.0);
        assert_eq!(r.boundary_weight, 10.0);
        assert!(DomainSpec::rectangle(-1.0, 1.0).is_err());
    }

    #[test]
    fn rectangle_torsion_solves_poisson() {
        let (a, b) = (PI, 1.2337 * PI);
        let h = 1e-3;
        for &p in &[[1.0, 1.0], [2.0, 3.0], [0.3, 1.9], [PI / 2.0, 1.2337 * PI / 2.0]] {
            let f = |q: Point| rectangle_torsion(a, b, q);
            let lap = (f([p[0] + h, p[1]]) + f([p[0] - h, p[1]]) + f([p[0], p[1] + h]) + f([p[0], p[1] - h])
                - 4.0 * f(p))
                / (h * h);
            assert!((lap + 1.0).abs() < 1e-5, "laplacian at {p:?} = {lap}");
        }
        assert!(rectangle_torsion(a, b, [1.0, 1e-9]).abs() < 1e-8);
        assert!(rectangle_torsion(a, b, [1e-9, 1.0]).abs() < 1e-8);
    }

    #[test]
    fn serde_round_trip_recomputes_constants() {
        let json = r#"{"shape":"rectangle","width":2.0,"height":0.5}"#;
        let d: DomainSpec = serde_json::from_str(json).unwrap();
        assert_eq!(d.area, 1.0);
        let back = serde_json::to_string(&d).unwrap();
        assert_eq!(back, json);
    }

    #[test]
    fn torsion_norms_match_quadrature() {
        use crate::quadrature::GridRule;
        let d = DomainSpec::unit_disk();
        let g = GridRule::polar(40, 16);
        let t2 = g.integrate(|p| d.torsion(p).powi(2)).unwrap();
        assert!((t2 - d.torsion_l2_squared()).abs() < 1e-14);
        let r = DomainSpec::rectangle(PI, 1.2337 * PI).unwrap();
        let g = GridRule::tensor(PI, 1.2337 * PI, 60, 60);
        let t1 = g.integrate(|p| r.torsion(p)).unwrap();
        let t2 = g.integrate(|p| r.torsion(p).powi(2)).unwrap();
        assert!((t1 - r.torsion_integral()).abs() < 1e-10, "{t1}");
        assert!((t2 - r.torsion_l2_squared()).abs() < 1e-10, "{t2}");
    }
}
