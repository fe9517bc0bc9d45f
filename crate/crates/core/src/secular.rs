//! The secular function `m(lambda) = <R_D(lambda) 1>_mu` and its zeros.
//!
//! Retained poles are summed exactly. The dropped tail is handled in one of two
//! equivalent ways, whichever has the smaller bound at the query point:
//!
//! * plain truncation, with tail `|sum_{n > N} alpha_n / (lambda_n - lambda)|`
//!   bounded by Cauchy-Schwarz as `sqrt(t_1) sqrt(t_w) / (Lambda - Re lambda)`;
//! * the torsion anchor `m(lambda) = <T>_mu + lambda sum_n alpha_n / (lambda_n (lambda_n - lambda))`,
//!   where `T = H_D^{-1} 1`. The tail then carries an extra `|lambda| / Lambda`.
//!
//! Here `t_1 = |Omega| - sum (1, chi_n)^2` and `t_w = ||w||^2 - sum (chi_n, w)^2`
//! are the exact Parseval remainders. Measures without an `L^2` density get a
//! heuristic anchored tail built from the residue density just below the cutoff.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::basis::BasisSet;
use crate::error::{Error, Result};
use crate::measure::MeasureMoments;

/// Residues below this are treated as symmetry-cancelled, not as poles.
pub const INERT_TOL: f64 = 1e-12;
/// Residues between `INERT_TOL` and this raise a conditioning warning.
pub const CONDITIONING_TOL: f64 = 1e-8;
/// Minimum distance of a query point from a live pole.
pub const POLE_TOL: f64 = 1e-12;
/// Safety factor on the heuristic tail of singular measures.
pub const HEURISTIC_SAFETY: f64 = 10.0;
/// Fraction of the cutoff kept free of queries.
pub const DEFAULT_MARGIN_FRACTION: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub value: f64,
    /// Sum of `(1, chi_n) <chi_n>_mu` over the eigenvalue cluster.
    pub residue: f64,
    pub inert: bool,
    /// Modes of the cluster in the basis enumeration.
    pub modes: Range<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TailModel {
    /// Parseval remainders of `1` and of the density.
    CauchySchwarz { one_tail: f64, density_tail: f64 },
    /// Residue mass per unit of spectral parameter just below the cutoff.
    Heuristic { residue_density: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularValue {
    pub value: Complex64,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct SecularSeries {
    pub poles: Vec<Pole>,
    pub cutoff: f64,
    pub margin: f64,
    /// `<T>_mu`
    pub torsion_mean: f64,
    /// `<T>_mu - sum alpha_j / lambda_j`: the exact value of the dropped tail at 0.
    pub anchor_shift: f64,
    pub tail: TailModel,
    /// Poles whose residue lies in `(INERT_TOL, CONDITIONING_TOL)`.
    pub conditioning_warnings: Vec<f64>,
}

impl SecularSeries {
    pub fn new(basis: &BasisSet, moments: &MeasureMoments) -> Self {
        let q = basis.one_coeffs();
        let p = &moments.moments;
        let mut poles = Vec::new();
        let mut warnings = Vec::new();
        for range in basis.clusters() {
            let residue: f64 = range.clone().map(|i| q[i] * p[i]).sum();
            let inert = residue.abs() < INERT_TOL;
            if !inert && residue.abs() < CONDITIONING_TOL {
                warnings.push(basis.modes[range.start].eigenvalue);
            }
            poles.push(Pole {
                value: basis.modes[range.start].eigenvalue,
                residue,
                inert,
                modes: range,
            });
        }
        let live_sum: f64 = poles.iter().filter(|p| !p.inert).map(|p| p.residue / p.value).sum();
        let tail = match moments.l2_density_norm {
            Some(w) => {
                let one_tail = (basis.domain.area - q.iter().map(|v| v * v).sum::<f64>()).max(0.0);
                let density_tail = (w * w - p.iter().map(|v| v * v).sum::<f64>()).max(0.0);
                TailModel::CauchySchwarz {
                    one_tail,
                    density_tail,
                }
            }
            None => {
                let lo = 0.5 * basis.cutoff;
                let band: f64 = poles.iter().filter(|p| p.value > lo).map(|p| p.residue.abs()).sum();
                TailModel::Heuristic {
                    residue_density: band / (basis.cutoff - lo),
                }
            }
        };
        Self {
            poles,
            cutoff: basis.cutoff,
            margin: DEFAULT_MARGIN_FRACTION * basis.cutoff,
            torsion_mean: moments.torsion_mean,
            anchor_shift: moments.torsion_mean - live_sum,
            tail,
            conditioning_warnings: warnings,
        }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        self.margin = margin;
        self
    }

    pub fn heuristic_tail(&self) -> bool {
        matches!(self.tail, TailModel::Heuristic { .. })
    }

    pub fn live_poles(&self) -> impl Iterator<Item = &Pole> {
        self.poles.iter().filter(|p| !p.inert)
    }

    /// Largest real part that queries may use.
    pub fn usable_limit(&self) -> f64 {
        self.cutoff - self.margin
    }

    fn check_domain(&self, z: Complex64) -> Result<()> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite spectral parameter {z}")));
        }
        if z.re >= self.usable_limit() {
            return Err(Error::CutoffExceeded {
                re: z.re,
                cutoff: self.cutoff,
                margin: self.margin,
            });
        }
        for p in self.live_poles() {
            let d = (z - p.value).norm();
            if d < POLE_TOL * (1.0 + p.value) {
                return Err(Error::PoleProximity {
                    lambda: format!("{z}"),
                    pole: p.value,
                    distance: d,
                });
            }
        }
        Ok(())
    }

    /// Sum over the retained poles only.
    pub fn eval_truncated(&self, z: Complex64) -> Complex64 {
        self.live_poles().map(|p| p.residue / (p.value - z)).sum()
    }

    /// Tail bounds `(plain, anchored)` at `z`.
    fn tail_bounds(&self, z: Complex64) -> (f64, f64) {
        let gap = self.cutoff - z.re;
        match self.tail {
            TailModel::CauchySchwarz {
                one_tail,
                density_tail,
            } => {
                let cs = one_tail.sqrt() * density_tail.sqrt();
                (cs / gap, z.norm() * cs / (self.cutoff * gap))
            }
            TailModel::Heuristic { residue_density } => {
                // |z| rho \int_Lambda^inf dx / (x (x - Re z))
                let a = z.re;
                let integral = if a.abs() < 1e-12 * self.cutoff {
                    1.0 / self.cutoff
                } else {
                    (self.cutoff / (self.cutoff - a)).ln() / a
                };
                (f64::INFINITY, HEURISTIC_SAFETY * z.norm() * residue_density * integral)
            }
        }
    }

    /// `m(z)` with a bound on the truncation error.
    pub fn eval(&self, z: Complex64) -> Result<SecularValue> {
        self.check_domain(z)?;
        Ok(self.eval_unchecked(z))
    }

    fn eval_unchecked(&self, z: Complex64) -> SecularValue {
        let base = self.eval_truncated(z);
        let (plain, anchored) = self.tail_bounds(z);
        if anchored <= plain {
            SecularValue {
                value: base + self.anchor_shift,
                bound: anchored,
            }
        } else {
            SecularValue {
                value: base,
                bound: plain,
            }
        }
    }

    /// The anchored representation regardless of which bound is smaller.
    pub fn eval_anchored(&self, z: Complex64) -> Result<SecularValue> {
        self.check_domain(z)?;
        Ok(SecularValue {
            value: self.eval_truncated(z) + self.anchor_shift,
            bound: self.tail_bounds(z).1,
        })
    }

    pub fn eval_real(&self, x: f64) -> Result<(f64, f64)> {
        let v = self.eval(Complex64::new(x, 0.0))?;
        Ok((v.value.re, v.bound))
    }

    /// `m'(z) = sum alpha_j / (lambda_j - z)^2`.
    pub fn eval_derivative(&self, z: Complex64) -> Result<Complex64> {
        self.check_domain(z)?;
        Ok(self.derivative_unchecked(z))
    }

    fn derivative_unchecked(&self, z: Complex64) -> Complex64 {
        self.live_poles()
            .map(|p| {
                let d = p.value - z;
                p.residue / (d * d)
            })
            .sum()
    }

    fn value_and_derivative(&self, z: Complex64) -> (SecularValue, Complex64) {
        (self.eval_unchecked(z), self.derivative_unchecked(z))
    }

    /// Numerical residue `lim (lambda_j - z) m(z)` approached from above the axis.
    pub fn numerical_residue(&self, pole: f64, offset: f64) -> Result<f64> {
        let z = Complex64::new(pole, offset);
        let v = self.eval(z)?;
        Ok(((pole - z) * v.value).re)
    }

    /// Real zeros of `m` in `(lo, hi)`. Fails if any gap between poles is undecidable.
    pub fn real_roots_in(&self, lo: f64, hi: f64) -> Result<Vec<RealRoot>> {
        let scan = self.scan_real(lo, hi)?;
        if let Some((a, b)) = scan.undecidable.first() {
            return Err(Error::Undecidable(format!(
                "|m| stays below its truncation bound on ({a}, {b})"
            )));
        }
        Ok(scan.roots)
    }

    /// Real zeros of `m` in `(lo, hi)`, flagging gaps where the sign of `m`
    /// cannot be certified anywhere.
    pub fn scan_real(&self, lo: f64, hi: f64) -> Result<RealScan> {
        if !(lo < hi) {
            return Err(Error::InvalidInput(format!("empty interval ({lo}, {hi})")));
        }
        self.check_domain(Complex64::new(lo, 0.0))?;
        self.check_domain(Complex64::new(hi, 0.0))?;
        let mut ends: Vec<End> = vec![End::Point(lo)];
        for p in self.live_poles().filter(|p| p.value > lo && p.value < hi) {
            ends.push(End::Pole(p.value, p.residue));
        }
        ends.push(End::Point(hi));
        let mut scan = RealScan::default();
        for pair in ends.windows(2) {
            match self.roots_in_gap(pair[0], pair[1])? {
                Some(roots) => scan.roots.extend(roots),
                None => scan.undecidable.push((pair[0].x(), pair[1].x())),
            }
        }
        Ok(scan)
    }

    fn roots_in_gap(&self, left: End, right: End) -> Result<Option<Vec<RealRoot>>> {
        const SAMPLES: usize = 96;
        let (a, b) = (left.x(), right.x());
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        // (x, value, bound); pole ends contribute their limiting sign
        let mut samples: Vec<(f64, f64, f64)> = Vec::with_capacity(SAMPLES + 1);
        if let End::Pole(_, r) = left {
            // just right of a pole alpha / (lambda_j - x) -> -sign(alpha) inf
            samples.push((a, -r.signum() * f64::INFINITY, 0.0));
        }
        let range = match (left, right) {
            (End::Point(_), End::Point(_)) => 0..=SAMPLES,
            (End::Point(_), End::Pole(..)) => 0..=SAMPLES - 1,
            (End::Pole(..), End::Point(_)) => 1..=SAMPLES,
            (End::Pole(..), End::Pole(..)) => 1..=SAMPLES - 1,
        };
        let mut certain = 0usize;
        for i in range {
            let x = mid - half * (std::f64::consts::PI * i as f64 / SAMPLES as f64).cos();
            let v = self.eval_unchecked(Complex64::new(x, 0.0));
            if v.value.re.abs() > v.bound {
                certain += 1;
            }
            samples.push((x, v.value.re, v.bound));
        }
        if let End::Pole(_, r) = right {
            samples.push((b, r.signum() * f64::INFINITY, 0.0));
        }
        if certain == 0 {
            return Ok(None);
        }
        let mut roots = Vec::new();
        for w in samples.windows(2) {
            let (x0, f0, _) = w[0];
            let (x1, f1, _) = w[1];
            if f0 == 0.0 {
                if x0 > a && x0 < b && roots.iter().all(|r: &RealRoot| r.value != x0) {
                    roots.push(self.finish_real(x0, (x0, x0)));
                }
                continue;
            }
            if (f0 < 0.0) != (f1 < 0.0) && f1 != 0.0 {
                let root = self.refine_real(x0, f0, x1, f1);
                roots.push(self.finish_real(root, (x0, x1)));
            }
        }
        Ok(Some(roots))
    }

    fn finish_real(&self, x: f64, bracket: (f64, f64)) -> RealRoot {
        let (v, d) = self.value_and_derivative(Complex64::new(x, 0.0));
        RealRoot {
            value: x,
            bracket,
            residual: v.value.re.abs(),
            bound: v.bound,
            derivative: d.re,
        }
    }

    fn refine_real(&self, mut a: f64, fa: f64, mut b: f64, _fb: f64) -> f64 {
        let nudge = |x: f64| POLE_TOL.sqrt() * (1.0 + x.abs());
        // keep away from pole ends
        if fa.is_infinite() {
            a += nudge(a);
        }
        if _fb.is_infinite() {
            b -= nudge(b);
        }
        let fa_sign = self.eval_unchecked(Complex64::new(a, 0.0)).value.re < 0.0;
        let mut x = 0.5 * (a + b);
        for _ in 0..300 {
            let (v, d) = self.value_and_derivative(Complex64::new(x, 0.0));
            let f = v.value.re;
            if f == 0.0 {
                return x;
            }
            if (f < 0.0) == fa_sign {
                a = x;
            } else {
                b = x;
            }
            let newton = x - f / d.re;
            let next = if d.re != 0.0 && newton > a && newton < b {
                newton
            } else {
                0.5 * (a + b)
            };
            let tol = 1e-11 * x.abs().max(1.0);
            if (next - x).abs() <= 1e-3 * tol || b - a <= tol {
                return next;
            }
            x = next;
        }
        x
    }

    /// Argument-principle zero count `Z = (1/2 pi i) \oint m'/m + P` in a box.
    pub fn count_zeros(&self, bx: ComplexBox) -> Result<ZeroCount> {
        let (count, _) = self.contour_with_retries(bx)?;
        Ok(count)
    }

    fn contour_with_retries(&self, bx: ComplexBox) -> Result<(ZeroCount, Complex64)> {
        let mut last = String::new();
        for attempt in 0..=5 {
            let trial = if attempt == 0 { bx } else { bx.perturbed(attempt) };
            match self.contour(trial) {
                Ok(r) => return Ok(r),
                Err(ContourIssue(msg)) => last = msg,
            }
        }
        Err(Error::Contour(format!("{last} (after 5 edge perturbations)")))
    }

    fn contour(&self, bx: ComplexBox) -> std::result::Result<(ZeroCount, Complex64), ContourIssue> {
        if bx.re.1 >= self.usable_limit() {
            return Err(ContourIssue(format!("box reaches Re {} beyond the cutoff margin", bx.re.1)));
        }
        let corners = bx.corners();
        let mut winding = Complex64::new(0.0, 0.0);
        let mut moment = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            let (z0, z1) = (corners[i], corners[(i + 1) % 4]);
            let (w, m) = self.edge_integral(z0, z1)?;
            winding += w;
            moment += m;
        }
        let two_pi_i = Complex64::new(0.0, 2.0 * std::f64::consts::PI);
        let n = winding / two_pi_i;
        let rounded = n.re.round();
        if (n.re - rounded).abs() > 0.05 || n.im.abs() > 0.05 {
            return Err(ContourIssue(format!("winding number {n} is not an integer")));
        }
        let inside: Vec<f64> = self
            .live_poles()
            .filter(|p| bx.contains(Complex64::new(p.value, 0.0)))
            .map(|p| p.value)
            .collect();
        let poles = inside.len() as i64;
        // first moment: sum of zeros minus sum of poles
        let pole_sum: f64 = inside.iter().sum();
        let zero_sum = moment / two_pi_i + pole_sum;
        Ok((
            ZeroCount {
                bx,
                count: rounded as i64 + poles,
                poles,
            },
            zero_sum,
        ))
    }

    /// `(\int m'/m, \int z m'/m)` along the segment `z0 -> z1`.
    fn edge_integral(&self, z0: Complex64, z1: Complex64) -> std::result::Result<(Complex64, Complex64), ContourIssue> {
        let dz = z1 - z0;
        let f = |t: f64| -> std::result::Result<(Complex64, Complex64), ContourIssue> {
            let z = z0 + dz * t;
            for p in self.live_poles() {
                if (z - p.value).norm() < 1e-6 {
                    return Err(ContourIssue(format!("edge passes within 1e-6 of the pole {}", p.value)));
                }
            }
            let (v, d) = self.value_and_derivative(z);
            if v.value.norm() <= v.bound.max(1e-300) {
                return Err(ContourIssue(format!("|m| = {:e} is within the tail bound on the edge at {z}", v.value.norm())));
            }
            let g = d / v.value * dz;
            Ok((g, g * z))
        };
        let mut total = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
        let mut stack = vec![(0.0f64, 1.0f64, 0usize)];
        let mut evaluations = 0usize;
        while let Some((a, b, depth)) = stack.pop() {
            let (k, g, err) = gauss_kronrod(&f, a, b)?;
            evaluations += 15;
            let scale = 1.0 + k.0.norm();
            if err <= 1e-9 * scale || depth >= 48 || (b - a) < 1e-13 {
                if depth >= 48 || (b - a) < 1e-13 {
                    if err > 1e-3 {
                        return Err(ContourIssue("edge integrand is not resolvable".into()));
                    }
                }
                total.0 += k.0;
                total.1 += k.1;
                let _ = g;
            } else {
                let c = 0.5 * (a + b);
                stack.push((c, b, depth + 1));
                stack.push((a, c, depth + 1));
            }
            if evaluations > 2_000_000 {
                return Err(ContourIssue("edge integration exceeded its evaluation budget".into()));
            }
        }
        Ok(total)
    }

    /// Zeros of `m` with positive imaginary part inside `bx`.
    pub fn complex_roots_in(&self, bx: ComplexBox) -> Result<RootReport> {
        if bx.im.0 <= 0.0 || !(bx.im.1 > bx.im.0) || !(bx.re.1 > bx.re.0) {
            return Err(Error::InvalidInput(format!(
                "complex search box must lie in the open upper half-plane, got {bx:?}"
            )));
        }
        let mut report = RootReport::default();
        let (count, zero_sum) = self.contour_with_retries(bx)?;
        self.isolate(count, zero_sum, 0, &mut report)?;
        report
            .complex_roots
            .sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
        report
            .zero_count_boxes
            .sort_by(|a, b| a.bx.re.0.total_cmp(&b.bx.re.0).then(a.bx.im.0.total_cmp(&b.bx.im.0)));
        Ok(report)
    }

    fn isolate(&self, count: ZeroCount, zero_sum: Complex64, depth: usize, out: &mut RootReport) -> Result<()> {
        out.zero_count_boxes.push(count.clone());
        let bx = count.bx;
        match count.count {
            0 => Ok(()),
            1 if count.poles == 0 => {
                let guess = if bx.expanded(0.1).contains(zero_sum) { zero_sum } else { bx.center() };
                let root = self.newton_complex(guess, bx)?;
                out.complex_roots.push(root);
                Ok(())
            }
            n if n < 0 => Err(Error::Inconsistency {
                expected: n,
                found: 0,
            }),
            n => {
                if depth > 40 || bx.width().max(bx.height()) < 1e-9 {
                    return Err(Error::Contour(format!("unresolved cluster of {n} zeros near {}", bx.center())));
                }
                let (first, second) = bx.split();
                let (a, b) = crate::join(|| self.contour_with_retries(first), || self.contour_with_retries(second));
                let (a, b) = (a?, b?);
                if a.0.count + b.0.count != n {
                    return Err(Error::Inconsistency {
                        expected: n,
                        found: (a.0.count + b.0.count).max(0) as usize,
                    });
                }
                self.isolate(a.0, a.1, depth + 1, out)?;
                self.isolate(b.0, b.1, depth + 1, out)
            }
        }
    }

    fn newton_complex(&self, guess: Complex64, bx: ComplexBox) -> Result<ComplexRoot> {
        let mut z = guess;
        let (mut v, mut d) = self.value_and_derivative(z);
        for _ in 0..200 {
            if d.norm() == 0.0 {
                break;
            }
            let step = v.value / d;
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..40 {
                let trial = z - step * scale;
                let (tv, td) = self.value_and_derivative(trial);
                if tv.value.norm() < v.value.norm() {
                    z = trial;
                    v = tv;
                    d = td;
                    accepted = true;
                    break;
                }
                scale *= 0.5;
            }
            if !accepted || (step * scale).norm() <= 1e-11 * z.norm().max(1.0) {
                break;
            }
        }
        if !bx.expanded(1e-6).contains(z) {
            return Err(Error::Inconsistency {
                expected: 1,
                found: 0,
            });
        }
        Ok(ComplexRoot {
            value: z,
            residual: v.value.norm(),
            bound: v.bound,
            derivative: d.norm(),
        })
    }
}

#[derive(Debug, Clone, Copy)]
enum End {
    Point(f64),
    Pole(f64, f64),
}

impl End {
    fn x(&self) -> f64 {
        match self {
            End::Point(x) | End::Pole(x, _) => *x,
        }
    }
}

struct ContourIssue(String);

impl From<ContourIssue> for Error {
    fn from(c: ContourIssue) -> Self {
        Error::Contour(c.0)
    }
}

const GK_NODES: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const G_WEIGHTS: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

type Pair = (Complex64, Complex64);

/// Gauss-Kronrod 7/15 on `[a, b]` for a pair of integrands; returns
/// `(kronrod, gauss, error estimate)`.
fn gauss_kronrod<F>(f: &F, a: f64, b: f64) -> std::result::Result<(Pair, Pair, f64), ContourIssue>
where
    F: Fn(f64) -> std::result::Result<Pair, ContourIssue>,
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let zero = Complex64::new(0.0, 0.0);
    let mut k = (zero, zero);
    let mut g = (zero, zero);
    for i in 0..8 {
        let x = GK_NODES[i];
        let pts: &[f64] = if i == 7 { &[0.0] } else { &[-1.0, 1.0] };
        for s in pts {
            let v = f(c + s * h * x)?;
            k.0 += v.0 * GK_WEIGHTS[i];
            k.1 += v.1 * GK_WEIGHTS[i];
            // Gauss nodes are the odd-indexed Kronrod nodes
            if i % 2 == 1 {
                let w = G_WEIGHTS[i / 2];
                g.0 += v.0 * w;
                g.1 += v.1 * w;
            }
        }
    }
    k = (k.0 * h, k.1 * h);
    g = (g.0 * h, g.1 * h);
    let err = (k.0 - g.0).norm();
    Ok((k, g, err))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexBox {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl ComplexBox {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Self {
        Self { re, im }
    }

    pub fn width(&self) -> f64 {
        self.re.1 - self.re.0
    }

    pub fn height(&self) -> f64 {
        self.im.1 - self.im.0
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re.0 + self.re.1), 0.5 * (self.im.0 + self.im.1))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re > self.re.0 && z.re < self.re.1 && z.im > self.im.0 && z.im < self.im.1
    }

    /// Counter-clockwise corners starting at the lower left.
    pub fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re.0, self.im.0),
            Complex64::new(self.re.1, self.im.0),
            Complex64::new(self.re.1, self.im.1),
            Complex64::new(self.re.0, self.im.1),
        ]
    }

    fn expanded(&self, fraction: f64) -> Self {
        let dx = fraction * self.width().max(1e-12);
        let dy = fraction * self.height().max(1e-12);
        Self::new((self.re.0 - dx, self.re.1 + dx), (self.im.0 - dy, self.im.1 + dy))
    }

    /// Deterministic small shift of every edge for the `attempt`-th retry.
    fn perturbed(&self, attempt: usize) -> Self {
        let s = if attempt % 2 == 1 { 1.0 } else { -1.0 };
        let e = 1.3e-4 * attempt as f64;
        let dx = s * e * self.width();
        let dy = s * e * self.height();
        let im0 = if self.im.0 > 0.0 {
            (self.im.0 * (1.0 - s * 7.0 * e)).max(0.5 * self.im.0)
        } else {
            self.im.0 - dy
        };
        Self::new((self.re.0 - dx, self.re.1 + 0.7 * dx), (im0, self.im.1 + dy))
    }

    fn split(&self) -> (Self, Self) {
        if self.width() >= self.height() {
            let c = 0.5 * (self.re.0 + self.re.1);
            (Self::new((self.re.0, c), self.im), Self::new((c, self.re.1), self.im))
        } else {
            let c = 0.5 * (self.im.0 + self.im.1);
            (Self::new(self.re, (self.im.0, c)), Self::new(self.re, (c, self.im.1)))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealRoot {
    pub value: f64,
    pub bracket: (f64, f64),
    /// `|m|` at the root.
    pub residual: f64,
    /// Truncation bound at the root.
    pub bound: f64,
    pub derivative: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RealScan {
    pub roots: Vec<RealRoot>,
    /// Gaps on which `|m|` never exceeds its truncation bound.
    pub undecidable: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexRoot {
    pub value: Complex64,
    pub residual: f64,
    pub bound: f64,
    /// `|m'|` at the root.
    pub derivative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCount {
    pub bx: ComplexBox,
    /// Number of zeros of `m` inside.
    pub count: i64,
    /// Live poles inside (each simple), already added back.
    pub poles: i64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RootReport {
    pub real_roots: Vec<RealRoot>,
    /// Only `Im > 0` is stored; conjugates are implied.
    pub complex_roots: Vec<ComplexRoot>,
    pub zero_count_boxes: Vec<ZeroCount>,
}
