//! Spectral enclosures for perturbations of the uniform and ground-state measures.
//!
//! * `H_k`: nonreal points with `Re z <= (lambda_k + lambda_{k+1}) / 2` carry no spectrum
//!   when `mu = mu_0 + v` and `||v|| < min_{n<=k} |(chi_n, 1)| / |Omega|`.
//! * Interlacing: under the same hypothesis each gap `(lambda_i, lambda_{i+1})`, `i < k`,
//!   holds exactly one eigenvalue.
//! * Matryoshka sets: for `mu = mu_1 + v`, every nonreal eigenvalue satisfies
//!   `dist(z, sigma(H_D)) <= t |lambda_1 - z|` with `t = |Omega|^{1/4} ||v||^{1/2}`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::basis::BasisSet;
use crate::error::{Error, Result};
use crate::measure::{BaseMeasure, HypothesisCertificate, MeasureMoments};
use crate::plot::{contour_lines, Polyline, Stroke, SvgPlot};
use crate::secular::{SecularSeries, INERT_TOL};
use crate::spectrum::SpectrumReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inapplicable,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inapplicable => "inapplicable",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ExclusionRegion {
    HalfPlane { k: usize, threshold: f64 },
    Matryoshka { t: f64 },
}

impl ExclusionRegion {
    pub fn half_plane(basis: &BasisSet, k: usize) -> Result<Self> {
        Ok(Self::HalfPlane {
            k,
            threshold: h_k_threshold(basis, k)?,
        })
    }

    /// True when `z` is certified free of spectrum by this region.
    pub fn excludes(&self, z: Complex64, dist: &DirichletDistance) -> bool {
        if z.im == 0.0 {
            return false;
        }
        match *self {
            ExclusionRegion::HalfPlane { threshold, .. } => z.re <= threshold,
            ExclusionRegion::Matryoshka { t } => dist.ratio(z) > t,
        }
    }
}

/// `(lambda_k + lambda_{k+1}) / 2`, counting eigenvalues with multiplicity.
pub fn h_k_threshold(basis: &BasisSet, k: usize) -> Result<f64> {
    if k == 0 || k >= basis.len() {
        return Err(Error::InvalidInput(format!("level k = {k} outside 1..{}", basis.len())));
    }
    Ok(0.5 * (basis.modes[k - 1].eigenvalue + basis.modes[k].eigenvalue))
}

/// Distance to the Dirichlet spectrum, using the retained eigenvalues and
/// `dist >= Lambda - Re z` for everything above the cutoff.
#[derive(Debug, Clone)]
pub struct DirichletDistance {
    eigenvalues: Vec<f64>,
    cutoff: f64,
    lambda_1: f64,
}

impl DirichletDistance {
    pub fn new(basis: &BasisSet) -> Self {
        let eigenvalues: Vec<f64> = basis.distinct_eigenvalues().into_iter().map(|(l, _)| l).collect();
        Self {
            lambda_1: eigenvalues[0],
            eigenvalues,
            cutoff: basis.cutoff,
        }
    }

    pub fn lambda_1(&self) -> f64 {
        self.lambda_1
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn distance(&self, z: Complex64) -> f64 {
        let i = self.eigenvalues.partition_point(|&l| l < z.re);
        let mut best = Complex64::new((self.cutoff - z.re).max(0.0), z.im).norm();
        for j in [i.wrapping_sub(1), i] {
            if let Some(&l) = self.eigenvalues.get(j) {
                best = best.min((z - l).norm());
            }
        }
        best
    }

    /// `dist(z, sigma(H_D)) / |lambda_1 - z|`
    pub fn ratio(&self, z: Complex64) -> f64 {
        self.distance(z) / (z - self.lambda_1).norm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub value: Complex64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm1Report {
    pub verdict: Verdict,
    pub k: usize,
    pub threshold: f64,
    pub hypothesis: HypothesisCertificate,
    pub nonreal_checked: usize,
    pub violations: Vec<Violation>,
    pub note: String,
}

fn gate(cert: &HypothesisCertificate, base: BaseMeasure) -> Option<String> {
    if cert.base != base {
        return Some(format!("hypothesis is for a {:?} base, this check needs {:?}", cert.base, base));
    }
    if cert.passed {
        return None;
    }
    let mut why = Vec::new();
    if !cert.pointwise_ok {
        why.push(format!("density dips to {:.3e}", cert.min_density));
    }
    if !cert.mean_ok {
        why.push(format!("v has mean {:.3e}", cert.mean));
    }
    if !cert.smallness_ok {
        why.push(format!("||v|| = {:.4e} is not below {:.4e}", cert.v_norm, cert.threshold));
    }
    Some(format!("hypothesis fails at k = {}: {}", cert.k, why.join("; ")))
}

/// No nonreal entry may lie in `H_k`.
pub fn check_thm1(report: &SpectrumReport, cert: &HypothesisCertificate, basis: &BasisSet) -> Result<Thm1Report> {
    let k = cert.k;
    let threshold = h_k_threshold(basis, k)?;
    let mut out = Thm1Report {
        verdict: Verdict::Inapplicable,
        k,
        threshold,
        hypothesis: cert.clone(),
        nonreal_checked: 0,
        violations: Vec::new(),
        note: String::new(),
    };
    if let Some(why) = gate(cert, BaseMeasure::Uniform) {
        out.note = why;
        return Ok(out);
    }
    for e in report.nonreal() {
        out.nonreal_checked += 1;
        if e.value.re <= threshold {
            out.violations.push(Violation {
                value: e.value,
                residual: e.residual,
            });
        }
    }
    out.verdict = if out.violations.is_empty() { Verdict::Pass } else { Verdict::Fail };
    out.note = format!(
        "{} nonreal entries checked against Re <= {threshold:.6} within Im in [{}, {}]",
        out.nonreal_checked, report.window.im.0, report.window.im.1
    );
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterlacingInterval {
    pub lo: f64,
    pub hi: f64,
    pub root_count: usize,
    pub roots: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterlacingCertificate {
    pub verdict: Verdict,
    pub k: usize,
    pub intervals: Vec<InterlacingInterval>,
    pub hypothesis_margin: f64,
    pub note: String,
}

/// First index `i` in `1..=k` whose eigenvalue is not simple.
fn first_degenerate(basis: &BasisSet, k: usize) -> Option<usize> {
    (0..k.min(basis.len())).find(|&i| {
        let l = basis.modes[i].eigenvalue;
        let before = i > 0 && crate::basis::same_eigenvalue(basis.modes[i - 1].eigenvalue, l);
        let after = i + 1 < basis.len() && crate::basis::same_eigenvalue(basis.modes[i + 1].eigenvalue, l);
        before || after
    })
}

/// One secular root in each `(lambda_i, lambda_{i+1})`, `i < k`.
pub fn check_thm2(series: &SecularSeries, basis: &BasisSet, cert: &HypothesisCertificate) -> Result<InterlacingCertificate> {
    let k = cert.k;
    let mut out = InterlacingCertificate {
        verdict: Verdict::Inapplicable,
        k,
        intervals: Vec::new(),
        hypothesis_margin: cert.margin,
        note: String::new(),
    };
    if let Some(why) = gate(cert, BaseMeasure::Uniform) {
        out.note = why;
        return Ok(out);
    }
    if let Some(i) = first_degenerate(basis, k) {
        out.note = format!("lambda_{} = {:.6} is not simple", i + 1, basis.modes[i].eigenvalue);
        return Ok(out);
    }
    for i in 0..k - 1 {
        let lo = basis.modes[i].eigenvalue;
        let hi = basis.modes[i + 1].eigenvalue;
        let d = 1e-9 * (1.0 + hi);
        let roots: Vec<f64> = series.real_roots_in(lo + d, hi - d)?.into_iter().map(|r| r.value).collect();
        out.intervals.push(InterlacingInterval {
            lo,
            hi,
            root_count: roots.len(),
            roots,
        });
    }
    let ok = out.intervals.iter().all(|iv| iv.root_count == 1);
    out.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
    out.note = if k == 1 {
        "k = 1: no gaps to check".into()
    } else {
        format!("{} gaps checked", k - 1)
    };
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm3Entry {
    pub value: Complex64,
    pub ratio: f64,
    /// `t - ratio`
    pub margin: f64,
    pub in_h1: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thm3Report {
    pub verdict: Verdict,
    pub t: f64,
    pub hypothesis: HypothesisCertificate,
    pub entries: Vec<Thm3Entry>,
    pub note: String,
}

/// Every nonreal entry lies in the matryoshka set and outside `H_1`.
pub fn check_thm3(report: &SpectrumReport, cert: &HypothesisCertificate, basis: &BasisSet) -> Result<Thm3Report> {
    let t = basis.domain.area.powf(0.25) * cert.v_norm.abs().sqrt();
    let mut out = Thm3Report {
        verdict: Verdict::Inapplicable,
        t,
        hypothesis: cert.clone(),
        entries: Vec::new(),
        note: String::new(),
    };
    if let Some(why) = gate(cert, BaseMeasure::GroundState) {
        out.note = why;
        return Ok(out);
    }
    let dist = DirichletDistance::new(basis);
    let h1 = h_k_threshold(basis, 1)?;
    let mut ok = true;
    for e in report.nonreal() {
        let ratio = dist.ratio(e.value);
        let in_h1 = e.value.re <= h1;
        ok &= ratio <= t && !in_h1;
        out.entries.push(Thm3Entry {
            value: e.value,
            ratio,
            margin: t - ratio,
            in_h1,
        });
    }
    out.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
    out.note = format!("{} nonreal entries checked at t = {t:.6}", out.entries.len());
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropRealReport {
    pub verdict: Verdict,
    pub lambda1_mu: Option<f64>,
    pub interval: (f64, f64),
    /// `|alpha_1 / (lambda_1 - x) + alpha_2 / (lambda_2 - x)|` at the root.
    pub lhs: f64,
    /// `|Omega|^{1/2} ||w|| / (lambda_3 - lambda_2)`
    pub rhs: f64,
    pub slack: f64,
    pub note: String,
}

/// Locates `lambda_1(mu)` in `(lambda_1, lambda_2)` and checks the two-term bound there.
pub fn bound_lambda1(
    report: &SpectrumReport,
    series: &SecularSeries,
    basis: &BasisSet,
    moments: &MeasureMoments,
    cert: &HypothesisCertificate,
) -> Result<PropRealReport> {
    let l = |i: usize| basis.modes[i].eigenvalue;
    let mut out = PropRealReport {
        verdict: Verdict::Inapplicable,
        lambda1_mu: None,
        interval: (l(0), l(1)),
        lhs: f64::NAN,
        rhs: f64::NAN,
        slack: f64::NAN,
        note: String::new(),
    };
    if let Some(why) = gate(cert, BaseMeasure::Uniform) {
        out.note = why;
        return Ok(out);
    }
    if cert.k < 2 {
        out.note = format!("needs the hypothesis at k = 2, certificate is for k = {}", cert.k);
        return Ok(out);
    }
    if let Some(i) = first_degenerate(basis, 2) {
        out.note = format!("lambda_{} is not simple", i + 1);
        return Ok(out);
    }
    let Some(w) = moments.l2_density_norm else {
        return Err(Error::UnsupportedMeasure(moments.spec.name().into()));
    };
    let d = 1e-9 * (1.0 + l(1));
    let roots = series.real_roots_in(l(0) + d, l(1) - d)?;
    let alpha = |i: usize| basis.modes[i].one_coeff * moments.moments[i];
    out.rhs = basis.domain.area.sqrt() * w / (l(2) - l(1));
    let Some(root) = roots.first().map(|r| r.value) else {
        out.verdict = Verdict::Fail;
        out.note = "no secular root in (lambda_1, lambda_2)".into();
        return Ok(out);
    };
    out.lambda1_mu = Some(root);
    out.lhs = (alpha(0) / (l(0) - root) + alpha(1) / (l(1) - root)).abs();
    out.slack = out.rhs - out.lhs;
    let reported = report.lambda1_mu;
    let agrees = reported.is_some_and(|x| (x - root).abs() <= 1e-8 * root);
    out.verdict = if roots.len() == 1 && out.slack >= 0.0 && agrees {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    out.note = if agrees {
        format!("{} root(s) in the gap; slack {:.3e}", roots.len(), out.slack)
    } else {
        format!("spectrum reports lambda_1(mu) = {reported:?}, the gap root is {root}")
    };
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct XiFlag {
    pub all_nonnegative: bool,
    pub all_nonpositive: bool,
}

/// Sign pattern of the residues `alpha_n`, `n >= 2` (informational).
pub fn xi_flag(basis: &BasisSet, moments: &MeasureMoments) -> XiFlag {
    let mut flag = XiFlag {
        all_nonnegative: true,
        all_nonpositive: true,
    };
    for (m, p) in basis.modes.iter().zip(&moments.moments).skip(1) {
        let a = m.one_coeff * p;
        if a.abs() < INERT_TOL {
            continue;
        }
        flag.all_nonnegative &= a > 0.0;
        flag.all_nonpositive &= a < 0.0;
    }
    flag
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlotGrid {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub nx: usize,
    pub ny: usize,
}

impl Default for PlotGrid {
    fn default() -> Self {
        Self {
            re: (0.0, 60.0),
            im: (-15.0, 15.0),
            nx: 600,
            ny: 300,
        }
    }
}

impl PlotGrid {
    pub fn xs(&self) -> Vec<f64> {
        linspace(self.re, self.nx)
    }

    pub fn ys(&self) -> Vec<f64> {
        linspace(self.im, self.ny)
    }
}

fn linspace(r: (f64, f64), n: usize) -> Vec<f64> {
    (0..n).map(|i| r.0 + (r.1 - r.0) * i as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatryoshkaCurve {
    pub threshold: f64,
    pub polylines: Vec<Polyline>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatryoshkaPlot {
    pub grid: PlotGrid,
    pub thresholds: Vec<f64>,
    pub curves: Vec<MatryoshkaCurve>,
    /// Dirichlet eigenvalues inside the plotted real range.
    pub eigenvalues: Vec<f64>,
    pub lambda_1: f64,
    /// For each displayed eigenvalue, whether it sits inside the set at each threshold.
    pub enclosed: Vec<Vec<bool>>,
    pub nesting_points: usize,
    pub nesting_violations: usize,
}

/// Figure styles: blue solid, red dotted, green dash-dot, gray dashed.
pub fn threshold_style(index: usize) -> Stroke {
    match index % 4 {
        0 => Stroke::new("#1f4fd6", 1.6, None),
        1 => Stroke::new("#d62728", 1.6, Some("2 3")),
        2 => Stroke::new("#2ca02c", 1.6, Some("8 3 2 3")),
        _ => Stroke::new("#7f7f7f", 1.6, Some("6 4")),
    }
}

/// Level sets `dist(z, sigma(H_D)) = t |lambda_1 - z|` on a grid, with the nesting check.
pub fn emit_matryoshka_curves(basis: &BasisSet, thresholds: &[f64], grid: PlotGrid) -> Result<MatryoshkaPlot> {
    if grid.nx < 2 || grid.ny < 2 {
        return Err(Error::InvalidInput("plot grid needs at least 2 x 2 points".into()));
    }
    if thresholds.iter().any(|t| !(*t >= 0.0)) {
        return Err(Error::InvalidInput("thresholds must be nonnegative".into()));
    }
    let dist = DirichletDistance::new(basis);
    let xs = grid.xs();
    let ys = grid.ys();
    let field: Vec<f64> = crate::par_map(ys.len(), |j| {
        xs.iter().map(|&x| dist.ratio(Complex64::new(x, ys[j]))).collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();

    let mut sorted = thresholds.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut violations = 0;
    for r in &field {
        for w in sorted.windows(2) {
            if *r <= w[0] && *r > w[1] {
                violations += 1;
            }
        }
    }
    let curves = thresholds
        .iter()
        .map(|&t| MatryoshkaCurve {
            threshold: t,
            polylines: contour_lines(&field, &xs, &ys, t),
        })
        .collect();
    let eigenvalues: Vec<f64> = dist
        .eigenvalues()
        .iter()
        .copied()
        .filter(|l| *l >= grid.re.0 && *l <= grid.re.1)
        .collect();
    let enclosed = eigenvalues
        .iter()
        .map(|&l| {
            let probe = Complex64::new(l, 1e-6);
            thresholds.iter().map(|&t| dist.ratio(probe) <= t).collect()
        })
        .collect();
    Ok(MatryoshkaPlot {
        grid,
        thresholds: thresholds.to_vec(),
        curves,
        eigenvalues,
        lambda_1: dist.lambda_1(),
        enclosed,
        nesting_points: field.len(),
        nesting_violations: violations,
    })
}

impl MatryoshkaPlot {
    pub fn nesting_holds(&self) -> bool {
        self.nesting_violations == 0
    }

    /// `curve_id,re,im` with ids `t=<threshold>/<polyline>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("curve_id,re,im\n");
        for c in &self.curves {
            for (k, line) in c.polylines.iter().enumerate() {
                for p in line {
                    let _ = writeln!(out, "t={}/{k},{:.6},{:.6}", c.threshold, p[0], p[1]);
                }
            }
        }
        out
    }

    pub fn to_svg(&self) -> String {
        let mut svg = SvgPlot::new(960.0, 540.0, self.grid.re, self.grid.im);
        svg.axes(6, "Re λ", "Im λ");
        let mut legend = Vec::new();
        for (i, c) in self.curves.iter().enumerate() {
            let style = threshold_style(i);
            for line in &c.polylines {
                svg.polyline(line, &style);
            }
            legend.push((style, format!("t = {}", c.threshold)));
        }
        for &l in &self.eigenvalues {
            svg.dot([l, 0.0], 3.0, "black");
        }
        svg.legend(&legend);
        svg.render()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::domain::DomainSpec;

    fn disk() -> BasisSet {
        build_basis(DomainSpec::unit_disk(), 200.0).unwrap()
    }

    #[test]
    fn h_thresholds() {
        let b = disk();
        let h1 = h_k_threshold(&b, 1).unwrap();
        assert!((h1 - 0.5 * (5.783185962946784 + 14.681970642123893)).abs() < 1e-9);
        assert!((h1 - 10.2326).abs() < 1e-4);
        // H_k grows with k
        let mut prev = h1;
        for k in 2..10 {
            let h = h_k_threshold(&b, k).unwrap();
            assert!(h >= prev);
            prev = h;
        }
        assert!(h_k_threshold(&b, 0).is_err());
    }

    #[test]
    fn matryoshka_membership_probe() {
        let d = DirichletDistance::new(&disk());
        let z = Complex64::new(20.0, 5.0);
        let far = (z - d.lambda_1()).norm();
        assert!((far - 15.0704).abs() < 1e-4);
        // Im z alone already gives ratio >= 0.33
        assert!((z.im / far - 0.3318).abs() < 1e-4);
        let r = d.ratio(z);
        assert!((r - 7.299413418298223 / far).abs() < 1e-9, "{r}");
        assert!(ExclusionRegion::Matryoshka { t: 0.1 }.excludes(z, &d));
        assert!(!ExclusionRegion::Matryoshka { t: 0.5 }.excludes(z, &d));
        assert!(!ExclusionRegion::Matryoshka { t: 0.1 }.excludes(Complex64::new(20.0, 0.0), &d));
    }

    #[test]
    fn distance_matches_brute_force() {
        let b = disk();
        let d = DirichletDistance::new(&b);
        for z in [Complex64::new(-3.0, 1.0), Complex64::new(33.3, -2.0), Complex64::new(199.0, 0.5), Complex64::new(14.68, 0.0)] {
            assert!((d.distance(z) - b.distance_to_spectrum(z.re, z.im)).abs() < 1e-12);
        }
    }

    #[test]
    fn figure_curves_nest_and_enclose() {
        let b = disk();
        let grid = PlotGrid {
            nx: 300,
            ny: 150,
            ..PlotGrid::default()
        };
        let plot = emit_matryoshka_curves(&b, &[0.1, 0.2, 0.3, 0.4], grid).unwrap();
        assert!(plot.nesting_holds());
        assert_eq!(plot.nesting_points, 300 * 150);
        for (l, enc) in plot.eigenvalues.iter().zip(&plot.enclosed) {
            let is_first = (l - plot.lambda_1).abs() < 1e-9;
            assert!(enc.iter().all(|e| *e != is_first), "{l}: {enc:?}");
        }
        // near lambda_2 the t = 0.1 curve stays within the triangle-inequality radius
        let l2 = 14.681970642123893;
        let radius = 0.1 * (l2 - plot.lambda_1) / 0.9;
        for line in &plot.curves[0].polylines {
            for p in line {
                let dz = Complex64::new(p[0] - l2, p[1]).norm();
                if dz < 3.0 {
                    assert!(dz <= radius + 0.02, "{dz} > {radius}");
                }
            }
        }
        let svg = plot.to_svg();
        assert!(svg.contains("t = 0.4"));
        assert!(plot.to_csv().lines().count() > 100);
    }

    #[test]
    fn zero_threshold_curves_collapse() {
        let b = disk();
        let grid = PlotGrid {
            nx: 120,
            ny: 60,
            ..PlotGrid::default()
        };
        let plot = emit_matryoshka_curves(&b, &[0.0], grid).unwrap();
        assert!(plot.curves[0].polylines.is_empty());
    }
}
