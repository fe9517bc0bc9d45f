//! Assembly of the spectrum: kernel, secular zeros and Dirichlet eigenvalues.
//!
//! Away from the Dirichlet spectrum the eigenvalues are the zeros of `m`, each
//! with eigenfunction `lambda R_D(lambda) 1 + 1`. At a Dirichlet eigenvalue
//! `lambda_j` with eigenspace `E` the eigen-equation splits along `E` and its
//! complement. Writing `q` and `p` for the vectors of `(1, chi)` and `<chi>_mu`
//! over an orthonormal basis of `E` (dimension `r`):
//!
//! * if `q != 0` the constant part must vanish and the eigenfunctions are the
//!   `g in E` with `<g>_mu = 0`, a space of dimension `r - rank p`;
//! * if `q = 0` they are `c (lambda_j R 1 + 1) + g` with `R` the reduced
//!   resolvent, subject to `<g>_mu + c lambda_j m~(lambda_j) = 0`, where `m~` omits
//!   the cluster. The dimension is `r + 1 - rank [p, lambda_j m~]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::basis::BasisSet;
use crate::error::{Error, Result};
use crate::measure::{MeasureKind, MeasureMoments};
use crate::plot::{Stroke, SvgPlot};
use crate::resolvent::{norm, KreinModel, SpectralVector};
use crate::secular::{ComplexBox, SecularSeries};

/// Norms of `q` or `p` below this count as zero.
pub const ZERO_TOL: f64 = 1e-9;
/// Norms between `ZERO_TOL` and this are too close to call.
pub const AMBIGUOUS_TOL: f64 = 1e-6;
/// Secular roots this close to a Dirichlet eigenvalue are left to the cluster analysis.
pub const MERGE_TOL: f64 = 1e-8;
/// Relative residual accepted for eigenfunctions.
pub const EIGEN_TOL: f64 = 1e-8;
/// Lower imaginary edge of the complex search.
pub const IM_FLOOR: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    KernelZero,
    SecularRoot,
    EmbeddedDirichlet,
    UndeterminedDirichlet,
}

impl EntryKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EntryKind::KernelZero => "kernel_zero",
            EntryKind::SecularRoot => "secular_root",
            EntryKind::EmbeddedDirichlet => "embedded_dirichlet",
            EntryKind::UndeterminedDirichlet => "undetermined_dirichlet",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub value: Complex64,
    pub kind: EntryKind,
    /// Geometric multiplicity, `None` when it cannot be pinned down.
    pub multiplicity: Option<usize>,
    pub residual: f64,
    pub certificate: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExcludedDirichlet {
    pub value: f64,
    pub cluster_size: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub window: ComplexBox,
    pub entries: Vec<SpectrumEntry>,
    /// Dirichlet eigenvalues in the window shown not to be eigenvalues.
    pub excluded: Vec<ExcludedDirichlet>,
    /// Smallest real part of a nonzero entry in the window.
    pub lambda1_mu: Option<f64>,
    pub window_limited: bool,
    pub heuristic_tail: bool,
    /// Real gaps where `|m|` never cleared its truncation bound.
    pub undecidable_gaps: Vec<(f64, f64)>,
    pub conditioning_warnings: Vec<f64>,
}

impl SpectrumReport {
    pub fn nonreal(&self) -> impl Iterator<Item = &SpectrumEntry> {
        self.entries.iter().filter(|e| e.value.im != 0.0)
    }

    pub fn secular_real_roots(&self) -> Vec<f64> {
        self.entries
            .iter()
            .filter(|e| e.kind == EntryKind::SecularRoot && e.value.im == 0.0)
            .map(|e| e.value.re)
            .collect()
    }

    /// `value_re,value_im,kind,multiplicity,residual`
    pub fn to_csv(&self) -> String {
        let mut out = String::from("value_re,value_im,kind,multiplicity,residual\n");
        for e in &self.entries {
            let mult = e.multiplicity.map(|m| m.to_string()).unwrap_or_else(|| "unknown".into());
            let _ = writeln!(
                out,
                "{:.12e},{:.12e},{},{},{:.3e}",
                e.value.re,
                e.value.im,
                e.kind.as_str(),
                mult,
                e.residual
            );
        }
        out
    }

    /// Spectral points in the window over grey marks at the Dirichlet eigenvalues.
    pub fn to_svg(&self, dirichlet: &[f64]) -> String {
        let w = self.window;
        let mut svg = SvgPlot::new(960.0, 540.0, w.re, w.im);
        svg.axes(6, "Re λ", "Im λ");
        for &l in dirichlet.iter().filter(|l| **l >= w.re.0 && **l <= w.re.1) {
            svg.dot([l, 0.0], 4.5, "#bbbbbb");
        }
        for e in &self.entries {
            let color = match e.kind {
                EntryKind::KernelZero => "black",
                EntryKind::SecularRoot => "#1f4fd6",
                EntryKind::EmbeddedDirichlet => "#2ca02c",
                EntryKind::UndeterminedDirichlet => "#d62728",
            };
            svg.dot([e.value.re, e.value.im], 3.0, color);
        }
        svg.legend(&[
            (Stroke::new("#bbbbbb", 4.0, None), "Dirichlet".into()),
            (Stroke::new("#1f4fd6", 4.0, None), "secular root".into()),
            (Stroke::new("#2ca02c", 4.0, None), "embedded".into()),
            (Stroke::new("#d62728", 4.0, None), "undetermined".into()),
        ]);
        svg.render()
    }

    /// Structural checks: single kernel zero, conjugate closure, location.
    pub fn invariant_violations(&self, lambda_1: f64) -> Vec<String> {
        let mut out = Vec::new();
        let zeros = self.entries.iter().filter(|e| e.kind == EntryKind::KernelZero).count();
        let window_has_zero = self.window.re.0 <= 0.0 && self.window.re.1 >= 0.0;
        if window_has_zero && zeros != 1 {
            out.push(format!("kernel zero appears {zeros} times"));
        }
        for e in &self.entries {
            if e.kind == EntryKind::KernelZero {
                continue;
            }
            if e.value.re < 0.0 {
                out.push(format!("entry {} has negative real part", e.value));
            }
            if e.value.re.abs() < 1e-12 {
                out.push(format!("entry {} lies on the imaginary axis", e.value));
            }
            if e.value.im == 0.0 && e.value.re < lambda_1 * (1.0 - 1e-12) {
                out.push(format!("real entry {} lies below the first Dirichlet eigenvalue", e.value.re));
            }
            if e.value.im != 0.0 {
                let conj = e.value.conj();
                let mirrored = self.window.im.0 <= conj.im && conj.im <= self.window.im.1;
                let paired = self
                    .entries
                    .iter()
                    .any(|o| (o.value - conj).norm() <= 1e-9 * conj.norm().max(1.0) && o.multiplicity == e.multiplicity);
                if mirrored && !paired {
                    out.push(format!("entry {} has no conjugate partner", e.value));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenFunction {
    pub lambda: Complex64,
    pub vector: SpectralVector,
    /// True when `u = lambda R_D(lambda) 1 + 1`.
    pub resolvent_family: bool,
    /// Relative residual of the eigen-equation, boundary defect included.
    pub residual: f64,
}

fn dirichlet_gap(basis: &BasisSet, z: Complex64) -> f64 {
    basis
        .modes
        .iter()
        .map(|m| (z - m.eigenvalue).norm())
        .fold(f64::INFINITY, f64::min)
}

/// `lambda R_D(lambda) 1 + 1` at a secular root, verified against `H_mu`.
pub fn eigenfunction_at(
    lambda: Complex64,
    series: &SecularSeries,
    basis: &BasisSet,
    moments: &MeasureMoments,
) -> Result<EigenFunction> {
    if lambda.norm() == 0.0 {
        return Err(Error::InvalidInput("the eigenfunction at 0 is the constant".into()));
    }
    let gap = dirichlet_gap(basis, lambda);
    if gap < MERGE_TOL {
        return Err(Error::Conditioning(format!(
            "{lambda} is within {gap:e} of a Dirichlet eigenvalue"
        )));
    }
    let m = series.eval_anchored(lambda)?;
    let coeffs: Vec<Complex64> = basis
        .modes
        .iter()
        .map(|md| lambda * md.one_coeff / (md.eigenvalue - lambda))
        .collect();
    let retained: Complex64 = coeffs.iter().zip(&moments.moments).map(|(c, p)| c * p).sum();
    let vector = SpectralVector {
        coeffs,
        constant_part: Complex64::new(1.0, 0.0),
        tail_functional: lambda * m.value - retained,
    };
    let model = KreinModel::new(basis, moments, series);
    let residual = eigen_residual(&model, lambda, &vector)?;
    Ok(EigenFunction {
        lambda,
        vector,
        resolvent_family: true,
        residual,
    })
}

fn eigen_residual(model: &KreinModel, lambda: Complex64, u: &SpectralVector) -> Result<f64> {
    let h = model.apply_hmu(u)?;
    let ul2 = u.l2_coeffs(model.one_coeffs());
    let scale = norm(&ul2);
    let r: Vec<Complex64> = h.coeffs.iter().zip(&ul2).map(|(a, b)| a - lambda * b).collect();
    let boundary = model.functional(u).norm();
    Ok(norm(&r).max(boundary) / scale)
}

/// `|Rayleigh(u) - lambda| / |lambda|` with
/// `Rayleigh(u) = \int |grad u|^2 / (\int |u|^2 - |\int u|^2 / |Omega|)`, uniform measure only.
///
/// Quadrature acts on the retained modes. For `u = lambda R_D(lambda) 1 + 1` the
/// dropped modes are added through the torsion moments `\int T` and `\int T^2`.
pub fn rayleigh_identity_check(u: &EigenFunction, lambda: f64, basis: &BasisSet, moments: &MeasureMoments) -> Result<f64> {
    if !matches!(moments.spec.kind, MeasureKind::Uniform) {
        return Err(Error::InvalidInput("the Rayleigh identity holds for the uniform measure".into()));
    }
    let coeffs: Vec<f64> = u.vector.coeffs.iter().map(|c| c.re).collect();
    let c = u.vector.constant_part.re;
    let q = &basis.quadrature;
    let values = basis.synthesize(&coeffs);
    let (g1, g2) = basis.synthesize_gradient(&coeffs);
    let mut grad = q.integrate_samples(&g1.iter().zip(&g2).map(|(a, b)| a * a + b * b).collect::<Vec<_>>());
    let mut sq = q.integrate_samples(&values.iter().map(|v| (v + c) * (v + c)).collect::<Vec<_>>());
    let mut mean = q.integrate_samples(&values.iter().map(|v| v + c).collect::<Vec<_>>());
    if u.resolvent_family {
        let l = u.lambda.re;
        let domain = &basis.domain;
        let s1 = domain.torsion_integral() - basis.modes.iter().map(|m| m.one_coeff.powi(2) / m.eigenvalue).sum::<f64>();
        let s2 = domain.torsion_l2_squared()
            - basis.modes.iter().map(|m| (m.one_coeff / m.eigenvalue).powi(2)).sum::<f64>();
        // tail sums of c_n q_n, c_n^2 and lambda_n c_n^2 for c_n = l c q_n / (lambda_n - l)
        let cross = l * c * (s1 + l * s2);
        mean += cross;
        sq += 2.0 * c * cross + l * l * c * c * s2;
        grad += l * l * c * c * (s1 + 2.0 * l * s2);
    }
    let den = sq - mean * mean / basis.domain.area;
    if den < 1e-12 {
        return Err(Error::Degenerate(format!("Rayleigh denominator {den:e} vanishes (u is constant)")));
    }
    let value = grad / den;
    Ok((value - lambda).abs() / lambda.abs().max(f64::MIN_POSITIVE))
}

/// `(|Im m(z)| / Im z, tolerance)`: at a nonreal zero `sum alpha_j / |lambda_j - z|^2` must vanish.
pub fn necessary_condition(series: &SecularSeries, z: Complex64) -> Result<(f64, f64)> {
    let v = series.eval(z)?;
    let im = z.im.abs();
    Ok((v.value.im.abs() / im, (v.bound + v.value.norm()) / im))
}

enum Cluster {
    Embedded { multiplicity: Option<usize>, u: SpectralVector, note: String },
    Undetermined(String),
    Excluded(String),
}

fn classify_cluster(
    range: std::ops::Range<usize>,
    series: &SecularSeries,
    basis: &BasisSet,
    moments: &MeasureMoments,
) -> Result<Cluster> {
    let lj = basis.modes[range.start].eigenvalue;
    let r = range.len();
    let q: Vec<f64> = basis.modes[range.clone()].iter().map(|m| m.one_coeff).collect();
    let p: Vec<f64> = moments.moments[range.clone()].to_vec();
    let qn = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let pn = p.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ambiguous = |x: f64| x > ZERO_TOL && x < AMBIGUOUS_TOL;
    if ambiguous(qn) || ambiguous(pn) {
        return Ok(Cluster::Undetermined(format!(
            "|q| = {qn:.3e}, |p| = {pn:.3e} are too close to zero to classify"
        )));
    }
    let zero = Complex64::new(0.0, 0.0);
    let n = basis.len();
    // a unit vector of the eigenspace orthogonal to p (needs r >= 2 when p != 0)
    let orthogonal_to_p = || -> Vec<f64> {
        if pn <= ZERO_TOL {
            let mut e = vec![0.0; r];
            e[0] = 1.0;
            return e;
        }
        let k = (0..r).min_by(|&a, &b| p[a].abs().total_cmp(&p[b].abs())).unwrap();
        let mut e: Vec<f64> = (0..r).map(|i| -p[k] * p[i] / (pn * pn)).collect();
        e[k] += 1.0;
        let s = e.iter().map(|v| v * v).sum::<f64>().sqrt();
        e.iter().map(|v| v / s).collect()
    };
    let embed = |a: &[f64], c: Complex64, reduced: Option<(Complex64, Complex64)>| -> SpectralVector {
        let mut coeffs = vec![zero; n];
        if reduced.is_some() {
            for (i, md) in basis.modes.iter().enumerate() {
                if !range.contains(&i) {
                    coeffs[i] = c * lj * md.one_coeff / (md.eigenvalue - lj);
                }
            }
        }
        for (i, ai) in a.iter().enumerate() {
            coeffs[range.start + i] += Complex64::new(*ai, 0.0);
        }
        let tail = reduced.map(|(model, anch)| c * lj * (anch - model)).unwrap_or(zero);
        SpectralVector {
            coeffs,
            constant_part: c,
            tail_functional: tail,
        }
    };

    if qn > ZERO_TOL {
        let dim = if pn <= ZERO_TOL { r } else { r - 1 };
        if dim == 0 {
            return Ok(Cluster::Excluded(format!(
                "(1, chi) and <chi>_mu are both nonzero on this simple eigenvalue; the constant part must vanish and no eigenvector has zero mean (|q| = {qn:.3e}, |p| = {pn:.3e})"
            )));
        }
        let g = orthogonal_to_p();
        return Ok(Cluster::Embedded {
            multiplicity: Some(dim),
            u: embed(&g, zero, None),
            note: format!("(1, chi) != 0 forces c = 0; {dim} eigenvectors with <g>_mu = 0"),
        });
    }

    // q = 0: the reduced secular value decides whether the constant part can be used
    let m_anch = series.eval_anchored(Complex64::new(lj, 0.0))?;
    let m_model: Complex64 = basis
        .modes
        .iter()
        .zip(&moments.moments)
        .enumerate()
        .filter(|(i, _)| !range.contains(i))
        .map(|(_, (md, pm))| Complex64::new(md.one_coeff * pm, 0.0) / (md.eigenvalue - lj))
        .sum();
    let reduced = Some((m_model, m_anch.value));
    if pn > ZERO_TOL {
        // rank [p, lambda m~] = 1, so dimension r; take c = 1 and solve <g>_mu = -lambda m~
        let shift = -(lj * m_anch.value.re) / (pn * pn);
        let a: Vec<f64> = p.iter().map(|v| shift * v).collect();
        return Ok(Cluster::Embedded {
            multiplicity: Some(r),
            u: embed(&a, Complex64::new(1.0, 0.0), reduced),
            note: format!("(1, chi) = 0 and |<chi>_mu| = {pn:.3e}; {r} eigenvectors including one with a constant part"),
        });
    }
    let certain = m_anch.value.norm() > m_anch.bound.max(ZERO_TOL);
    let g = orthogonal_to_p();
    Ok(Cluster::Embedded {
        multiplicity: if certain { Some(r) } else { None },
        u: embed(&g, zero, None),
        note: if certain {
            format!("(1, chi) = 0 and <chi>_mu = 0 on the eigenspace; reduced m = {:.3e} != 0", m_anch.value.re)
        } else {
            format!(
                "(1, chi) = 0 and <chi>_mu = 0; reduced m = {:.3e} within its bound {:.1e}, multiplicity {r} or {}",
                m_anch.value.re,
                m_anch.bound,
                r + 1
            )
        },
    })
}

/// Collects every spectral point of `H_mu` in `window` that the data can certify.
pub fn assemble_spectrum(
    series: &SecularSeries,
    basis: &BasisSet,
    moments: &MeasureMoments,
    window: ComplexBox,
) -> Result<SpectrumReport> {
    if !(window.re.0 < window.re.1 && window.im.0 <= window.im.1) {
        return Err(Error::InvalidInput(format!("empty window {window:?}")));
    }
    if window.re.1 >= series.usable_limit() {
        return Err(Error::CutoffExceeded {
            re: window.re.1,
            cutoff: series.cutoff,
            margin: series.margin,
        });
    }
    let model = KreinModel::new(basis, moments, series);
    let mut entries = Vec::new();
    let mut excluded = Vec::new();
    let mut undecidable = Vec::new();
    let real_axis = window.im.0 <= 0.0 && window.im.1 >= 0.0;
    let mut roots: Vec<crate::secular::RealRoot> = Vec::new();

    if real_axis && window.re.0 <= 0.0 && window.re.1 >= 0.0 {
        entries.push(SpectrumEntry {
            value: Complex64::new(0.0, 0.0),
            kind: EntryKind::KernelZero,
            multiplicity: Some(1),
            residual: 0.0,
            certificate: "kernel spanned by the constant function".into(),
        });
    }

    if real_axis {
        let nudge = |x: f64, dir: f64| -> f64 {
            let close = series.live_poles().any(|p| (p.value - x).abs() < 1e-9 * (1.0 + x.abs()));
            if close {
                x + dir * 1e-7 * (1.0 + x.abs())
            } else {
                x
            }
        };
        let scan = series.scan_real(nudge(window.re.0, 1.0), nudge(window.re.1, -1.0))?;
        undecidable = scan.undecidable;
        roots = scan
            .roots
            .into_iter()
            .filter(|r| r.value.abs() >= 1e-10 && dirichlet_gap(basis, Complex64::new(r.value, 0.0)) >= MERGE_TOL)
            .collect();
        for range in basis.clusters() {
            let lj = basis.modes[range.start].eigenvalue;
            if lj < window.re.0 || lj > window.re.1 {
                continue;
            }
            let size = range.len();
            match classify_cluster(range, series, basis, moments)? {
                Cluster::Embedded { multiplicity, u, mut note } => {
                    let z = Complex64::new(lj, 0.0);
                    if multiplicity.is_none() {
                        // a secular root within its own uncertainty of lambda_j is the
                        // candidate extra eigenvector, not a separate eigenvalue
                        roots.retain(|r| {
                            let spread = (r.bound / r.derivative.abs()).max(MERGE_TOL);
                            let merge = (r.value - lj).abs() <= spread;
                            if merge {
                                let _ = write!(note, "; absorbs the secular root at {:.10} (uncertainty {spread:.1e})", r.value);
                            }
                            !merge
                        });
                    }
                    let residual = eigen_residual(&model, z, &u)?;
                    entries.push(SpectrumEntry {
                        value: z,
                        kind: EntryKind::EmbeddedDirichlet,
                        multiplicity,
                        residual,
                        certificate: note,
                    });
                }
                Cluster::Undetermined(note) => entries.push(SpectrumEntry {
                    value: Complex64::new(lj, 0.0),
                    kind: EntryKind::UndeterminedDirichlet,
                    multiplicity: None,
                    residual: f64::NAN,
                    certificate: note,
                }),
                Cluster::Excluded(reason) => excluded.push(ExcludedDirichlet {
                    value: lj,
                    cluster_size: size,
                    reason,
                }),
            }
        }
    }

    for root in roots {
        let z = Complex64::new(root.value, 0.0);
        let ef = eigenfunction_at(z, series, basis, moments)?;
        entries.push(SpectrumEntry {
            value: z,
            kind: EntryKind::SecularRoot,
            multiplicity: Some(1),
            residual: ef.residual,
            certificate: format!(
                "sign change of m on [{:.10}, {:.10}]; |m| = {:.1e}, truncation bound {:.1e}",
                root.bracket.0, root.bracket.1, root.residual, root.bound
            ),
        });
    }

    let im_top = window.im.1.max(-window.im.0);
    if im_top > IM_FLOOR {
        let bx = ComplexBox::new(window.re, (IM_FLOOR, im_top));
        let report = series.complex_roots_in(bx)?;
        for root in report.complex_roots {
            let ef = eigenfunction_at(root.value, series, basis, moments)?;
            for z in [root.value, root.value.conj()] {
                if z.im < window.im.0 || z.im > window.im.1 {
                    continue;
                }
                entries.push(SpectrumEntry {
                    value: z,
                    kind: EntryKind::SecularRoot,
                    multiplicity: Some(1),
                    residual: ef.residual,
                    certificate: format!(
                        "argument principle isolated; |m| = {:.1e}, truncation bound {:.1e}",
                        root.residual, root.bound
                    ),
                });
            }
        }
    }

    entries.sort_by(|a, b| a.value.re.total_cmp(&b.value.re).then(a.value.im.total_cmp(&b.value.im)));
    let lambda1_mu = entries
        .iter()
        .filter(|e| matches!(e.kind, EntryKind::SecularRoot | EntryKind::EmbeddedDirichlet))
        .map(|e| e.value.re)
        .fold(None, |acc: Option<f64>, x| Some(acc.map_or(x, |a| a.min(x))));
    Ok(SpectrumReport {
        window,
        entries,
        excluded,
        lambda1_mu,
        window_limited: true,
        heuristic_tail: series.heuristic_tail(),
        undecidable_gaps: undecidable,
        conditioning_warnings: series.conditioning_warnings.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::domain::DomainSpec;
    use crate::measure::{compute_moments, MeasureSpec};

    struct Setup {
        basis: BasisSet,
        moments: MeasureMoments,
        series: SecularSeries,
    }

    fn setup(domain: DomainSpec, spec: MeasureSpec, cutoff: f64) -> Setup {
        let basis = build_basis(domain, cutoff).unwrap();
        let moments = compute_moments(&spec, &basis).unwrap();
        let series = SecularSeries::new(&basis, &moments);
        Setup { basis, moments, series }
    }

    fn window() -> ComplexBox {
        ComplexBox::new((-1.0, 31.0), (-15.0, 15.0))
    }

    #[test]
    fn ground_state_spectrum_is_the_shifted_dirichlet_spectrum() {
        let s = setup(DomainSpec::unit_disk(), MeasureSpec::ground_state(), 400.0);
        let r = assemble_spectrum(&s.series, &s.basis, &s.moments, window()).unwrap();
        let values: Vec<(f64, Option<usize>)> = r.entries.iter().map(|e| (e.value.re, e.multiplicity)).collect();
        let expected = [
            (0.0, Some(1)),
            (3.831705970207512f64.powi(2), Some(2)),
            (5.135622301840683f64.powi(2), Some(2)),
            (5.520078110286311f64.powi(2), Some(1)),
        ];
        assert_eq!(values.len(), expected.len(), "{values:?}");
        for ((v, m), (e, em)) in values.iter().zip(expected) {
            assert!((v - e).abs() <= 1e-8 * e.max(1.0));
            assert_eq!(*m, em);
        }
        assert_eq!(r.excluded.len(), 1);
        assert!(r.entries.iter().all(|e| e.residual < EIGEN_TOL));
        assert!(r.invariant_violations(s.basis.modes[0].eigenvalue).is_empty());
    }

    #[test]
    fn uniform_disk_roots_sit_on_second_order_bessel_zeros() {
        // <R_D(lambda) 1>_mu0 vanishes exactly where J_2(sqrt lambda) does
        let s = setup(DomainSpec::unit_disk(), MeasureSpec::uniform(), 2000.0);
        let r = assemble_spectrum(&s.series, &s.basis, &s.moments, ComplexBox::new((-1.0, 80.0), (-15.0, 15.0))).unwrap();
        assert!(r.secular_real_roots().is_empty());
        let j2 = [5.135622301840683f64, 8.417244140399855];
        for z in j2 {
            let e = r.entries.iter().find(|e| (e.value.re - z * z).abs() < 1e-8).unwrap();
            assert_eq!(e.kind, EntryKind::EmbeddedDirichlet);
            assert_eq!(e.multiplicity, None);
            assert!(e.certificate.contains("absorbs"));
        }
        for e in r.entries.iter().filter(|e| e.kind == EntryKind::EmbeddedDirichlet) {
            assert!(e.multiplicity.is_none() || e.multiplicity == Some(2));
        }
        assert!(r.nonreal().next().is_none());
        assert!(r.entries.iter().all(|e| e.residual < EIGEN_TOL), "{:?}", r.entries);
        assert!((r.lambda1_mu.unwrap() - 3.831705970207512f64.powi(2)).abs() < 1e-12);
        let l1 = 2.404825557695773f64.powi(2);
        let l2 = 5.520078110286311f64.powi(2);
        let root = s.series.real_roots_in(l1 + 1e-9, l2 - 1e-9).unwrap()[0].value;
        assert!((root - j2[0] * j2[0]).abs() < 1e-4);
    }

    #[test]
    fn eigenfunction_satisfies_the_boundary_condition() {
        let s = setup(DomainSpec::unit_disk(), MeasureSpec::uniform(), 2000.0);
        let l1 = 2.404825557695773f64.powi(2);
        let l2 = 5.520078110286311f64.powi(2);
        let root = s.series.real_roots_in(l1 + 1e-9, l2 - 1e-9).unwrap()[0].value;
        let ef = eigenfunction_at(Complex64::new(root, 0.0), &s.series, &s.basis, &s.moments).unwrap();
        assert!(ef.residual < 1e-12, "{}", ef.residual);
        let model = KreinModel::new(&s.basis, &s.moments, &s.series);
        assert!(model.functional(&ef.vector).norm() < 1e-8);
        let rq = rayleigh_identity_check(&ef, root, &s.basis, &s.moments).unwrap();
        assert!(rq < 1e-6, "{rq}");
        // away from a root the domain check fails
        assert!(eigenfunction_at(Complex64::new(root + 0.5, 0.0), &s.series, &s.basis, &s.moments).is_err());
    }

    #[test]
    fn rayleigh_negative_controls() {
        let s = setup(DomainSpec::unit_disk(), MeasureSpec::uniform(), 400.0);
        let n = s.basis.len();
        let one = EigenFunction {
            lambda: Complex64::new(0.0, 0.0),
            vector: SpectralVector::one(n),
            resolvent_family: false,
            residual: 0.0,
        };
        assert!(matches!(rayleigh_identity_check(&one, 0.0, &s.basis, &s.moments), Err(Error::Degenerate(_))));
        let mut v = SpectralVector::one(n);
        v.constant_part = Complex64::new(0.1, 0.0);
        v.coeffs[0] = Complex64::new(1.0, 0.0);
        let bad = EigenFunction {
            lambda: Complex64::new(s.basis.modes[0].eigenvalue, 0.0),
            vector: v,
            resolvent_family: false,
            residual: 0.0,
        };
        let r = rayleigh_identity_check(&bad, s.basis.modes[0].eigenvalue, &s.basis, &s.moments).unwrap();
        assert!(r > 0.1, "{r}");
    }

    #[test]
    fn rectangle_uniform_spectrum_is_real_and_interlaced() {
        let d = DomainSpec::rectangle(std::f64::consts::PI, 1.2337 * std::f64::consts::PI).unwrap();
        let s = setup(d, MeasureSpec::uniform(), 1000.0);
        let r = assemble_spectrum(&s.series, &s.basis, &s.moments, ComplexBox::new((-1.0, 40.0), (-10.0, 10.0))).unwrap();
        assert!(r.nonreal().next().is_none());
        let live: Vec<f64> = s.series.live_poles().map(|p| p.value).filter(|v| *v < 40.0).collect();
        let roots = r.secular_real_roots();
        for w in live.windows(2) {
            assert_eq!(roots.iter().filter(|x| **x > w[0] && **x < w[1]).count(), 1);
        }
        assert!(r.entries.iter().all(|e| e.residual < EIGEN_TOL));
    }

    #[test]
    fn csv_has_one_row_per_entry() {
        let s = setup(DomainSpec::unit_disk(), MeasureSpec::ground_state(), 300.0);
        let r = assemble_spectrum(&s.series, &s.basis, &s.moments, window()).unwrap();
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), r.entries.len() + 1);
        assert!(csv.starts_with("value_re,value_im,kind,multiplicity,residual"));
    }
}
