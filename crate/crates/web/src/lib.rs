//! Browser bindings: matryoshka curves, the secular function on the real line
//! and the spectrum in a window.
//!
//! The logic lives in plain functions returning `Result<String, String>` so it
//! can be tested natively; the `#[wasm_bindgen]` wrappers only convert errors.

use jump_spectra::enclosure::{emit_matryoshka_curves, PlotGrid};
use jump_spectra::measure::{compute_moments, MeasureMoments, MeasureSpec};
use jump_spectra::plot::{Stroke, SvgPlot};
use jump_spectra::secular::{ComplexBox, SecularSeries};
use jump_spectra::spectrum::assemble_spectrum;
use jump_spectra::{build_basis, BasisSet, DomainSpec};
use wasm_bindgen::prelude::*;

/// Coarser than the command-line default so the page stays responsive.
pub const FIGURE_GRID: PlotGrid = PlotGrid {
    re: (0.0, 60.0),
    im: (-15.0, 15.0),
    nx: 300,
    ny: 150,
};
pub const MAX_CUTOFF: f64 = 4000.0;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Comma-separated nonnegative thresholds.
pub fn parse_thresholds(text: &str) -> Result<Vec<f64>, String> {
    let ts: Vec<f64> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("'{s}' is not a number")))
        .collect::<Result<_, _>>()?;
    if ts.is_empty() || ts.len() > 8 {
        return Err("give between 1 and 8 thresholds".into());
    }
    if let Some(t) = ts.iter().find(|t| !(**t >= 0.0 && **t <= 1.0)) {
        return Err(format!("threshold {t} is outside [0, 1]"));
    }
    Ok(ts)
}

pub fn matryoshka(thresholds: &str, cutoff: f64) -> Result<String, String> {
    let ts = parse_thresholds(thresholds)?;
    let basis = build_basis(DomainSpec::unit_disk(), cutoff.clamp(100.0, MAX_CUTOFF)).map_err(err)?;
    let plot = emit_matryoshka_curves(&basis, &ts, FIGURE_GRID).map_err(err)?;
    Ok(plot.to_svg())
}

/// Domain, measure and truncated basis shared by the two spectral views.
pub struct Problem {
    basis: BasisSet,
    moments: MeasureMoments,
    series: SecularSeries,
}

impl Problem {
    /// `shape` is `disk` or `rectangle`; `measure` is `uniform`, `ground_state` or `dirac`
    /// (placed at `point`, in domain coordinates).
    pub fn new(shape: &str, width: f64, height: f64, measure: &str, point: [f64; 2], cutoff: f64) -> Result<Self, String> {
        let domain = match shape {
            "disk" => DomainSpec::unit_disk(),
            "rectangle" => DomainSpec::rectangle(width, height).map_err(err)?,
            other => return Err(format!("unknown shape '{other}'")),
        };
        let spec = match measure {
            "uniform" => MeasureSpec::uniform(),
            "ground_state" => MeasureSpec::ground_state(),
            "dirac" => MeasureSpec::dirac(point),
            other => return Err(format!("unknown measure '{other}'")),
        };
        let basis = build_basis(domain, cutoff.clamp(100.0, MAX_CUTOFF)).map_err(err)?;
        let moments = compute_moments(&spec, &basis).map_err(err)?;
        let series = SecularSeries::new(&basis, &moments);
        Ok(Self { basis, moments, series })
    }

    /// `m` on `[lo, hi]`, clipped to `|m| <= clip`, with poles (grey) and real roots (blue).
    pub fn secular_svg(&self, lo: f64, hi: f64, clip: f64) -> Result<String, String> {
        if !(lo < hi) || hi >= self.series.usable_limit() {
            return Err(format!("need lo < hi < {:.1}", self.series.usable_limit()));
        }
        let n = 1200;
        let mut svg = SvgPlot::new(960.0, 420.0, (lo, hi), (-clip, clip));
        svg.axes(6, "λ", "m(λ)");
        svg.polyline(&[[lo, 0.0], [hi, 0.0]], &Stroke::new("#999999", 0.8, Some("3 3")));
        let curve = Stroke::new("#1f4fd6", 1.5, None);
        let mut run: Vec<[f64; 2]> = Vec::new();
        let mut prev: Option<f64> = None;
        for i in 0..=n {
            let x = lo + (hi - lo) * i as f64 / n as f64;
            let y = self.series.eval_real(x).ok().map(|v| v.0);
            // a pole lies between two samples when m jumps from large positive to large negative
            let jump = matches!((prev, y), (Some(a), Some(b)) if a > 0.0 && b < 0.0 && (a - b) > clip);
            if y.is_none() || jump {
                svg.polyline(&run, &curve);
                run.clear();
            }
            if let Some(y) = y {
                run.push([x, y.clamp(-clip, clip)]);
            }
            prev = y;
        }
        svg.polyline(&run, &curve);
        for p in self.series.live_poles().filter(|p| p.value > lo && p.value < hi) {
            svg.polyline(&[[p.value, -clip], [p.value, clip]], &Stroke::new("#bbbbbb", 0.8, None));
        }
        let scan = self.series.scan_real(lo.max(1e-9), hi).map_err(err)?;
        for r in &scan.roots {
            svg.dot([r.value, 0.0], 4.0, "#d62728");
        }
        Ok(svg.render())
    }

    /// Spectrum in `[-1, re_max] x [-im_max, im_max]` as `{"svg": .., "entries": [..]}`.
    pub fn spectrum_json(&self, re_max: f64, im_max: f64) -> Result<String, String> {
        let window = ComplexBox::new((-1.0, re_max), (-im_max, im_max));
        let report = assemble_spectrum(&self.series, &self.basis, &self.moments, window).map_err(err)?;
        let dirichlet: Vec<f64> = self.basis.distinct_eigenvalues().into_iter().map(|(l, _)| l).collect();
        let entries: Vec<serde_json::Value> = report
            .entries
            .iter()
            .map(|e| {
                serde_json::json!({
                    "re": e.value.re,
                    "im": e.value.im,
                    "kind": e.kind.as_str(),
                    "multiplicity": e.multiplicity,
                })
            })
            .collect();
        Ok(serde_json::json!({ "svg": report.to_svg(&dirichlet), "entries": entries }).to_string())
    }
}

#[wasm_bindgen]
pub fn matryoshka_svg(thresholds: &str, cutoff: f64) -> Result<String, JsValue> {
    matryoshka(thresholds, cutoff).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub struct Model(Problem);

#[wasm_bindgen]
impl Model {
    #[wasm_bindgen(constructor)]
    pub fn new(shape: &str, width: f64, height: f64, measure: &str, x: f64, y: f64, cutoff: f64) -> Result<Model, JsValue> {
        Problem::new(shape, width, height, measure, [x, y], cutoff)
            .map(Model)
            .map_err(|e| JsValue::from_str(&e))
    }

    pub fn secular_svg(&self, lo: f64, hi: f64, clip: f64) -> Result<String, JsValue> {
        self.0.secular_svg(lo, hi, clip).map_err(|e| JsValue::from_str(&e))
    }

    pub fn spectrum_json(&self, re_max: f64, im_max: f64) -> Result<String, JsValue> {
        self.0.spectrum_json(re_max, im_max).map_err(|e| JsValue::from_str(&e))
    }
}
