//! SVG renderings of the run outputs.

use jump_spectra::enclosure::threshold_style;
use jump_spectra::numrange::{direction_label, directions, ProbeResult};
use jump_spectra::plot::{Stroke, SvgPlot};
use jump_spectra::stochastic::OccupationHistogram;

/// Empirical against predicted density, per bin.
pub fn histogram_svg(hist: &OccupationHistogram, predicted: &[f64]) -> String {
    let ranges = hist.bins.ranges();
    let radial = matches!(hist.bins, jump_spectra::stochastic::Bins::Radial { .. });
    let x = |i: usize| if radial { 0.5 * (ranges[i].0 + ranges[i].1) } else { i as f64 };
    let n = predicted.len().min(hist.normalized_density.len());
    let top = hist
        .normalized_density
        .iter()
        .chain(predicted)
        .copied()
        .fold(0.0, f64::max)
        .max(1e-12)
        * 1.1;
    let x_range = if radial { (0.0, ranges.last().map_or(1.0, |r| r.1)) } else { (0.0, (n.max(2) - 1) as f64) };
    let mut svg = SvgPlot::new(800.0, 480.0, x_range, (0.0, top));
    svg.axes(5, if radial { "r" } else { "bin" }, "density");
    let emp: Vec<[f64; 2]> = (0..n).map(|i| [x(i), hist.normalized_density[i]]).collect();
    let pred: Vec<[f64; 2]> = (0..n).map(|i| [x(i), predicted[i]]).collect();
    let es = Stroke::new("#d62728", 1.5, Some("4 3"));
    let ps = Stroke::new("#1f4fd6", 1.8, None);
    svg.polyline(&pred, &ps);
    svg.polyline(&emp, &es);
    for p in &emp {
        svg.dot(*p, 2.5, "#d62728");
    }
    svg.legend(&[(ps, "predicted".into()), (es, "simulated".into())]);
    svg.render()
}

/// `ln |Re(conj(d) q)|` against `ln eps`, one curve per direction.
pub fn numrange_svg(results: &[ProbeResult]) -> String {
    let pts = |d| -> Vec<[f64; 2]> {
        results
            .iter()
            .filter(|r| r.direction == d)
            .map(|r| [r.epsilon.ln(), (d.conj() * r.quotient).re.abs().ln()])
            .collect()
    };
    let all: Vec<[f64; 2]> = directions().into_iter().flat_map(pts).collect();
    let span = |k: usize| {
        let lo = all.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
        let hi = all.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
        if lo < hi { (lo - 0.05 * (hi - lo), hi + 0.05 * (hi - lo)) } else { (lo - 1.0, lo + 1.0) }
    };
    let mut svg = SvgPlot::new(800.0, 480.0, span(0), span(1));
    svg.axes(5, "ln ε", "ln |Re(conj(d) q)|");
    let mut legend = Vec::new();
    for (i, d) in directions().into_iter().enumerate() {
        let style = threshold_style(i);
        let line = pts(d);
        svg.polyline(&line, &style);
        for p in &line {
            svg.dot(*p, 2.0, &style.color);
        }
        legend.push((style, format!("d = {}", direction_label(d))));
    }
    svg.legend(&legend);
    svg.render()
}
