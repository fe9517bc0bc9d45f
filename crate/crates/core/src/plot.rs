//! Contour extraction and a minimal SVG writer.

use std::collections::HashMap;
use std::fmt::Write as _;

pub type Polyline = Vec<[f64; 2]>;

/// Level set `field = level` on a rectilinear grid by marching squares.
///
/// `field[j * xs.len() + i]` is the value at `(xs[i], ys[j])`. Segments are
/// joined into maximal polylines; closed curves repeat their first point.
pub fn contour_lines(field: &[f64], xs: &[f64], ys: &[f64], level: f64) -> Vec<Polyline> {
    let nx = xs.len();
    let ny = ys.len();
    assert_eq!(field.len(), nx * ny, "field size does not match the grid");
    let at = |i: usize, j: usize| field[j * nx + i] - level;
    // edge keys: (0, i, j) joins (i, j)-(i+1, j); (1, i, j) joins (i, j)-(i, j+1)
    let crossing = |key: (u8, usize, usize)| -> [f64; 2] {
        let (dir, i, j) = key;
        let (i2, j2) = if dir == 0 { (i + 1, j) } else { (i, j + 1) };
        let (a, b) = (at(i, j), at(i2, j2));
        let t = if a == b { 0.5 } else { a / (a - b) };
        [xs[i] + t * (xs[i2] - xs[i]), ys[j] + t * (ys[j2] - ys[j])]
    };
    let mut segments: Vec<[(u8, usize, usize); 2]> = Vec::new();
    for j in 0..ny.saturating_sub(1) {
        for i in 0..nx.saturating_sub(1) {
            let v = [at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)];
            let mut case = 0u8;
            for (bit, val) in v.iter().enumerate() {
                if *val > 0.0 {
                    case |= 1 << bit;
                }
            }
            let bottom = (0, i, j);
            let right = (1, i + 1, j);
            let top = (0, i, j + 1);
            let left = (1, i, j);
            let center_above = v.iter().sum::<f64>() > 0.0;
            let pairs: &[[(u8, usize, usize); 2]] = match case {
                0 | 15 => &[],
                1 | 14 => &[[left, bottom]],
                2 | 13 => &[[bottom, right]],
                3 | 12 => &[[left, right]],
                4 | 11 => &[[right, top]],
                6 | 9 => &[[bottom, top]],
                7 | 8 => &[[left, top]],
                5 => {
                    if center_above {
                        &[[left, top], [bottom, right]]
                    } else {
                        &[[left, bottom], [right, top]]
                    }
                }
                10 => {
                    if center_above {
                        &[[left, bottom], [right, top]]
                    } else {
                        &[[left, top], [bottom, right]]
                    }
                }
                _ => unreachable!(),
            };
            segments.extend_from_slice(pairs);
        }
    }
    join_segments(&segments, crossing)
}

fn join_segments<K, F>(segments: &[[K; 2]], point: F) -> Vec<Polyline>
where
    K: Copy + Eq + std::hash::Hash,
    F: Fn(K) -> [f64; 2],
{
    let mut adjacency: HashMap<K, Vec<usize>> = HashMap::new();
    for (s, seg) in segments.iter().enumerate() {
        for k in seg {
            adjacency.entry(*k).or_default().push(s);
        }
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    // open chains start at keys of degree one so that they are not split
    let mut starts: Vec<usize> = (0..segments.len())
        .filter(|&s| segments[s].iter().any(|k| adjacency[k].len() == 1))
        .collect();
    starts.extend(0..segments.len());
    for s0 in starts {
        if used[s0] {
            continue;
        }
        used[s0] = true;
        let [a, b] = segments[s0];
        let (first, mut current) = if adjacency[&a].len() == 1 { (a, b) } else if adjacency[&b].len() == 1 { (b, a) } else { (a, b) };
        let mut keys = vec![first, current];
        loop {
            let next = adjacency[&current].iter().copied().find(|&s| !used[s]);
            let Some(s) = next else { break };
            used[s] = true;
            let [x, y] = segments[s];
            current = if x == current { y } else { x };
            keys.push(current);
        }
        lines.push(keys.into_iter().map(&point).collect());
    }
    lines
}

/// Stroke style of a polyline.
#[derive(Debug, Clone, PartialEq)]
pub struct Stroke {
    pub color: String,
    pub width: f64,
    pub dash: Option<String>,
}

impl Stroke {
    pub fn new(color: &str, width: f64, dash: Option<&str>) -> Self {
        Self {
            color: color.into(),
            width,
            dash: dash.map(Into::into),
        }
    }
}

/// A fixed-size SVG document with a data-to-pixel transform.
#[derive(Debug, Clone)]
pub struct SvgPlot {
    pub width: f64,
    pub height: f64,
    pub x_range: (f64, f64),
    pub y_range: (f64, f64),
    margin: f64,
    body: String,
}

impl SvgPlot {
    pub fn new(width: f64, height: f64, x_range: (f64, f64), y_range: (f64, f64)) -> Self {
        Self {
            width,
            height,
            x_range,
            y_range,
            margin: 50.0,
            body: String::new(),
        }
    }

    fn px(&self, p: [f64; 2]) -> (f64, f64) {
        let w = self.width - 2.0 * self.margin;
        let h = self.height - 2.0 * self.margin;
        let x = self.margin + (p[0] - self.x_range.0) / (self.x_range.1 - self.x_range.0) * w;
        let y = self.height - self.margin - (p[1] - self.y_range.0) / (self.y_range.1 - self.y_range.0) * h;
        (x, y)
    }

    pub fn polyline(&mut self, points: &[[f64; 2]], stroke: &Stroke) {
        if points.len() < 2 {
            return;
        }
        let mut d = String::new();
        for (i, p) in points.iter().enumerate() {
            let (x, y) = self.px(*p);
            let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, x, y);
        }
        let dash = stroke
            .dash
            .as_ref()
            .map(|d| format!(" stroke-dasharray=\"{d}\""))
            .unwrap_or_default();
        let _ = writeln!(
            self.body,
            "<path d=\"{d}\" fill=\"none\" stroke=\"{}\" stroke-width=\"{}\"{dash}/>",
            stroke.color, stroke.width
        );
    }

    pub fn dot(&mut self, p: [f64; 2], radius: f64, color: &str) {
        let (x, y) = self.px(p);
        let _ = writeln!(self.body, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{radius}\" fill=\"{color}\"/>");
    }

    pub fn text(&mut self, p: [f64; 2], size: f64, content: &str) {
        let (x, y) = self.px(p);
        let _ = writeln!(
            self.body,
            "<text x=\"{x:.2}\" y=\"{y:.2}\" font-size=\"{size}\" font-family=\"sans-serif\">{}</text>",
            escape(content)
        );
    }

    /// Frame with `ticks` labelled ticks per axis.
    pub fn axes(&mut self, ticks: usize, x_label: &str, y_label: &str) {
        let frame = [
            [self.x_range.0, self.y_range.0],
            [self.x_range.1, self.y_range.0],
            [self.x_range.1, self.y_range.1],
            [self.x_range.0, self.y_range.1],
            [self.x_range.0, self.y_range.0],
        ];
        self.polyline(&frame, &Stroke::new("black", 1.0, None));
        for k in 0..=ticks {
            let f = k as f64 / ticks as f64;
            let x = self.x_range.0 + f * (self.x_range.1 - self.x_range.0);
            let y = self.y_range.0 + f * (self.y_range.1 - self.y_range.0);
            let (px, py) = self.px([x, self.y_range.0]);
            let _ = writeln!(
                self.body,
                "<text x=\"{px:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>",
                py + 16.0,
                tick_label(x)
            );
            let (px, py) = self.px([self.x_range.0, y]);
            let _ = writeln!(
                self.body,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">{}</text>",
                px - 6.0,
                py + 4.0,
                tick_label(y)
            );
        }
        let (cx, by) = self.px([0.5 * (self.x_range.0 + self.x_range.1), self.y_range.0]);
        let _ = writeln!(
            self.body,
            "<text x=\"{cx:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">{}</text>",
            by + 36.0,
            escape(x_label)
        );
        let (lx, cy) = self.px([self.x_range.0, 0.5 * (self.y_range.0 + self.y_range.1)]);
        let _ = writeln!(
            self.body,
            "<text x=\"{:.2}\" y=\"{cy:.2}\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\" transform=\"rotate(-90 {:.2} {cy:.2})\">{}</text>",
            lx - 36.0,
            lx - 36.0,
            escape(y_label)
        );
    }

    /// Legend entries stacked in the top-right corner of the plot area.
    pub fn legend(&mut self, items: &[(Stroke, String)]) {
        let x0 = self.width - self.margin - 150.0;
        for (k, (stroke, label)) in items.iter().enumerate() {
            let y = self.margin + 16.0 + 18.0 * k as f64;
            let dash = stroke
                .dash
                .as_ref()
                .map(|d| format!(" stroke-dasharray=\"{d}\""))
                .unwrap_or_default();
            let _ = writeln!(
                self.body,
                "<path d=\"M{x0:.2},{y:.2} L{:.2},{y:.2}\" stroke=\"{}\" stroke-width=\"{}\"{dash}/>",
                x0 + 30.0,
                stroke.color,
                stroke.width
            );
            let _ = writeln!(
                self.body,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" font-family=\"sans-serif\">{}</text>",
                x0 + 36.0,
                y + 4.0,
                escape(label)
            );
        }
    }

    pub fn render(&self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = self.width,
            h = self.height
        )
    }
}

fn tick_label(v: f64) -> String {
    if (v - v.round()).abs() < 1e-9 {
        format!("{}", v.round() as i64)
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_level_set_is_one_closed_curve() {
        let xs: Vec<f64> = (0..81).map(|i| -2.0 + 4.0 * i as f64 / 80.0).collect();
        let ys = xs.clone();
        let field: Vec<f64> = ys
            .iter()
            .flat_map(|y| xs.iter().map(move |x| (x * x + y * y).sqrt()))
            .collect();
        let lines = contour_lines(&field, &xs, &ys, 1.0);
        assert_eq!(lines.len(), 1);
        let line = &lines[0];
        assert_eq!(line.first(), line.last());
        for p in line {
            assert!(((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs() < 5e-3);
        }
    }

    #[test]
    fn open_curve_across_the_grid() {
        let xs: Vec<f64> = (0..11).map(|i| i as f64).collect();
        let ys = xs.clone();
        let field: Vec<f64> = ys.iter().flat_map(|_| xs.iter().copied()).collect();
        let lines = contour_lines(&field, &xs, &ys, 4.5);
        assert_eq!(lines.len(), 1);
        assert_eq!(lines[0].len(), 11);
        assert!(lines[0].iter().all(|p| (p[0] - 4.5).abs() < 1e-12));
    }

    #[test]
    fn svg_is_well_formed() {
        let mut s = SvgPlot::new(400.0, 300.0, (0.0, 1.0), (0.0, 1.0));
        s.axes(4, "Re", "Im <x>");
        s.polyline(&[[0.0, 0.0], [1.0, 1.0]], &Stroke::new("blue", 1.5, Some("4 2")));
        s.dot([0.5, 0.5], 2.0, "black");
        let out = s.render();
        assert!(out.starts_with("<svg"));
        assert!(out.trim_end().ends_with("</svg>"));
        assert!(out.contains("&lt;x&gt;"));
        assert!(out.contains("stroke-dasharray=\"4 2\""));
    }
}
