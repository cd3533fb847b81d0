//! Self-contained SVG line plots.
//!
//! A tiny renderer tuned for the figures this tool emits: linear or log
//! axes with tick labels, series drawn as polylines with optional markers
//! and error bars, dashed reference lines, shaded bands, and a legend.
//! Output is a single `<svg>` element with no external references.

use std::fmt::Write as _;

use crate::error::{CliError, Result};

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 78.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 46.0;
const MARGIN_B: f64 = 64.0;

/// Matplotlib-style categorical palette.
pub const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Shades of orange for bias-ordered series (light to dark).
pub const ORANGES: [&str; 4] = ["#fdbe85", "#fd8d3c", "#e6550d", "#a63603"];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LineStyle {
    Solid,
    Dashed,
    None,
}

/// One plotted data series.
#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    /// CSS color; empty string selects from the palette by index.
    pub color: String,
    pub points: Vec<(f64, f64)>,
    pub line: LineStyle,
    pub marker: bool,
    /// Absolute (low, high) error-bar bounds per point.
    pub y_err: Option<Vec<(f64, f64)>>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            label: label.into(),
            color: String::new(),
            points,
            line: LineStyle::Solid,
            marker: true,
            y_err: None,
        }
    }

    pub fn color(mut self, c: &str) -> Self {
        self.color = c.to_string();
        self
    }

    pub fn line(mut self, style: LineStyle) -> Self {
        self.line = style;
        self
    }

    pub fn marker(mut self, on: bool) -> Self {
        self.marker = on;
        self
    }

    pub fn with_errors(mut self, err: Vec<(f64, f64)>) -> Self {
        assert_eq!(err.len(), self.points.len());
        self.y_err = Some(err);
        self
    }
}

/// Shaded region between two curves sharing an x-range.
#[derive(Clone, Debug)]
pub struct Band {
    pub color: String,
    pub opacity: f64,
    /// Upper boundary, sorted by x.
    pub upper: Vec<(f64, f64)>,
    /// Lower boundary, sorted by x.
    pub lower: Vec<(f64, f64)>,
}

/// Dashed vertical reference line.
#[derive(Clone, Debug)]
pub struct VLine {
    pub x: f64,
    pub label: String,
}

/// Figure description; `render` turns it into an SVG document.
#[derive(Clone, Debug)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
    pub series: Vec<Series>,
    pub bands: Vec<Band>,
    pub v_lines: Vec<VLine>,
}

impl Figure {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Figure {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            x_scale: Scale::Linear,
            y_scale: Scale::Linear,
            series: Vec::new(),
            bands: Vec::new(),
            v_lines: Vec::new(),
        }
    }

    pub fn log_x(mut self) -> Self {
        self.x_scale = Scale::Log;
        self
    }

    pub fn log_y(mut self) -> Self {
        self.y_scale = Scale::Log;
        self
    }

    fn usable(&self, x: f64, y: f64) -> bool {
        let ok = |v: f64, s: Scale| v.is_finite() && (s == Scale::Linear || v > 0.0);
        ok(x, self.x_scale) && ok(y, self.y_scale)
    }

    /// Render to an SVG document string.
    pub fn render(&self) -> Result<String> {
        // Data ranges over everything drawable.
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for s in &self.series {
            for (i, &(x, y)) in s.points.iter().enumerate() {
                if self.usable(x, y) {
                    xs.push(x);
                    ys.push(y);
                    if let Some(err) = &s.y_err {
                        let (lo, hi) = err[i];
                        if self.usable(x, lo) {
                            ys.push(lo);
                        }
                        if self.usable(x, hi) {
                            ys.push(hi);
                        }
                    }
                }
            }
        }
        for b in &self.bands {
            for &(x, y) in b.upper.iter().chain(b.lower.iter()) {
                if self.usable(x, y) {
                    xs.push(x);
                    ys.push(y);
                }
            }
        }
        for v in &self.v_lines {
            if v.x.is_finite() && (self.x_scale == Scale::Linear || v.x > 0.0) {
                xs.push(v.x);
            }
        }
        if xs.is_empty() || ys.is_empty() {
            return Err(CliError::Data("no plottable points (after scale filtering)".into()));
        }

        let x_axis = Axis::fit(&xs, self.x_scale);
        let y_axis = Axis::fit(&ys, self.y_scale);
        let px = |x: f64| MARGIN_L + x_axis.unit(x) * (WIDTH - MARGIN_L - MARGIN_R);
        let py = |y: f64| HEIGHT - MARGIN_B - y_axis.unit(y) * (HEIGHT - MARGIN_T - MARGIN_B);

        let mut out = String::with_capacity(1 << 14);
        write!(
            out,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
             font-family=\"Helvetica, Arial, sans-serif\" font-size=\"13\">\n"
        )
        .unwrap();
        out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n");

        // Grid and ticks.
        for &t in &x_axis.ticks {
            let x = px(t);
            writeln!(
                out,
                "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>",
                MARGIN_T,
                HEIGHT - MARGIN_B
            )
            .unwrap();
            writeln!(
                out,
                "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
                HEIGHT - MARGIN_B + 20.0,
                escape(&tick_label(t, self.x_scale))
            )
            .unwrap();
        }
        for &t in &y_axis.ticks {
            let y = py(t);
            writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>",
                MARGIN_L,
                WIDTH - MARGIN_R
            )
            .unwrap();
            writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
                MARGIN_L - 8.0,
                y + 4.0,
                escape(&tick_label(t, self.y_scale))
            )
            .unwrap();
        }

        // Bands under everything else.
        for band in &self.bands {
            let mut pts: Vec<(f64, f64)> = band
                .upper
                .iter()
                .filter(|&&(x, y)| self.usable(x, y))
                .map(|&(x, y)| (px(x), py(y)))
                .collect();
            let lower: Vec<(f64, f64)> = band
                .lower
                .iter()
                .filter(|&&(x, y)| self.usable(x, y))
                .map(|&(x, y)| (px(x), py(y)))
                .collect();
            if pts.len() < 2 || lower.len() < 2 {
                continue;
            }
            pts.extend(lower.into_iter().rev());
            let mut d = String::new();
            for (i, (x, y)) in pts.iter().enumerate() {
                let _ = write!(d, "{}{x:.2} {y:.2}", if i == 0 { "M" } else { "L" });
            }
            d.push('Z');
            writeln!(
                out,
                "<path d=\"{d}\" fill=\"{}\" fill-opacity=\"{}\" stroke=\"none\"/>",
                escape(&band.color),
                band.opacity
            )
            .unwrap();
        }

        // Vertical reference lines.
        for vline in &self.v_lines {
            if !(vline.x.is_finite() && (self.x_scale == Scale::Linear || vline.x > 0.0)) {
                continue;
            }
            let x = px(vline.x);
            writeln!(
                out,
                "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#444444\" \
                 stroke-width=\"1.5\" stroke-dasharray=\"7 5\"/>",
                MARGIN_T,
                HEIGHT - MARGIN_B
            )
            .unwrap();
            if !vline.label.is_empty() {
                writeln!(
                    out,
                    "<text x=\"{:.2}\" y=\"{:.2}\" fill=\"#444444\">{}</text>",
                    x + 5.0,
                    MARGIN_T + 14.0,
                    escape(&vline.label)
                )
                .unwrap();
            }
        }

        // Series.
        for (idx, s) in self.series.iter().enumerate() {
            let color = if s.color.is_empty() {
                PALETTE[idx % PALETTE.len()]
            } else {
                s.color.as_str()
            };
            let visible: Vec<(usize, f64, f64)> = s
                .points
                .iter()
                .enumerate()
                .filter(|&(_, &(x, y))| self.usable(x, y))
                .map(|(i, &(x, y))| (i, px(x), py(y)))
                .collect();
            if let Some(err) = &s.y_err {
                for &(i, x, _) in &visible {
                    let (lo, hi) = err[i];
                    if !(self.usable(s.points[i].0, lo) && self.usable(s.points[i].0, hi)) {
                        continue;
                    }
                    let (ylo, yhi) = (py(lo), py(hi));
                    writeln!(
                        out,
                        "<line x1=\"{x:.2}\" y1=\"{ylo:.2}\" x2=\"{x:.2}\" y2=\"{yhi:.2}\" \
                         stroke=\"{color}\" stroke-width=\"1\"/>"
                    )
                    .unwrap();
                    for y in [ylo, yhi] {
                        writeln!(
                            out,
                            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
                             stroke=\"{color}\" stroke-width=\"1\"/>",
                            x - 3.0,
                            x + 3.0
                        )
                        .unwrap();
                    }
                }
            }
            if s.line != LineStyle::None && visible.len() >= 2 {
                let mut pts = String::new();
                for &(_, x, y) in &visible {
                    let _ = write!(pts, "{x:.2},{y:.2} ");
                }
                let dash = match s.line {
                    LineStyle::Dashed => " stroke-dasharray=\"7 5\"",
                    _ => "",
                };
                writeln!(
                    out,
                    "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\"{dash}/>",
                    pts.trim_end()
                )
                .unwrap();
            }
            if s.marker {
                for &(_, x, y) in &visible {
                    writeln!(out, "<circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"3\" fill=\"{color}\"/>")
                        .unwrap();
                }
            }
        }

        // Axes frame on top of the data.
        writeln!(
            out,
            "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{:.2}\" height=\"{:.2}\" \
             fill=\"none\" stroke=\"#222222\" stroke-width=\"1.2\"/>",
            WIDTH - MARGIN_L - MARGIN_R,
            HEIGHT - MARGIN_T - MARGIN_B
        )
        .unwrap();

        // Labels and title.
        writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"15\">{}</text>",
            (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
            HEIGHT - 18.0,
            escape(&self.x_label)
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"20\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"15\" \
             transform=\"rotate(-90 20 {:.2})\">{}</text>",
            (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
            (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
            escape(&self.y_label)
        )
        .unwrap();
        writeln!(
            out,
            "<text x=\"{:.2}\" y=\"26\" text-anchor=\"middle\" font-size=\"17\" font-weight=\"bold\">{}</text>",
            WIDTH / 2.0,
            escape(&self.title)
        )
        .unwrap();

        // Legend (top-right inside the frame).
        let labeled: Vec<(usize, &Series)> = self
            .series
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.label.is_empty())
            .collect();
        if !labeled.is_empty() {
            let row_h = 18.0;
            let box_w = 8.0 + 26.0
                + 7.2 * labeled.iter().map(|(_, s)| s.label.chars().count()).max().unwrap() as f64;
            let box_h = row_h * labeled.len() as f64 + 10.0;
            let x0 = WIDTH - MARGIN_R - box_w - 8.0;
            let y0 = MARGIN_T + 8.0;
            writeln!(
                out,
                "<rect x=\"{x0:.2}\" y=\"{y0:.2}\" width=\"{box_w:.2}\" height=\"{box_h:.2}\" \
                 fill=\"#ffffff\" fill-opacity=\"0.85\" stroke=\"#bbbbbb\"/>"
            )
            .unwrap();
            for (row, (idx, s)) in labeled.iter().enumerate() {
                let color = if s.color.is_empty() {
                    PALETTE[idx % PALETTE.len()]
                } else {
                    s.color.as_str()
                };
                let y = y0 + 14.0 + row as f64 * row_h;
                let dash = match s.line {
                    LineStyle::Dashed => " stroke-dasharray=\"7 5\"",
                    _ => "",
                };
                if s.line == LineStyle::None {
                    writeln!(
                        out,
                        "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                        x0 + 17.0,
                        y - 4.0
                    )
                    .unwrap();
                } else {
                    writeln!(
                        out,
                        "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" \
                         stroke=\"{color}\" stroke-width=\"2\"{dash}/>",
                        x0 + 8.0,
                        y - 4.0,
                        x0 + 26.0,
                        y - 4.0
                    )
                    .unwrap();
                }
                writeln!(
                    out,
                    "<text x=\"{:.2}\" y=\"{y:.2}\">{}</text>",
                    x0 + 32.0,
                    escape(&s.label)
                )
                .unwrap();
            }
        }

        out.push_str("</svg>\n");
        Ok(out)
    }
}

/// Escape text for XML attribute/content positions.
pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// One axis: data range plus tick positions, in data units.
struct Axis {
    lo: f64,
    hi: f64,
    scale: Scale,
    ticks: Vec<f64>,
}

impl Axis {
    fn fit(values: &[f64], scale: Scale) -> Axis {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        match scale {
            Scale::Linear => {
                if lo == hi {
                    let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
                    lo -= pad;
                    hi += pad;
                } else {
                    let pad = (hi - lo) * 0.06;
                    lo -= pad;
                    hi += pad;
                }
                let ticks = linear_ticks(lo, hi);
                Axis { lo, hi, scale, ticks }
            }
            Scale::Log => {
                let (mut llo, mut lhi) = (lo.log10(), hi.log10());
                if (lhi - llo).abs() < 1e-12 {
                    llo -= 0.5;
                    lhi += 0.5;
                } else {
                    let pad = (lhi - llo) * 0.06;
                    llo -= pad;
                    lhi += pad;
                }
                let ticks = log_ticks(llo, lhi);
                Axis { lo: 10f64.powf(llo), hi: 10f64.powf(lhi), scale, ticks }
            }
        }
    }

    /// Map a data value to [0, 1] along the axis.
    fn unit(&self, v: f64) -> f64 {
        match self.scale {
            Scale::Linear => (v - self.lo) / (self.hi - self.lo),
            Scale::Log => (v.log10() - self.lo.log10()) / (self.hi.log10() - self.lo.log10()),
        }
    }
}

/// Roughly five ticks on a 1/2/5 ladder.
fn linear_ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = hi - lo;
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = mag * if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    let mut ticks = Vec::new();
    let mut t = (lo / step).ceil() * step;
    while t <= hi + step * 1e-9 {
        // Snap near-zero accumulation error.
        let snapped = if t.abs() < step * 1e-9 { 0.0 } else { t };
        ticks.push(snapped);
        t += step;
    }
    ticks
}

/// Decade ticks; thins to every k-th decade when the range is wide.
fn log_ticks(llo: f64, lhi: f64) -> Vec<f64> {
    let first = llo.ceil() as i64;
    let last = lhi.floor() as i64;
    let mut decades: Vec<i64> = (first..=last).collect();
    if decades.len() > 8 {
        let stride = decades.len().div_ceil(8);
        decades = decades.into_iter().step_by(stride).collect();
    }
    if decades.is_empty() {
        // Sub-decade range: three evenly spaced ticks in log space.
        decades = Vec::new();
        let mut ticks = Vec::new();
        for k in 0..3 {
            ticks.push(10f64.powf(llo + (lhi - llo) * (0.1 + 0.4 * k as f64)));
        }
        return ticks;
    }
    decades.into_iter().map(|d| 10f64.powi(d as i32)).collect()
}

fn tick_label(v: f64, scale: Scale) -> String {
    match scale {
        Scale::Log => {
            let l = v.log10();
            if (l - l.round()).abs() < 1e-9 {
                let e = l.round() as i32;
                if (-3..=3).contains(&e) {
                    format!("{v}")
                } else {
                    format!("1e{e}")
                }
            } else {
                format!("{v:.3e}")
            }
        }
        Scale::Linear => {
            if v == 0.0 {
                "0".to_string()
            } else if v.abs() >= 1e4 || v.abs() < 1e-3 {
                format!("{v:.1e}")
            } else {
                let s = format!("{v:.4}");
                let s = s.trim_end_matches('0').trim_end_matches('.');
                s.to_string()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn demo() -> Figure {
        let mut fig = Figure::new("demo", "x", "y").log_x().log_y();
        fig.series.push(Series::new("a", vec![(1e-4, 1e-2), (1e-3, 1e-1), (1e-2, 0.4)]));
        fig.series.push(
            Series::new("b", vec![(1e-4, 3e-3), (1e-3, 6e-2), (1e-2, 0.5)])
                .line(LineStyle::Dashed),
        );
        fig.v_lines.push(VLine { x: 1e-3, label: "threshold".into() });
        fig
    }

    #[test]
    fn renders_polyline_with_nonempty_points() {
        let svg = demo().render().unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        let polyline = svg.split("<polyline points=\"").nth(1).unwrap();
        let coords = polyline.split('"').next().unwrap();
        assert!(coords.split_whitespace().count() >= 3, "{coords}");
        assert!(svg.contains("stroke-dasharray"));
    }

    #[test]
    fn log_scale_drops_nonpositive_points() {
        let mut fig = Figure::new("t", "x", "y").log_y();
        fig.series.push(Series::new("a", vec![(1.0, 0.0), (2.0, 1e-3), (3.0, 1e-2)]));
        let svg = fig.render().unwrap();
        // Only two markers survive the filter (the legend uses a line swatch).
        assert_eq!(svg.matches("<circle").count(), 2);
    }

    #[test]
    fn all_points_filtered_is_an_error() {
        let mut fig = Figure::new("t", "x", "y").log_y();
        fig.series.push(Series::new("a", vec![(1.0, 0.0), (2.0, -1.0)]));
        assert!(matches!(fig.render(), Err(CliError::Data(_))));
    }

    #[test]
    fn labels_are_xml_escaped() {
        let mut fig = Figure::new("a < b & c", "x", "y");
        fig.series.push(Series::new("d>\"e\"", vec![(0.0, 1.0), (1.0, 2.0)]));
        let svg = fig.render().unwrap();
        assert!(svg.contains("a &lt; b &amp; c"));
        assert!(svg.contains("d&gt;&quot;e&quot;"));
        assert!(!svg.contains("a < b"));
    }

    #[test]
    fn bands_emit_closed_paths() {
        let mut fig = Figure::new("t", "x", "y");
        fig.bands.push(Band {
            color: "#fd8d3c".into(),
            opacity: 0.3,
            upper: vec![(0.0, 2.0), (1.0, 3.0)],
            lower: vec![(0.0, 1.0), (1.0, 1.5)],
        });
        fig.series.push(Series::new("a", vec![(0.0, 1.0), (1.0, 3.0)]));
        let svg = fig.render().unwrap();
        assert!(svg.contains("fill-opacity=\"0.3\""));
        let d = svg.split("<path d=\"").nth(1).unwrap().split('"').next().unwrap();
        assert!(d.starts_with('M') && d.ends_with('Z'), "{d}");
    }

    #[test]
    fn linear_ticks_cover_the_range() {
        let ticks = linear_ticks(0.0, 10.0);
        assert!(ticks.len() >= 4 && ticks.len() <= 8);
        assert!(ticks.iter().all(|&t| (0.0..=10.0).contains(&t)));
        let log = log_ticks(-4.2, -0.8);
        assert_eq!(log, vec![1e-4, 1e-3, 1e-2, 1e-1]);
    }
}
