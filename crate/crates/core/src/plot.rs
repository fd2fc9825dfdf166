//! Minimal SVG line plots for ECDFs and pattern cuts.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::metrics::EcdfPoint;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_L: f64 = 64.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 24.0;
const MARGIN_B: f64 = 48.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

pub struct EcdfSeries<'a> {
    pub label: &'a str,
    pub points: &'a [EcdfPoint],
    pub dashed: bool,
}

impl<'a> EcdfSeries<'a> {
    pub fn new(label: &'a str, points: &'a [EcdfPoint], dashed: bool) -> Self {
        Self { label, points, dashed }
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let (x0, x1) = if x1 > x0 { (x0, x1) } else { (x0 - 0.5, x0 + 0.5) };
        let (y0, y1) = if y1 > y0 { (y0, y1) } else { (y0 - 0.5, y0 + 0.5) };
        Self { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_L + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_L - MARGIN_R)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_B - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_T - MARGIN_B)
    }
}

fn open(svg: &mut String, frame: &Frame, x_label: &str, y_label: &str) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (l, r, t, b) = (MARGIN_L, WIDTH - MARGIN_R, MARGIN_T, HEIGHT - MARGIN_B);
    let _ = writeln!(
        svg,
        r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        r - l,
        b - t
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = frame.x0 + f * (frame.x1 - frame.x0);
        let yv = frame.y0 + f * (frame.y1 - frame.y0);
        let (x, y) = (frame.px(xv), frame.py(yv));
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.1}" y1="{b}" x2="{x:.1}" y2="{t}" stroke="lightgray"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{l}" y1="{y:.1}" x2="{r}" y2="{y:.1}" stroke="lightgray"/>"#
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#,
            b + 14.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{:.1}" text-anchor="end">{}</text>"#,
            l - 4.0,
            y + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{}" text-anchor="middle">{x_label}</text>"#,
        (l + r) / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="14" y="{:.1}" text-anchor="middle" transform="rotate(-90 14 {:.1})">{y_label}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0
    );
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn legend(svg: &mut String, i: usize, label: &str, color: &str, dashed: bool) {
    let x = WIDTH - MARGIN_R + 10.0;
    let y = MARGIN_T + 14.0 + 16.0 * i as f64;
    let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
    let _ = writeln!(
        svg,
        r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"{dash}/>"#,
        x + 20.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}">{}</text>"#,
        x + 24.0,
        y + 4.0,
        escape(label)
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Step plots of one or more ECDFs on shared axes. Dashed series are drawn
/// dashed.
pub fn ecdf_svg(series: &[EcdfSeries<'_>], x_label: &str) -> Result<String> {
    let all = series.iter().flat_map(|s| s.points.iter());
    let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.value), hi.max(p.value))
    });
    if !lo.is_finite() {
        return Err(Error::Empty("ECDF plot without points"));
    }
    let frame = Frame::new(lo, hi, 0.0, 1.0);
    let mut svg = String::new();
    open(&mut svg, &frame, &escape(x_label), "cumulative fraction");
    for (i, s) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = format!("M{:.2},{:.2}", frame.px(frame.x0), frame.py(0.0));
        let mut prev = 0.0;
        for p in s.points {
            let x = frame.px(p.value);
            let _ = write!(
                d,
                " L{x:.2},{:.2} L{x:.2},{:.2}",
                frame.py(prev),
                frame.py(p.cumulative_fraction)
            );
            prev = p.cumulative_fraction;
        }
        let _ = write!(d, " L{:.2},{:.2}", frame.px(frame.x1), frame.py(prev));
        let dash = if s.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            svg,
            r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#
        );
        legend(&mut svg, i, s.label, color, s.dashed);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Gain-versus-angle plot of one or more pattern cuts, clipped at `floor_db`.
pub fn pattern_svg(cuts: &[(&str, &[(f64, f64)])], x_label: &str, floor_db: f64) -> Result<String> {
    let all = cuts.iter().flat_map(|(_, c)| c.iter());
    let (x0, x1, top) = all.fold((f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY), |acc, &(a, g)| {
        (acc.0.min(a), acc.1.max(a), acc.2.max(g))
    });
    if !x0.is_finite() {
        return Err(Error::Empty("pattern plot without points"));
    }
    let y1 = (top / 5.0).ceil() * 5.0;
    let frame = Frame::new(x0, x1, floor_db.min(y1 - 5.0), y1);
    let mut svg = String::new();
    open(&mut svg, &frame, &escape(x_label), "gain (dBi)");
    for (i, (label, cut)) in cuts.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let mut d = String::new();
        for (k, &(a, g)) in cut.iter().enumerate() {
            let cmd = if k == 0 { 'M' } else { 'L' };
            let _ = write!(d, "{cmd}{:.2},{:.2} ", frame.px(a), frame.py(g.max(frame.y0)));
        }
        let _ = writeln!(
            svg,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
            d.trim_end()
        );
        legend(&mut svg, i, label, color, false);
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ecdf_plot_marks_dashed_series() {
        let pts = [
            EcdfPoint {
                value: 0.1,
                cumulative_fraction: 0.5,
            },
            EcdfPoint {
                value: 0.3,
                cumulative_fraction: 1.0,
            },
        ];
        let svg = ecdf_svg(
            &[
                EcdfSeries::new("static", &pts, true),
                EcdfSeries::new("tracking", &pts, false),
            ],
            "x",
        )
        .unwrap();
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("stroke-dasharray").count(), 2);
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_plots_are_errors() {
        assert!(ecdf_svg(&[], "x").is_err());
        assert!(pattern_svg(&[], "x", -40.0).is_err());
    }
}
