//! Minimal static charts. Every series carries its raw data in `data-x` and
//! `data-values` attributes, written exactly as in the sibling CSV.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub struct Series {
    pub label: String,
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// Drawn thin and grey, for overlays.
    pub faint: bool,
}

impl Series {
    pub fn new(label: impl Into<String>, xs: Vec<f64>, ys: Vec<f64>) -> Self {
        Series { label: label.into(), xs, ys, faint: false }
    }

    pub fn faint(mut self) -> Self {
        self.faint = true;
        self
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    Line,
    Dots,
}

pub struct Chart<'a> {
    pub title: &'a str,
    pub x_label: &'a str,
    pub y_label: &'a str,
    pub mark: Mark,
    pub log_y: bool,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

pub fn render(chart: &Chart, series: &[Series]) -> String {
    let ty = |y: f64| if chart.log_y { if y > 0.0 { y.log10() } else { f64::NAN } } else { y };
    let (x0, x1) = bounds(series.iter().flat_map(|s| s.xs.iter().copied()).filter(|v| v.is_finite()));
    let (y0, y1) = bounds(series.iter().flat_map(|s| s.ys.iter().map(|&y| ty(y))).filter(|v| v.is_finite()));
    let px = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" font-size="15" text-anchor="middle" font-family="sans-serif">{}</text>"#,
        WIDTH / 2.0,
        escape(chart.title)
    );
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        out,
        r#"<path d="M{left} {top} L{left} {bottom} L{right} {bottom}" fill="none" stroke="black"/>"#
    );
    let tick = |v: f64| if chart.log_y { format!("1e{v:.1}") } else { format!("{v:.3}") };
    let _ = writeln!(
        out,
        r#"<g font-size="11" font-family="sans-serif"><text x="{left}" y="{}" text-anchor="middle">{x0}</text><text x="{right}" y="{}" text-anchor="middle">{x1}</text><text x="{}" y="{}" text-anchor="end">{}</text><text x="{}" y="{}" text-anchor="end">{}</text></g>"#,
        bottom + 16.0,
        bottom + 16.0,
        left - 4.0,
        bottom,
        tick(y0),
        left - 4.0,
        top + 4.0,
        tick(y1)
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="middle" font-family="sans-serif">{}</text>"#,
        WIDTH / 2.0,
        HEIGHT - 14.0,
        escape(chart.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{}" font-size="12" text-anchor="middle" font-family="sans-serif" transform="rotate(-90 16 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(chart.y_label)
    );

    let mut legend = 0;
    for (i, s) in series.iter().enumerate() {
        let color = if s.faint { "#bbbbbb" } else { COLORS[i % COLORS.len()] };
        let _ = writeln!(
            out,
            r#"<g class="series" data-label="{}" data-x="{}" data-values="{}">"#,
            escape(&s.label),
            join(&s.xs),
            join(&s.ys)
        );
        let points: Vec<(f64, f64)> = s
            .xs
            .iter()
            .zip(&s.ys)
            .map(|(&x, &y)| (x, ty(y)))
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|(x, y)| (px(x), py(y)))
            .collect();
        match chart.mark {
            Mark::Line => {
                let width = if s.faint { 0.6 } else { 1.8 };
                let pts: Vec<String> = points.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="{width}" points="{}"/>"#,
                    pts.join(" ")
                );
            }
            Mark::Dots => {
                for (x, y) in &points {
                    let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2" fill="{color}" fill-opacity="0.6"/>"#);
                }
            }
        }
        out.push_str("</g>\n");
        if !s.faint {
            let y = top + 14.0 * legend as f64;
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{y}" font-size="11" fill="{color}" text-anchor="end" font-family="sans-serif">{}</text>"#,
                right,
                escape(&s.label)
            );
            legend += 1;
        }
    }
    out.push_str("</svg>\n");
    out
}
