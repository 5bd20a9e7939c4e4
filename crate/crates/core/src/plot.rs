//! Minimal static SVG line charts.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

const WIDTH: f64 = 960.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 40.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub label: String,
    /// Index of the first value on the shared x axis.
    pub offset: usize,
    pub values: Vec<f64>,
}

impl PlotSeries {
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self {
            label: label.into(),
            offset: 0,
            values,
        }
    }

    pub fn with_offset(mut self, offset: usize) -> Self {
        self.offset = offset;
        self
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders one polyline per series with axes, tick labels and a legend.
/// Output depends only on the input.
pub fn render_svg(title: &str, series: &[PlotSeries]) -> Result<String> {
    if series.is_empty() {
        return Err(Error::Empty("plot series list"));
    }
    if series.iter().any(|s| s.values.is_empty()) {
        return Err(Error::Empty("plot series"));
    }
    if series.iter().flat_map(|s| &s.values).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("plot values"));
    }

    let x_max = series.iter().map(|s| s.offset + s.values.len() - 1).max().unwrap_or(0).max(1) as f64;
    let (mut y_min, mut y_max) = series
        .iter()
        .flat_map(|s| &s.values)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if y_min == y_max {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let sx = |x: f64| MARGIN_LEFT + x / x_max * plot_w;
    let sy = |y: f64| MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="20" font-family="sans-serif" font-size="14" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    let x0 = MARGIN_LEFT;
    let y0 = MARGIN_TOP + plot_h;
    let _ = writeln!(
        svg,
        r#"<path d="M{x0:.1},{MARGIN_TOP:.1} L{x0:.1},{y0:.1} L{:.1},{y0:.1}" stroke="black" fill="none"/>"#,
        MARGIN_LEFT + plot_w
    );
    for k in 0..=4 {
        let frac = k as f64 / 4.0;
        let yv = y_min + frac * (y_max - y_min);
        let y = sy(yv);
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            y + 3.0,
            format_tick(yv)
        );
        let xv = frac * x_max;
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="10" text-anchor="middle">{}</text>"#,
            sx(xv),
            y0 + 16.0,
            xv.round()
        );
    }

    for (n, s) in series.iter().enumerate() {
        let colour = PALETTE[n % PALETTE.len()];
        let points: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| format!("{:.2},{:.2}", sx((s.offset + i) as f64), sy(v)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{colour}" stroke-width="1" points="{}"/>"#,
            points.join(" ")
        );
        let ly = MARGIN_TOP + 12.0 + 16.0 * n as f64;
        let lx = MARGIN_LEFT + plot_w - 150.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{colour}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11">{}</text>"#,
            lx + 26.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn format_tick(v: f64) -> String {
    if v.abs() >= 1000.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.3}")
    }
}

pub fn emit_plot(title: &str, series: &[PlotSeries], path: &Path) -> Result<()> {
    std::fs::write(path, render_svg(title, series)?)?;
    Ok(())
}
