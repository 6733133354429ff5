//! Minimal SVG writer in world coordinates (y up).

use std::fmt::Write;

use crate::geom::{pt, Point};

pub struct Canvas {
    lo: Point,
    hi: Point,
    scale: f64,
    margin: f64,
    body: String,
}

/// Paired colours so Ω_{i→j} and N_{i→j} share a hue.
pub const PALETTE: [&str; 10] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"];

pub fn colour(k: usize) -> &'static str {
    PALETTE[k % PALETTE.len()]
}

impl Canvas {
    /// Canvas showing `[lo, hi]` at roughly `width` pixels across.
    pub fn new(lo: Point, hi: Point, width: f64) -> Canvas {
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
        Canvas { lo, hi, scale: width / span, margin: 10.0, body: String::new() }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        (self.margin + (p.x - self.lo.x) * self.scale, self.margin + (self.hi.y - p.y) * self.scale)
    }

    fn coords(&self, pts: &[Point]) -> String {
        pts.iter()
            .map(|&p| {
                let (x, y) = self.map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn polygon(&mut self, pts: &[Point], fill: &str, opacity: f64, stroke: Option<&str>) {
        let s = stroke.map_or("none".to_string(), |c| c.to_string());
        let c = self.coords(pts);
        let _ = writeln!(
            self.body,
            r#"<polygon points="{c}" fill="{fill}" fill-opacity="{opacity:.2}" stroke="{s}" stroke-width="0.8"/>"#
        );
    }

    pub fn polyline(&mut self, pts: &[Point], stroke: &str, width: f64, class: &str) {
        if pts.len() < 2 {
            return;
        }
        let c = self.coords(pts);
        let _ = writeln!(
            self.body,
            r#"<polyline class="{class}" points="{c}" fill="none" stroke="{stroke}" stroke-width="{width:.2}"/>"#
        );
    }

    pub fn line(&mut self, a: Point, b: Point, stroke: &str, width: f64, class: &str) {
        self.polyline(&[a, b], stroke, width, class);
    }

    pub fn dot(&mut self, p: Point, r: f64, fill: &str) {
        let (x, y) = self.map(p);
        let _ = writeln!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="{r:.1}" fill="{fill}"/>"#);
    }

    pub fn text(&mut self, p: Point, s: &str, size: f64) {
        let (x, y) = self.map(p);
        let esc = s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
        let _ = writeln!(self.body, r#"<text x="{x:.2}" y="{y:.2}" font-size="{size:.0}" font-family="sans-serif">{esc}</text>"#);
    }

    pub fn finish(self) -> String {
        let (w, h) = self.map(pt(self.hi.x, self.lo.y));
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            w + self.margin,
            h + self.margin,
            self.body
        )
    }
}
