//! Deterministic SVG rendering of trajectory sets.

use std::fmt::Write as _;

use crate::geometry::Point2;

const CANVAS: f64 = 800.0;
const MARGIN: f64 = 0.05;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub id: String,
    pub points: Vec<Point2<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvgOptions {
    /// Draw a marker at every `k`-th point; `None` draws no markers.
    pub marker_every: Option<usize>,
    pub title: Option<String>,
}

fn bounds(series: &[Series]) -> Option<(f64, f64, f64, f64)> {
    let mut it = series.iter().flat_map(|s| s.points.iter());
    let first = it.next()?;
    let init = (first.x, first.x, first.y, first.y);
    Some(it.fold(init, |(x0, x1, y0, y1), p| {
        (x0.min(p.x), x1.max(p.x), y0.min(p.y), y1.max(p.y))
    }))
}

/// One `<polyline>` per series, scaled uniformly into the canvas with a 5%
/// margin around the bounding box and positive y pointing up. Returns
/// `None` when there are no points.
pub fn render(series: &[Series], opts: &SvgOptions) -> Option<String> {
    let (x0, x1, y0, y1) = bounds(series)?;
    let (w, h) = ((x1 - x0).max(1e-12), (y1 - y0).max(1e-12));
    let (x0, y1) = (x0 - MARGIN * w, y1 + MARGIN * h);
    let (w, h) = (w * (1.0 + 2.0 * MARGIN), h * (1.0 + 2.0 * MARGIN));
    let scale = (CANVAS / w).min(CANVAS / h);
    let (width, height) = (w * scale, h * scale);
    let map = |p: &Point2<f64>| ((p.x - x0) * scale, (y1 - p.y) * scale);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.3}" height="{height:.3}" viewBox="0 0 {width:.3} {height:.3}">"#
    );
    if let Some(title) = &opts.title {
        let _ = writeln!(out, "<title>{}</title>", escape(title));
    }
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|p| {
                let (x, y) = map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline id="{}" fill="none" stroke="{color}" stroke-width="1" points="{}"/>"#,
            escape(&s.id),
            coords.join(" ")
        );
        if let Some(k) = opts.marker_every.filter(|&k| k > 0) {
            for p in s.points.iter().step_by(k) {
                let (x, y) = map(p);
                let _ = writeln!(out, r#"<circle cx="{x:.3}" cy="{y:.3}" r="2.5" fill="{color}"/>"#);
            }
        }
    }
    out.push_str("</svg>\n");
    Some(out)
}

/// Companion `series,index,x,y` listing of the plotted coordinates.
pub fn coordinates_csv(series: &[Series]) -> String {
    let mut out = String::from("series,index,x,y\n");
    for s in series {
        for (i, p) in s.points.iter().enumerate() {
            let _ = writeln!(out, "{},{i},{},{}", s.id, p.x, p.y);
        }
    }
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}
