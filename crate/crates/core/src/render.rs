//! SVG output: averaged weak-classifier decision maps over a 2-D input
//! plane and class-colored scatter plots.

use std::fmt::Write as _;

use crate::error::{contract, FocaError, Result};
use crate::linalg::Matrix;
use crate::nn::{self, NetworkParams};
use crate::weak::ensemble_average_output;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 20.0;
const LEGEND_WIDTH: f64 = 80.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

/// Color for a class id; ids beyond the palette get evenly spaced hues.
pub fn class_color(class: usize) -> String {
    match PALETTE.get(class) {
        Some(c) => (*c).to_string(),
        None => format!("hsl({},70%,45%)", (class * 137) % 360),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Bounds {
    /// Bounding box of the rows of a 2-column matrix, padded by `pad` on
    /// every side.
    pub fn around(points: &Matrix, pad: f64) -> Bounds {
        let mut b = Bounds {
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        };
        for r in points.iter_rows() {
            b.x_min = b.x_min.min(r[0]);
            b.x_max = b.x_max.max(r[0]);
            b.y_min = b.y_min.min(r[1]);
            b.y_max = b.y_max.max(r[1]);
        }
        if !b.x_min.is_finite() {
            return Bounds { x_min: -1.0, x_max: 1.0, y_min: -1.0, y_max: 1.0 };
        }
        let (px, py) = (
            ((b.x_max - b.x_min) * pad).max(1e-6),
            ((b.y_max - b.y_min) * pad).max(1e-6),
        );
        Bounds { x_min: b.x_min - px, x_max: b.x_max + px, y_min: b.y_min - py, y_max: b.y_max + py }
    }

    fn to_canvas(&self, x: f64, y: f64, w: f64, h: f64) -> (f64, f64) {
        let cx = MARGIN + (x - self.x_min) / (self.x_max - self.x_min) * w;
        let cy = MARGIN + (self.y_max - y) / (self.y_max - self.y_min) * h;
        (cx, cy)
    }
}

/// Two-color diverging map: −1 ↦ blue, 0 ↦ white, +1 ↦ orange (clamped).
fn diverging(v: f64) -> String {
    let t = v.clamp(-1.0, 1.0);
    let (r, g, b) = if t >= 0.0 { (230.0, 126.0, 34.0) } else { (41.0, 128.0, 185.0) };
    let a = t.abs();
    let mix = |c: f64| (255.0 + (c - 255.0) * a).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(r), mix(g), mix(b))
}

fn svg_open(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
}

/// Evaluates the mean weak-classifier output over a `resolution²` grid of
/// the input plane (through `extractor` when given) and draws it as colored
/// cells, then overlays the data points: label 1 (+1 targets) black,
/// label 0 (−1 targets) white.
pub fn render_decision_map(
    extractor: Option<&NetworkParams>,
    classifiers: &[NetworkParams],
    bounds: Bounds,
    resolution: usize,
    points: Option<(&Matrix, &[usize])>,
) -> Result<String> {
    let input_dim = match (extractor, classifiers.first()) {
        (Some(e), _) => e.input_dim(),
        (None, Some(c)) => c.input_dim(),
        (None, None) => return contract("decision map needs at least one classifier"),
    };
    if input_dim != 2 {
        return Err(FocaError::Contract(format!(
            "decision maps are only supported for 2-D inputs, got {input_dim}"
        )));
    }
    if resolution == 0 {
        return contract("grid resolution must be positive");
    }
    let (w, h) = (WIDTH - 2.0 * MARGIN, HEIGHT - 2.0 * MARGIN);
    let (cw, ch) = (w / resolution as f64, h / resolution as f64);
    let mut out = String::new();
    svg_open(&mut out, WIDTH, HEIGHT);
    out.push_str("<g class=\"map\">\n");
    for iy in 0..resolution {
        for ix in 0..resolution {
            let x = bounds.x_min + (ix as f64 + 0.5) / resolution as f64 * (bounds.x_max - bounds.x_min);
            let y = bounds.y_max - (iy as f64 + 0.5) / resolution as f64 * (bounds.y_max - bounds.y_min);
            let feature = match extractor {
                Some(e) => nn::predict(e, &[x, y])?,
                None => vec![x, y],
            };
            let y_out = ensemble_average_output(classifiers, &feature)?;
            let v = match y_out.len() {
                1 => y_out[0],
                2 => y_out[1] - y_out[0],
                d => return contract(format!("decision maps need 1 or 2 outputs, got {d}")),
            };
            let _ = writeln!(
                out,
                r#"<rect class="cell" x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="{}"/>"#,
                MARGIN + ix as f64 * cw,
                MARGIN + iy as f64 * ch,
                cw,
                ch,
                diverging(v)
            );
        }
    }
    out.push_str("</g>\n");
    if let Some((pts, labels)) = points {
        if pts.cols() != 2 || pts.rows() != labels.len() {
            return contract("overlay points must be 2-D with one label each");
        }
        out.push_str("<g class=\"points\">\n");
        for (r, &l) in pts.iter_rows().zip(labels) {
            let (cx, cy) = bounds.to_canvas(r[0], r[1], w, h);
            let fill = if l == 1 { "#000000" } else { "#ffffff" };
            let _ = writeln!(
                out,
                r##"<circle cx="{cx:.3}" cy="{cy:.3}" r="3" fill="{fill}" stroke="#333333" stroke-width="0.8"/>"##
            );
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Scatter plot of 2-D points, one fixed color per class id and a legend
/// entry for each of `num_classes` classes.
pub fn render_scatter(points: &Matrix, labels: &[usize], num_classes: usize) -> Result<String> {
    if points.rows() != labels.len() {
        return contract("one label per point required");
    }
    if points.rows() > 0 && points.cols() != 2 {
        return contract("scatter plots need 2-D points");
    }
    let bounds = Bounds::around(points, 0.05);
    let (w, h) = (WIDTH - 2.0 * MARGIN - LEGEND_WIDTH, HEIGHT - 2.0 * MARGIN);
    let mut out = String::new();
    svg_open(&mut out, WIDTH, HEIGHT);
    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN}" y="{MARGIN}" width="{w}" height="{h}" fill="none" stroke="#999999"/>"##
    );
    out.push_str("<g class=\"points\">\n");
    for (r, &l) in points.iter_rows().zip(labels) {
        let (cx, cy) = bounds.to_canvas(r[0], r[1], w, h);
        let _ = writeln!(out, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="2" fill="{}"/>"#, class_color(l));
    }
    out.push_str("</g>\n<g class=\"legend\">\n");
    let x0 = WIDTH - MARGIN - LEGEND_WIDTH + 10.0;
    for c in 0..num_classes {
        let y = MARGIN + 8.0 + 16.0 * c as f64;
        let _ = writeln!(
            out,
            r#"<g class="legend-entry"><rect x="{x0}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{}" y="{:.1}" font-size="11">class {c}</text></g>"#,
            y - 8.0,
            class_color(c),
            x0 + 14.0,
            y + 1.0
        );
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}
