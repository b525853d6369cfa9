//! SVG emitters: BEV overlays and simple line plots.
//!
//! Overlays use a fixed 10 px/m scale with the y-axis flipped for screen
//! coordinates. Ground-truth boxes are green, median boxes blue, hulls
//! red.

use crate::gridmap::{GridMap, LAYER_DETECTIONS};
use crate::uncert::{HullPolygon, OrientedBox};

const SCALE: f64 = 10.0;

struct Viewport {
    x_min: f64,
    y_max: f64,
    width_px: f64,
    height_px: f64,
}

impl Viewport {
    fn to_screen(&self, x: f64, y: f64) -> (f64, f64) {
        ((x - self.x_min) * SCALE, (self.y_max - y) * SCALE)
    }
}

fn polygon_element(view: &Viewport, points: &[(f64, f64)], stroke: &str) -> String {
    let coords: Vec<String> = points
        .iter()
        .map(|&(x, y)| {
            let (sx, sy) = view.to_screen(x, y);
            format!("{sx:.2},{sy:.2}")
        })
        .collect();
    format!(
        "<polygon points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.5\"/>\n",
        coords.join(" ")
    )
}

/// Render an overlay of grid occupancy, ground-truth boxes (green),
/// median boxes (blue) and hulls (red).
pub fn svg_overlay(
    grid: Option<&GridMap>,
    ground_truths: &[OrientedBox],
    medians: &[OrientedBox],
    hulls: &[HullPolygon],
) -> String {
    let view = viewport(grid, ground_truths, medians, hulls);
    let mut out = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0}\" height=\"{:.0}\" viewBox=\"0 0 {:.0} {:.0}\">\n",
        view.width_px, view.height_px, view.width_px, view.height_px
    );
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");

    if let Some(grid) = grid {
        let detections = grid.layer(LAYER_DETECTIONS).unwrap_or(&[]);
        let max = detections.iter().cloned().fold(0.0f64, f64::max).max(1.0);
        let cols = grid.cols();
        let cell_px = grid.config.cell_size * SCALE;
        for (i, &count) in detections.iter().enumerate() {
            if count <= 0.0 {
                continue;
            }
            let (row, col) = (i / cols, i % cols);
            let (cx, cy) = grid.config.cell_center(row, col);
            let (sx, sy) = view.to_screen(
                cx - grid.config.cell_size / 2.0,
                cy + grid.config.cell_size / 2.0,
            );
            let shade = (230.0 - 180.0 * (count / max).sqrt()) as u8;
            out.push_str(&format!(
                "<rect x=\"{sx:.2}\" y=\"{sy:.2}\" width=\"{cell_px:.2}\" height=\"{cell_px:.2}\" fill=\"rgb({shade},{shade},{shade})\"/>\n"
            ));
        }
    }

    for hull in hulls {
        let pts: Vec<(f64, f64)> = hull.vertices().iter().map(|v| (v.x, v.y)).collect();
        out.push_str(&polygon_element(&view, &pts, "red"));
    }
    for b in medians {
        let pts: Vec<(f64, f64)> = b.corners().iter().map(|v| (v.x, v.y)).collect();
        out.push_str(&polygon_element(&view, &pts, "blue"));
    }
    for b in ground_truths {
        let pts: Vec<(f64, f64)> = b.corners().iter().map(|v| (v.x, v.y)).collect();
        out.push_str(&polygon_element(&view, &pts, "green"));
    }
    out.push_str("</svg>\n");
    out
}

fn viewport(
    grid: Option<&GridMap>,
    ground_truths: &[OrientedBox],
    medians: &[OrientedBox],
    hulls: &[HullPolygon],
) -> Viewport {
    if let Some(g) = grid {
        return Viewport {
            x_min: g.config.x_min,
            y_max: g.config.y_max,
            width_px: (g.config.x_max - g.config.x_min) * SCALE,
            height_px: (g.config.y_max - g.config.y_min) * SCALE,
        };
    }
    let mut x0 = f64::INFINITY;
    let mut x1 = f64::NEG_INFINITY;
    let mut y0 = f64::INFINITY;
    let mut y1 = f64::NEG_INFINITY;
    let mut grow = |x: f64, y: f64| {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    };
    for b in ground_truths.iter().chain(medians) {
        for c in b.corners() {
            grow(c.x, c.y);
        }
    }
    for h in hulls {
        for v in h.vertices() {
            grow(v.x, v.y);
        }
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 10.0, 0.0, 10.0);
    }
    let margin = 2.0;
    Viewport {
        x_min: x0 - margin,
        y_max: y1 + margin,
        width_px: (x1 - x0 + 2.0 * margin) * SCALE,
        height_px: (y1 - y0 + 2.0 * margin) * SCALE,
    }
}

/// One named line of a plot.
#[derive(Debug, Clone)]
pub struct PlotSeries {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

/// Minimal line plot with axes, tick labels and a legend.
pub fn svg_line_plot(title: &str, x_label: &str, y_label: &str, series: &[PlotSeries]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 360.0;
    const ML: f64 = 60.0;
    const MR: f64 = 20.0;
    const MT: f64 = 30.0;
    const MB: f64 = 45.0;
    const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 1.0f64, 0.0f64, 1.0f64);
    if !all.is_empty() {
        x0 = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        x1 = all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
        y0 = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).min(0.0);
        y1 = all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        if x1 <= x0 {
            x1 = x0 + 1.0;
        }
        if y1 <= y0 {
            y1 = y0 + 1.0;
        }
    }
    let sx = |x: f64| ML + (x - x0) / (x1 - x0) * (W - ML - MR);
    let sy = |y: f64| H - MB - (y - y0) / (y1 - y0) * (H - MT - MB);

    let mut out = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    out.push_str(&format!(
        "<text x=\"{:.0}\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">{title}</text>\n",
        W / 2.0
    ));
    // axes
    out.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{MT}\" x2=\"{ML}\" y2=\"{:.0}\" stroke=\"black\"/>\n",
        H - MB
    ));
    out.push_str(&format!(
        "<line x1=\"{ML}\" y1=\"{:.0}\" x2=\"{:.0}\" y2=\"{:.0}\" stroke=\"black\"/>\n",
        H - MB,
        W - MR,
        H - MB
    ));
    for i in 0..=4 {
        let fx = x0 + (x1 - x0) * i as f64 / 4.0;
        let fy = y0 + (y1 - y0) * i as f64 / 4.0;
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"10\">{fx:.2}</text>\n",
            sx(fx),
            H - MB + 15.0
        ));
        out.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"10\">{fy:.3}</text>\n",
            ML - 5.0,
            sy(fy) + 3.0
        ));
    }
    out.push_str(&format!(
        "<text x=\"{:.0}\" y=\"{:.0}\" text-anchor=\"middle\" font-size=\"12\">{x_label}</text>\n",
        (ML + W - MR) / 2.0,
        H - 8.0
    ));
    out.push_str(&format!(
        "<text x=\"14\" y=\"{:.0}\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 {:.0})\">{y_label}</text>\n",
        (MT + H - MB) / 2.0,
        (MT + H - MB) / 2.0
    ));

    for (si, s) in series.iter().enumerate() {
        let color = COLORS[si % COLORS.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect();
        if !coords.is_empty() {
            out.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
                coords.join(" ")
            ));
        }
        out.push_str(&format!(
            "<text x=\"{:.0}\" y=\"{:.0}\" font-size=\"11\" fill=\"{color}\">{}</text>\n",
            W - MR - 150.0,
            MT + 14.0 * (si as f64 + 1.0),
            s.name
        ));
    }
    out.push_str("</svg>\n");
    out
}
