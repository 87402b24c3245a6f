//! Minimal SVG emission: line plots and polar heatmaps, written as
//! plain files. Deterministic output (fixed-precision coordinates, no
//! timestamps).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::LabError;

const W: f64 = 720.0;
const H: f64 = 480.0;
const MARGIN: f64 = 50.0;

pub struct LinePlot {
    title: String,
    series: Vec<(String, Vec<(f64, f64)>)>,
}

impl LinePlot {
    pub fn new(title: &str) -> LinePlot {
        LinePlot {
            title: title.to_string(),
            series: Vec::new(),
        }
    }

    pub fn series(mut self, name: &str, points: Vec<(f64, f64)>) -> LinePlot {
        self.series.push((name.to_string(), points));
        self
    }

    pub fn write(&self, path: &Path) -> Result<(), LabError> {
        let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
        for (_, pts) in &self.series {
            for &(x, y) in pts {
                xmin = xmin.min(x);
                xmax = xmax.max(x);
                ymin = ymin.min(y);
                ymax = ymax.max(y);
            }
        }
        if !xmin.is_finite() {
            xmin = 0.0;
            xmax = 1.0;
            ymin = 0.0;
            ymax = 1.0;
        }
        if (ymax - ymin).abs() < 1e-300 {
            ymax = ymin + 1.0;
        }
        if (xmax - xmin).abs() < 1e-300 {
            xmax = xmin + 1.0;
        }
        let sx = |x: f64| MARGIN + (x - xmin) / (xmax - xmin) * (W - 2.0 * MARGIN);
        let sy = |y: f64| H - MARGIN - (y - ymin) / (ymax - ymin) * (H - 2.0 * MARGIN);
        let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">"
        );
        let _ = writeln!(svg, "<rect width=\"{W}\" height=\"{H}\" fill=\"white\"/>");
        let _ = writeln!(
            svg,
            "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">{}</text>",
            MARGIN, self.title
        );
        // Axes.
        let _ = write!(
            svg,
            "<line x1=\"{m:.1}\" y1=\"{b:.1}\" x2=\"{r:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n<line x1=\"{m:.1}\" y1=\"{t:.1}\" x2=\"{m:.1}\" y2=\"{b:.1}\" stroke=\"black\"/>\n",
            m = MARGIN,
            r = W - MARGIN,
            t = MARGIN,
            b = H - MARGIN
        );
        for tick in [xmin, xmax] {
            let _ = writeln!(
                svg,
                "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\">{:.3}</text>",
                sx(tick) - 10.0,
                H - MARGIN + 18.0,
                tick
            );
        }
        for tick in [ymin, ymax] {
            let _ = writeln!(
                svg,
                "<text x=\"4\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\">{:.3}</text>",
                sy(tick) + 4.0,
                tick
            );
        }
        for (idx, (name, pts)) in self.series.iter().enumerate() {
            let color = palette[idx % palette.len()];
            let mut d = String::new();
            for &(x, y) in pts {
                let _ = write!(d, "{:.2},{:.2} ", sx(x), sy(y));
            }
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                d.trim_end()
            );
            let _ = writeln!(
                svg,
                "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\" fill=\"{color}\">{name}</text>",
                W - MARGIN - 150.0,
                MARGIN + 16.0 * (idx + 1) as f64
            );
        }
        svg.push_str("</svg>\n");
        fs::write(path, svg)?;
        Ok(())
    }
}

/// Diverging blue-white-red map for a value in [-1, 1].
fn diverging_color(t: f64) -> String {
    let t = t.clamp(-1.0, 1.0);
    let (r, g, b) = if t < 0.0 {
        let s = 1.0 + t; // 0 at -1, 1 at 0
        ((255.0 * s) as u8, (255.0 * s) as u8, 255u8)
    } else {
        let s = 1.0 - t;
        (255u8, (255.0 * s) as u8, (255.0 * s) as u8)
    };
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Heatmap of per-cell values on a polar grid, drawn as quadrilaterals.
pub fn write_polar_heatmap(
    path: &Path,
    title: &str,
    n_r: usize,
    n_theta: usize,
    r1: f64,
    r2: f64,
    values: &[f64],
) -> Result<(), LabError> {
    let size = 560.0;
    let c = size / 2.0;
    let scale = (size / 2.0 - 20.0) / r2;
    let vmax = values
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1e-300);
    let dr = (r2 - r1) / (n_r - 1) as f64;
    let dth = 2.0 * std::f64::consts::PI / n_theta as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{h}\" viewBox=\"0 0 {size} {h}\">",
        h = size + 30.0
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{size}\" height=\"{}\" fill=\"white\"/>",
        size + 30.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"12\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">{title} (|max| = {vmax:.3e})</text>"
    );
    for i in 0..n_r {
        let r_lo = (r1 + dr * i as f64 - 0.5 * dr).max(r1);
        let r_hi = (r1 + dr * i as f64 + 0.5 * dr).min(r2);
        for j in 0..n_theta {
            let v = values[i * n_theta + j] / vmax;
            let t_lo = dth * j as f64 - 0.5 * dth;
            let t_hi = dth * j as f64 + 0.5 * dth;
            let pt = |r: f64, t: f64| (c + scale * r * t.cos(), 30.0 + c - scale * r * t.sin());
            let (x1, y1) = pt(r_lo, t_lo);
            let (x2, y2) = pt(r_hi, t_lo);
            let (x3, y3) = pt(r_hi, t_hi);
            let (x4, y4) = pt(r_lo, t_hi);
            let _ = writeln!(
                svg,
                "<polygon points=\"{x1:.2},{y1:.2} {x2:.2},{y2:.2} {x3:.2},{y3:.2} {x4:.2},{y4:.2}\" fill=\"{}\" stroke=\"none\"/>",
                diverging_color(v)
            );
        }
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg)?;
    Ok(())
}
