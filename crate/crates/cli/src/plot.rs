//! Heatmaps of distance matrices and scatter plots of embeddings, as PNG
//! and SVG.

use std::fmt::Write as _;

use image::{Rgb, RgbImage};

/// Cell size of heatmap PNGs, in pixels.
const CELL: u32 = 12;
const SCATTER_SIZE: u32 = 480;
const MARGIN: f64 = 24.0;

/// Dark blue for 0 through white to dark red for 1.
pub fn ramp(v: f64) -> [u8; 3] {
    let v = if v.is_finite() { v.clamp(0.0, 1.0) } else { 0.0 };
    let lerp = |a: f64, b: f64, t: f64| (a + (b - a) * t).round() as u8;
    if v < 0.5 {
        let t = v * 2.0;
        [lerp(30.0, 255.0, t), lerp(60.0, 255.0, t), lerp(150.0, 255.0, t)]
    } else {
        let t = (v - 0.5) * 2.0;
        [lerp(255.0, 170.0, t), lerp(255.0, 20.0, t), lerp(255.0, 30.0, t)]
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

pub fn heatmap_png(values: &[Vec<f64>]) -> RgbImage {
    let n = values.len().max(1) as u32;
    RgbImage::from_fn(n * CELL, n * CELL, |x, y| {
        let v = values.get((y / CELL) as usize).and_then(|r| r.get((x / CELL) as usize)).copied().unwrap_or(0.0);
        Rgb(ramp(v))
    })
}

pub fn heatmap_svg(title: &str, labels: &[String], values: &[Vec<f64>]) -> String {
    let n = labels.len();
    let cell = 16.0;
    let left = 8.0 * labels.iter().map(|l| l.len()).max().unwrap_or(1) as f64 + 8.0;
    let top = left + 20.0;
    let size = n as f64 * cell;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#,
        w = left + size + 8.0,
        h = top + size + 8.0
    );
    let _ = writeln!(s, r#"<text x="4" y="14" font-size="13">{}</text>"#, escape(title));
    for (i, l) in labels.iter().enumerate() {
        let c = i as f64 * cell + cell * 0.7;
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, left - 4.0, top + c, escape(l));
        let _ = writeln!(
            s,
            r#"<text transform="translate({},{}) rotate(-90)">{}</text>"#,
            left + c,
            top - 4.0,
            escape(l)
        );
    }
    for (i, row) in values.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let [r, g, b] = ramp(*v);
            let _ = writeln!(
                s,
                r#"<rect x="{}" y="{}" width="{cell}" height="{cell}" fill="rgb({r},{g},{b})"><title>{} / {}: {v:.4}</title></rect>"#,
                left + j as f64 * cell,
                top + i as f64 * cell,
                escape(&labels[i]),
                escape(&labels[j])
            );
        }
    }
    s.push_str("</svg>\n");
    s
}

fn scatter_positions(points: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let axis = |k: usize| {
        let vals: Vec<f64> = points.iter().map(|p| p.get(k).copied().unwrap_or(0.0)).collect();
        let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let span = if hi > lo { hi - lo } else { 1.0 };
        vals.into_iter().map(move |v| (v - lo) / span)
    };
    let inner = SCATTER_SIZE as f64 - 2.0 * MARGIN;
    axis(0).zip(axis(1)).map(|(x, y)| (MARGIN + x * inner, MARGIN + (1.0 - y) * inner)).collect()
}

/// First two embedding axes; `colors` (one per point) default to dark gray.
pub fn scatter_png(points: &[Vec<f64>], colors: Option<&[[u8; 3]]>) -> RgbImage {
    let mut img = RgbImage::from_pixel(SCATTER_SIZE, SCATTER_SIZE, Rgb([255, 255, 255]));
    for (i, (x, y)) in scatter_positions(points).into_iter().enumerate() {
        let c = colors.and_then(|c| c.get(i)).copied().unwrap_or([40, 40, 40]);
        for dy in -5i64..=5 {
            for dx in -5i64..=5 {
                let d2 = dx * dx + dy * dy;
                if d2 > 25 {
                    continue;
                }
                let (px, py) = (x.round() as i64 + dx, y.round() as i64 + dy);
                if px >= 0 && py >= 0 && (px as u32) < SCATTER_SIZE && (py as u32) < SCATTER_SIZE {
                    let fill = if d2 > 16 { [0, 0, 0] } else { c };
                    img.put_pixel(px as u32, py as u32, Rgb(fill));
                }
            }
        }
    }
    img
}

pub fn scatter_svg(title: &str, labels: &[String], points: &[Vec<f64>], colors: Option<&[[u8; 3]]>) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SCATTER_SIZE}" height="{SCATTER_SIZE}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="4" y="14" font-size="13">{}</text>"#, escape(title));
    for (i, (x, y)) in scatter_positions(points).into_iter().enumerate() {
        let [r, g, b] = colors.and_then(|c| c.get(i)).copied().unwrap_or([40, 40, 40]);
        let label = labels.get(i).map(String::as_str).unwrap_or("");
        let _ = writeln!(
            s,
            r#"<circle cx="{x:.2}" cy="{y:.2}" r="5" fill="rgb({r},{g},{b})" stroke="black"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            x + 7.0,
            y + 4.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}
