//! Annotated copy of a pattern marking detected centers and axes.

use super::classify::SymmetrySignature;
use super::search::row_spacing;
use crate::error::Result;
use crate::geometry::{polygon_contains, Line, Point2, Vec2};
use crate::groups::shortest_along;
use crate::raster::{Color, RasterPattern};

const MIRROR: Color = [0, 150, 60];
const GLIDE: Color = [240, 140, 0];
const MARKER_RADIUS: f64 = 6.0;

fn marker_color(order: u32) -> Color {
    match order {
        2 => [200, 0, 200],
        3 => [220, 30, 30],
        4 => [30, 30, 220],
        _ => [20, 20, 20],
    }
}

fn draw_family(rgb: &mut [Color], w: usize, h: usize, sig: &SymmetrySignature, line: &Line, color: Color, dashed: bool) {
    let d = line.direction.normalized();
    let n = d.perp();
    let s = row_spacing(&sig.lattice, shortest_along(&sig.lattice, d));
    for y in 0..h {
        for x in 0..w {
            let p = Vec2::new(x as f64, y as f64) - line.point;
            let off = n.dot(p).rem_euclid(s);
            if off.min(s - off) > 0.75 {
                continue;
            }
            if dashed && d.dot(p).rem_euclid(10.0) >= 5.0 {
                continue;
            }
            rgb[y * w + x] = color;
        }
    }
}

fn draw_marker(rgb: &mut [Color], w: usize, h: usize, c: Point2, order: u32) {
    let sides = if order == 2 { 4 } else { order as usize };
    let phase = if order == 4 { std::f64::consts::FRAC_PI_4 } else { 0.0 };
    let poly: Vec<Point2> = (0..sides)
        .map(|k| {
            let a = phase + std::f64::consts::TAU * k as f64 / sides as f64;
            let r = if order == 2 && k % 2 == 1 { MARKER_RADIUS * 0.55 } else { MARKER_RADIUS };
            c + Vec2::new(a.cos(), a.sin()) * r
        })
        .collect();
    let (x0, x1) = ((c.x - MARKER_RADIUS).floor().max(0.0) as usize, (c.x + MARKER_RADIUS).ceil().max(0.0) as usize);
    let (y0, y1) = ((c.y - MARKER_RADIUS).floor().max(0.0) as usize, (c.y + MARKER_RADIUS).ceil().max(0.0) as usize);
    for y in y0..=y1.min(h.saturating_sub(1)) {
        for x in x0..=x1.min(w.saturating_sub(1)) {
            if polygon_contains(&poly, Vec2::new(x as f64, y as f64), 0.0) {
                rgb[y * w + x] = marker_color(order);
            }
        }
    }
}

/// Copy of `pattern` with mirrors (solid), glides (dashed) and rotation
/// centers (polygon markers with as many corners as their order, rhombi for
/// two-fold centers) drawn over every lattice translate.
pub fn annotate(pattern: &RasterPattern, sig: &SymmetrySignature) -> Result<RasterPattern> {
    let (w, h) = (pattern.width(), pattern.height());
    let mut rgb = pattern.rgb().to_vec();
    for m in &sig.mirror_axes {
        draw_family(&mut rgb, w, h, sig, &m.line, MIRROR, false);
    }
    for g in &sig.glide_axes {
        draw_family(&mut rgb, w, h, sig, &g.line, GLIDE, true);
    }
    let l = &sig.lattice;
    let corners = [Vec2::ZERO, Vec2::new(w as f64, 0.0), Vec2::new(0.0, h as f64), Vec2::new(w as f64, h as f64)];
    for (&order, list) in &sig.rotation_centers {
        for c in list {
            let fr: Vec<Vec2> = corners.iter().map(|p| l.to_frac(*p - c.center)).collect();
            let (i0, i1) = (fr.iter().map(|f| f.x).fold(f64::MAX, f64::min).floor() as i64 - 1, fr.iter().map(|f| f.x).fold(f64::MIN, f64::max).ceil() as i64 + 1);
            let (j0, j1) = (fr.iter().map(|f| f.y).fold(f64::MAX, f64::min).floor() as i64 - 1, fr.iter().map(|f| f.y).fold(f64::MIN, f64::max).ceil() as i64 + 1);
            for i in i0..=i1 {
                for j in j0..=j1 {
                    let p = c.center + l.to_pattern(Vec2::new(i as f64, j as f64));
                    if p.x > -MARKER_RADIUS && p.y > -MARKER_RADIUS && p.x < w as f64 + MARKER_RADIUS && p.y < h as f64 + MARKER_RADIUS {
                        draw_marker(&mut rgb, w, h, p, order);
                    }
                }
            }
        }
    }
    RasterPattern::from_rgb(w, h, rgb)
}
