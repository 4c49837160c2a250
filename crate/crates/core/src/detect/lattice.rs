//! Translation lattice detection.
//!
//! A mean-squared-difference map over all shifts is computed on a 2x
//! downsampled copy: the cross term comes from an FFT autocorrelation and the
//! energy terms from summed-area tables. Its local minima are verified and
//! refined on the full-resolution pattern, and the refined vectors are fitted
//! to a basis by least squares.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::mismatch::{pattern_search, Evaluator};
use crate::error::{Error, Result};
use crate::geometry::{Isometry2, Vec2};
use crate::lattice::Lattice;
use crate::raster::RasterPattern;

/// Standard deviation below which an image counts as uniform.
const UNIFORM_STD: f64 = 1e-3;

fn fft2(data: &mut [Complex<f32>], w: usize, h: usize, inverse: bool) {
    let mut planner = FftPlanner::<f32>::new();
    let (row, col) = if inverse {
        (planner.plan_fft_inverse(w), planner.plan_fft_inverse(h))
    } else {
        (planner.plan_fft_forward(w), planner.plan_fft_forward(h))
    };
    for r in data.chunks_mut(w) {
        row.process(r);
    }
    let mut column = vec![Complex::new(0.0, 0.0); h];
    for x in 0..w {
        for y in 0..h {
            column[y] = data[y * w + x];
        }
        col.process(&mut column);
        for y in 0..h {
            data[y * w + x] = column[y];
        }
    }
}

/// Mean squared difference between the image and its shift by `(dx, dy)`,
/// for all `|dx| <= w/2`, `|dy| <= h/2`.
struct ShiftMap {
    hw: i64,
    hh: i64,
    values: Vec<f64>,
}

impl ShiftMap {
    fn get(&self, dx: i64, dy: i64) -> f64 {
        let i = ((dy + self.hh) * (2 * self.hw + 1) + dx + self.hw) as usize;
        self.values[i]
    }

    fn compute(planes: &[Vec<f64>], w: usize, h: usize) -> ShiftMap {
        let (pw, ph) = (2 * w, 2 * h);
        let (hw, hh) = ((w / 2) as i64, (h / 2) as i64);
        let mut acc = vec![0f64; ((2 * hw + 1) * (2 * hh + 1)) as usize];
        for plane in planes {
            let mean = plane.iter().sum::<f64>() / plane.len() as f64;
            let f: Vec<f64> = plane.iter().map(|v| v - mean).collect();
            let mut buf = vec![Complex::new(0f32, 0f32); pw * ph];
            for y in 0..h {
                for x in 0..w {
                    buf[y * pw + x] = Complex::new(f[y * w + x] as f32, 0.0);
                }
            }
            fft2(&mut buf, pw, ph, false);
            for c in buf.iter_mut() {
                *c = Complex::new(c.norm_sqr(), 0.0);
            }
            fft2(&mut buf, pw, ph, true);
            let norm = (pw * ph) as f64;
            // summed-area table of f^2
            let mut sat = vec![0f64; (w + 1) * (h + 1)];
            for y in 0..h {
                for x in 0..w {
                    sat[(y + 1) * (w + 1) + x + 1] =
                        f[y * w + x].powi(2) + sat[y * (w + 1) + x + 1] + sat[(y + 1) * (w + 1) + x] - sat[y * (w + 1) + x];
                }
            }
            let rect = |x0: usize, y0: usize, x1: usize, y1: usize| {
                sat[y1 * (w + 1) + x1] - sat[y0 * (w + 1) + x1] - sat[y1 * (w + 1) + x0] + sat[y0 * (w + 1) + x0]
            };
            for dy in -hh..=hh {
                for dx in -hw..=hw {
                    // pairs (x, x + d) with both inside
                    let (x0, x1) = ((-dx).max(0) as usize, (w as i64 - dx.max(0)) as usize);
                    let (y0, y1) = ((-dy).max(0) as usize, (h as i64 - dy.max(0)) as usize);
                    let count = ((x1 - x0) * (y1 - y0)) as f64;
                    let e1 = rect(x0, y0, x1, y1);
                    let e2 = rect(
                        (x0 as i64 + dx) as usize,
                        (y0 as i64 + dy) as usize,
                        (x1 as i64 + dx) as usize,
                        (y1 as i64 + dy) as usize,
                    );
                    let ix = dx.rem_euclid(pw as i64) as usize;
                    let iy = dy.rem_euclid(ph as i64) as usize;
                    let cross = buf[iy * pw + ix].re as f64 / norm;
                    let i = ((dy + hh) * (2 * hw + 1) + dx + hw) as usize;
                    acc[i] += ((e1 + e2 - 2.0 * cross) / count).max(0.0);
                }
            }
        }
        let n = planes.len() as f64;
        ShiftMap { hw, hh, values: acc.into_iter().map(|v| v / n).collect() }
    }

    /// Local minima over a 5x5 window in the half plane, best first.
    fn minima(&self, min_len: f64) -> Vec<(i64, i64, f64)> {
        let mut out = Vec::new();
        for dy in 0..=self.hh {
            for dx in -self.hw..=self.hw {
                if dy == 0 && dx <= 0 {
                    continue;
                }
                if ((dx * dx + dy * dy) as f64).sqrt() <= min_len {
                    continue;
                }
                let v = self.get(dx, dy);
                let mut is_min = true;
                'nb: for ny in -2..=2 {
                    for nx in -2..=2 {
                        let (x, y) = (dx + nx, dy + ny);
                        if (nx, ny) == (0, 0) || x.abs() > self.hw || y.abs() > self.hh {
                            continue;
                        }
                        let u = self.get(x, y);
                        if u < v || (u == v && (y, x) < (dy, dx)) {
                            is_min = false;
                            break 'nb;
                        }
                    }
                }
                if is_min {
                    out.push((dx, dy, v));
                }
            }
        }
        out.sort_by(|a, b| a.2.total_cmp(&b.2).then((a.1, a.0).cmp(&(b.1, b.0))));
        out
    }
}

fn downsample(pattern: &RasterPattern) -> (Vec<Vec<f64>>, usize, usize) {
    let (w, h) = (pattern.width() / 2, pattern.height() / 2);
    let mut planes = vec![vec![0f64; w * h]; 3];
    for y in 0..h {
        for x in 0..w {
            for (ch, plane) in planes.iter_mut().enumerate() {
                let s: u32 = [(0, 0), (1, 0), (0, 1), (1, 1)]
                    .iter()
                    .map(|(i, j)| pattern.get(2 * x + i, 2 * y + j)[ch] as u32)
                    .sum();
                plane[y * w + x] = s as f64 / (4.0 * 255.0);
            }
        }
    }
    (planes, w, h)
}

fn refine_translation(ev: &Evaluator, v: Vec2, theta: f64) -> (Vec2, f64) {
    let blurred = |p: &[f64]| ev.smooth(&Isometry2::translation(Vec2::new(p[0], p[1]))).unwrap_or(f64::INFINITY);
    let s = blurred(&[v.x, v.y]);
    if s > 2.0 * theta {
        return (v, s);
    }
    let (x, s) = pattern_search(blurred, &[v.x, v.y], 1.0, 0.5);
    if s > theta {
        return (Vec2::new(x[0], x[1]), s);
    }
    let score = |p: &[f64]| ev.sparse(&Isometry2::translation(Vec2::new(p[0], p[1]))).unwrap_or(f64::INFINITY);
    let (x, s) = pattern_search(score, &x, 0.5, 1.0 / 64.0);
    (Vec2::new(x[0], x[1]), s)
}

/// Detects the translation lattice of a periodic pattern.
pub fn detect_lattice(pattern: &RasterPattern, theta: f64) -> Result<Lattice> {
    detect_lattice_with(pattern, &Evaluator::new(pattern), theta)
}

pub fn detect_lattice_with(pattern: &RasterPattern, ev: &Evaluator, theta: f64) -> Result<Lattice> {
    if ev.sampler().mean_std() < UNIFORM_STD {
        return Err(Error::NoPeriodicity("uniform image".into()));
    }
    if pattern.width() < 16 || pattern.height() < 16 {
        return Err(Error::NoPeriodicity("image too small".into()));
    }
    let (planes, w, h) = downsample(pattern);
    let map = ShiftMap::compute(&planes, w, h);
    let mut found: Vec<Vec2> = Vec::new();
    for (dx, dy, _) in map.minima(2.0).into_iter().take(48) {
        let start = Vec2::new(2.0 * dx as f64, 2.0 * dy as f64);
        if found.iter().any(|u| u.dist(start) < 2.5 || u.dist(-start) < 2.5) {
            continue;
        }
        let (v, s) = refine_translation(ev, start, theta);
        // a refinement that wandered off belongs to another minimum
        if s < theta && v.dist(start) < 3.0 && !found.iter().any(|u| u.dist(v) < 1.5 || u.dist(-v) < 1.5) {
            found.push(v);
        }
    }
    found.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    let Some(&a) = found.first() else {
        return Err(Error::NoPeriodicity(format!("no translation scores below {theta}")));
    };
    let Some(&b) = found.iter().find(|v| a.cross(**v).abs() > 0.1 * a.norm() * v.norm()) else {
        return Err(Error::NoPeriodicity("translations found along a single direction only".into()));
    };
    let coarse = Lattice::new(a, b)?.reduced();
    let refined = fit_basis(ev, &coarse, theta);
    let reduced = refined.reduced();
    let canonical = reduced.canonical();
    Ok(canonical.snapped(canonical.class))
}

/// Least-squares basis through refined multiples `i a + j b`.
fn fit_basis(ev: &Evaluator, l: &Lattice, theta: f64) -> Lattice {
    let (hw, hh) = (ev.width() as f64 / 2.0, ev.height() as f64 / 2.0);
    let mut rows: Vec<(f64, f64, Vec2)> = Vec::new();
    for i in -3i32..=3 {
        for j in -3i32..=3 {
            // one of each pair of opposite vectors
            if !(j > 0 || (j == 0 && i > 0)) {
                continue;
            }
            let v = l.a * i as f64 + l.b * j as f64;
            if v.x.abs() > hw || v.y.abs() > hh {
                continue;
            }
            let (r, s) = refine_translation(ev, v, theta);
            if s < theta && r.dist(v) < 2.0 {
                rows.push((i as f64, j as f64, r));
            }
        }
    }
    let (mut sii, mut sij, mut sjj) = (0.0, 0.0, 0.0);
    let (mut siv, mut sjv) = (Vec2::ZERO, Vec2::ZERO);
    for (i, j, v) in &rows {
        sii += i * i;
        sij += i * j;
        sjj += j * j;
        siv = siv + *v * *i;
        sjv = sjv + *v * *j;
    }
    let det = sii * sjj - sij * sij;
    if rows.len() < 2 || det.abs() < 1e-9 {
        return *l;
    }
    let a = (siv * sjj - sjv * sij) * (1.0 / det);
    let b = (sjv * sii - siv * sij) * (1.0 / det);
    Lattice::new(a, b).unwrap_or(*l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeClass;
    use crate::raster::{BLUE, RED, WHITE};

    fn checker(w: usize, h: usize, cell: usize) -> RasterPattern {
        let rgb = (0..w * h)
            .map(|i| {
                let (x, y) = (i % w, i / w);
                let (u, v) = (x % cell, y % cell);
                if u < cell / 3 && v < cell / 2 {
                    RED
                } else if u > cell / 2 && v > 2 * cell / 3 {
                    BLUE
                } else {
                    WHITE
                }
            })
            .collect();
        RasterPattern::from_rgb(w, h, rgb).unwrap()
    }

    #[test]
    fn square_cell_found() {
        let p = checker(256, 256, 32);
        let l = detect_lattice(&p, 0.05).unwrap();
        assert_eq!(l.class, LatticeClass::Square);
        assert!((l.a.norm() - 32.0).abs() < 0.05, "{l:?}");
    }

    #[test]
    fn uniform_image_rejected() {
        let p = RasterPattern::uniform(128, 128, RED).unwrap();
        assert!(matches!(detect_lattice(&p, 0.05), Err(Error::NoPeriodicity(_))));
    }

    #[test]
    fn shift_map_matches_direct_sum() {
        let w = 9;
        let h = 7;
        let plane: Vec<f64> = (0..w * h).map(|i| ((i * 37 % 11) as f64) / 10.0).collect();
        let map = ShiftMap::compute(std::slice::from_ref(&plane), w, h);
        for (dx, dy) in [(1i64, 0i64), (-2, 1), (3, -3), (0, 2)] {
            let mut s = 0.0;
            let mut n = 0.0;
            for y in 0..h as i64 {
                for x in 0..w as i64 {
                    let (u, v) = (x + dx, y + dy);
                    if u >= 0 && v >= 0 && u < w as i64 && v < h as i64 {
                        s += (plane[(y * w as i64 + x) as usize] - plane[(v * w as i64 + u) as usize]).powi(2);
                        n += 1.0;
                    }
                }
            }
            assert!((map.get(dx, dy) - s / n).abs() < 1e-4, "{dx},{dy}");
        }
    }
}
