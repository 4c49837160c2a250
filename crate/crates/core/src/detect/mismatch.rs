//! Match score between a pattern and a transformed copy of itself.
//!
//! The score is the mean absolute per-channel difference, normalized to
//! [0, 1], between `P(x)` and `P(iso(x))` over every pixel whose image lands
//! inside the canvas. Transformed positions are sampled bilinearly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Isometry2, Point2, Vec2};
use crate::raster::{RasterPattern, Sampler};

/// Default acceptance threshold for match scores.
pub const DEFAULT_THETA: f64 = 0.05;
/// Minimum fraction of the canvas that must overlap its transform.
pub const MIN_OVERLAP: f64 = 0.25;

const SPARSE_SAMPLES: usize = 4000;
const COARSE_SAMPLES: usize = 1500;
const BLUR_RADIUS: usize = 2;

/// Mismatch evaluator holding sampled planes of one pattern.
///
/// `full` scores every pixel; `sparse` and `coarse` score a fixed jittered
/// sample set (the latter on a blurred copy) for candidate scans.
pub struct Evaluator {
    sharp: Sampler,
    blurred: Sampler,
    sparse: Samples,
    coarse: Samples,
}

/// Sample points with the sharp and blurred colors at each of them.
struct Samples {
    points: Vec<Point2>,
    sharp: Vec<[f32; 3]>,
    blurred: Vec<[f32; 3]>,
}

impl Samples {
    fn new(points: Vec<Point2>, sharp: &Sampler, blurred: &Sampler) -> Samples {
        let at = |s: &Sampler| points.iter().map(|p| s.bilinear(p.x, p.y).unwrap_or([0.0; 3])).collect();
        Samples { sharp: at(sharp), blurred: at(blurred), points }
    }
}

fn jittered(w: usize, h: usize, n: usize, seed: u64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = ((w * h) as f64 / n as f64).sqrt().max(1.0);
    let (nx, ny) = ((w as f64 / step).ceil() as usize, (h as f64 / step).ceil() as usize);
    let mut out = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let x = (i as f64 + rng.random::<f64>()) * step;
            let y = (j as f64 + rng.random::<f64>()) * step;
            if x <= (w - 1) as f64 && y <= (h - 1) as f64 {
                out.push(Vec2::new(x, y));
            }
        }
    }
    out
}

impl Evaluator {
    pub fn new(pattern: &RasterPattern) -> Self {
        let sharp = Sampler::new(pattern);
        let blurred = sharp.blurred(BLUR_RADIUS);
        let (w, h) = (pattern.width(), pattern.height());
        let sparse = Samples::new(jittered(w, h, SPARSE_SAMPLES, 7), &sharp, &blurred);
        let coarse = Samples::new(jittered(w, h, COARSE_SAMPLES, 11), &sharp, &blurred);
        Evaluator { sharp, blurred, sparse, coarse }
    }

    pub fn width(&self) -> usize {
        self.sharp.width
    }

    pub fn height(&self) -> usize {
        self.sharp.height
    }

    pub fn center(&self) -> Point2 {
        Vec2::new((self.width() - 1) as f64 / 2.0, (self.height() - 1) as f64 / 2.0)
    }

    pub fn sampler(&self) -> &Sampler {
        &self.sharp
    }

    /// Score over every pixel.
    pub fn full(&self, iso: &Isometry2) -> Result<f64> {
        let s = &self.sharp;
        let (w, h) = (s.width, s.height);
        let (sum, count) = (0..h)
            .into_par_iter()
            .map(|y| {
                let mut sum = 0f64;
                let mut count = 0usize;
                for x in 0..w {
                    let q = iso.apply(Vec2::new(x as f64, y as f64));
                    if let Some(b) = s.bilinear(q.x, q.y) {
                        let a = s.at(x, y);
                        sum += ((a[0] - b[0]).abs() + (a[1] - b[1]).abs() + (a[2] - b[2]).abs()) as f64;
                        count += 1;
                    }
                }
                (sum, count)
            })
            .reduce(|| (0.0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        let frac = count as f64 / (w * h) as f64;
        if frac < MIN_OVERLAP {
            return Err(Error::InsufficientOverlap(frac));
        }
        Ok(sum / (3 * count) as f64)
    }

    fn sampled(sampler: &Sampler, points: &[Point2], values: &[[f32; 3]], iso: &Isometry2) -> Option<f64> {
        let mut sum = 0f64;
        let mut count = 0usize;
        for (p, a) in points.iter().zip(values) {
            let q = iso.apply(*p);
            if let Some(b) = sampler.bilinear(q.x, q.y) {
                sum += ((a[0] - b[0]).abs() + (a[1] - b[1]).abs() + (a[2] - b[2]).abs()) as f64;
                count += 1;
            }
        }
        (count as f64 >= MIN_OVERLAP * points.len() as f64).then(|| sum / (3 * count) as f64)
    }

    /// Score on the jittered sample set; `None` when the overlap is too small.
    pub fn sparse(&self, iso: &Isometry2) -> Option<f64> {
        Self::sampled(&self.sharp, &self.sparse.points, &self.sparse.sharp, iso)
    }

    /// Score on a smaller sample set of the blurred pattern.
    pub fn coarse(&self, iso: &Isometry2) -> Option<f64> {
        Self::sampled(&self.blurred, &self.coarse.points, &self.coarse.blurred, iso)
    }

    /// Sparse score on the blurred pattern, used to refine coarse candidates.
    pub fn smooth(&self, iso: &Isometry2) -> Option<f64> {
        Self::sampled(&self.blurred, &self.sparse.points, &self.sparse.blurred, iso)
    }
}

/// Match score of `pattern` against its image under `iso` (0 is a perfect fit).
pub fn isometry_mismatch(pattern: &RasterPattern, iso: &Isometry2) -> Result<f64> {
    let s = Sampler::new(pattern);
    let empty = || Samples { points: Vec::new(), sharp: Vec::new(), blurred: Vec::new() };
    let ev = Evaluator { blurred: s.clone(), sharp: s, sparse: empty(), coarse: empty() };
    ev.full(iso)
}

/// Mean absolute per-channel difference of two equally sized patterns.
pub fn pattern_difference(a: &RasterPattern, b: &RasterPattern) -> Result<f64> {
    if a.width() != b.width() || a.height() != b.height() {
        return Err(Error::SizeMismatch(a.width(), a.height(), b.width(), b.height()));
    }
    let sum: u64 = a
        .rgb()
        .iter()
        .zip(b.rgb())
        .map(|(p, q)| (0..3).map(|c| (p[c] as i32 - q[c] as i32).unsigned_abs() as u64).sum::<u64>())
        .sum();
    Ok(sum as f64 / (255.0 * 3.0 * a.rgb().len() as f64))
}

/// Pattern search over `dims` coordinates, halving the step when no move helps.
pub fn pattern_search<F>(f: F, start: &[f64], step: f64, min_step: f64) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let mut x = start.to_vec();
    let mut best = f(&x);
    let mut step = step;
    while step >= min_step {
        let mut moved = false;
        for d in 0..x.len() {
            for s in [-1.0, 1.0] {
                let mut y = x.clone();
                y[d] += s * step;
                let v = f(&y);
                if v < best {
                    best = v;
                    x = y;
                    moved = true;
                }
            }
        }
        if !moved {
            step /= 2.0;
        }
    }
    (x, best)
}
