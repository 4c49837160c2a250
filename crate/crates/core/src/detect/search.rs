//! Scans for rotation centers, mirror axes and glide axes of a pattern with
//! a known lattice.

use rayon::prelude::*;
use serde::Serialize;

use super::mismatch::{pattern_search, Evaluator};
use crate::geometry::{Isometry2, Line, Point2, Vec2};
use crate::groups::shortest_along;
use crate::lattice::Lattice;

/// Steps per basis vector of the coarse center grid.
pub const CENTER_GRID: usize = 64;
const MAX_CANDIDATES: usize = 16;
/// Seeds kept for orders the lattice cannot carry; only their best score matters.
const MINOR_CANDIDATES: usize = 4;
const AXIS_SEEDS: usize = 6;
/// Candidates whose blurred score stays above this multiple of `theta` skip
/// the sharp refinement.
const SMOOTH_CUTOFF: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CenterHit {
    pub center: Point2,
    pub score: f64,
    /// Orbit class, filled in by classification.
    pub class: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxisHit {
    pub line: Line,
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GlideHit {
    pub line: Line,
    pub shift: f64,
    pub score: f64,
}

fn periodic_minima(values: &[f64], nx: usize, ny: usize) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let v = values[j * nx + i];
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            'nb: for dj in -1i64..=1 {
                for di in -1i64..=1 {
                    if (di, dj) == (0, 0) {
                        continue;
                    }
                    let (u, w) = ((i as i64 + di).rem_euclid(nx as i64) as usize, (j as i64 + dj).rem_euclid(ny as i64) as usize);
                    let o = values[w * nx + u];
                    if o < v || (o == v && (w, u) < (j, i)) {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                out.push((i, j, v));
            }
        }
    }
    out.sort_by(|a, b| a.2.total_cmp(&b.2).then((a.1, a.0).cmp(&(b.1, b.0))));
    out
}

/// Lattice point nearest to the image center, used as the origin of scans.
fn scan_origin(ev: &Evaluator, lattice: &Lattice) -> Point2 {
    ev.center() - (lattice.a + lattice.b) * 0.5
}

/// Rotation centers of the given order inside one primitive cell with a
/// score below `theta`, deduplicated modulo the lattice.
pub fn find_rotation_centers(ev: &Evaluator, order: u32, lattice: &Lattice, theta: f64) -> Vec<CenterHit> {
    scan_rotation_centers(ev, order, lattice, theta).into_iter().filter(|c| c.score < theta).collect()
}

/// Every refined center candidate with its score, best first.
pub fn scan_rotation_centers(ev: &Evaluator, order: u32, lattice: &Lattice, theta: f64) -> Vec<CenterHit> {
    let angle = std::f64::consts::TAU / order as f64;
    let o = scan_origin(ev, lattice);
    let fits = order_fits(order, lattice);
    let n = if fits { CENTER_GRID } else { CENTER_GRID / 2 };
    let at = |i: f64, j: f64| o + lattice.a * (i / n as f64) + lattice.b * (j / n as f64);
    let grid: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let c = at((k % n) as f64, (k / n) as f64);
            ev.coarse(&Isometry2::rotation(c, angle)).unwrap_or(f64::INFINITY)
        })
        .collect();
    let step = (lattice.a.norm().max(lattice.b.norm()) / n as f64).max(0.5);
    let keep = if fits { MAX_CANDIDATES } else { MINOR_CANDIDATES };
    let seeds: Vec<Vec<f64>> = periodic_minima(&grid, n, n)
        .into_iter()
        .take(keep)
        .map(|(i, j, _)| {
            let c = at(i as f64, j as f64);
            vec![c.x, c.y]
        })
        .collect();
    let iso = |p: &[f64]| Isometry2::rotation(Vec2::new(p[0], p[1]), angle);
    let same = |a: &[f64], b: &[f64]| lattice.periodic_distance(Vec2::new(a[0], a[1]), Vec2::new(b[0], b[1])) < 0.75;
    let hits = refine(&seeds, iso, step, same, theta, ev)
        .into_iter()
        .map(|(p, s)| CenterHit { center: Vec2::new(p[0], p[1]), score: s, class: 0 })
        .collect();
    dedup_sorted(hits, |h| h.score, |a, b| lattice.periodic_distance(a.center, b.center) < 1.0)
}

/// Whether a lattice of this shape can carry rotations of `order`.
pub fn order_fits(order: u32, lattice: &Lattice) -> bool {
    use crate::lattice::LatticeClass;
    match order {
        3 | 6 => lattice.satisfies(LatticeClass::Hexagonal) || lattice.canonical().class == LatticeClass::Hexagonal,
        4 => lattice.canonical().class == LatticeClass::Square,
        _ => true,
    }
}

/// Two-stage refinement of scan seeds: pattern search on the blurred image,
/// merge of seeds that converged together, then pattern search on the sharp
/// image and a full evaluation for promising candidates.
fn refine<I, S>(seeds: &[Vec<f64>], iso: I, step: f64, same: S, theta: f64, ev: &Evaluator) -> Vec<(Vec<f64>, f64)>
where
    I: Fn(&[f64]) -> Isometry2 + Sync,
    S: Fn(&[f64], &[f64]) -> bool,
{
    let smooth: Vec<(Vec<f64>, f64)> = seeds
        .par_iter()
        .map(|s| pattern_search(|p: &[f64]| ev.smooth(&iso(p)).unwrap_or(f64::INFINITY), s, step, 0.25))
        .collect();
    let merged = dedup_sorted(smooth, |x| x.1, |a, b| same(&a.0, &b.0));
    merged
        .par_iter()
        .map(|(p, sm)| {
            if *sm > SMOOTH_CUTOFF * theta {
                let s = ev.sparse(&iso(p)).unwrap_or(f64::INFINITY);
                return (p.clone(), s);
            }
            let (p, sparse) = pattern_search(|q: &[f64]| ev.sparse(&iso(q)).unwrap_or(f64::INFINITY), p, 0.5, 1.0 / 16.0);
            let full = if sparse < 3.0 * theta { ev.full(&iso(&p)).unwrap_or(f64::INFINITY) } else { sparse };
            (p, full)
        })
        .collect()
}

/// Sorts by score and drops candidates equivalent to a better one.
fn dedup_sorted<T, S, D>(mut items: Vec<T>, score: S, same: D) -> Vec<T>
where
    S: Fn(&T) -> f64,
    D: Fn(&T, &T) -> bool,
{
    items.sort_by(|a, b| score(a).total_cmp(&score(b)));
    let mut out: Vec<T> = Vec::new();
    for it in items {
        if !out.iter().any(|o| same(o, &it)) {
            out.push(it);
        }
    }
    out
}

/// Lattice-compatible axis directions: lattice vectors whose reflection maps
/// the lattice onto itself. Returns unit direction and period along it.
pub fn candidate_directions(lattice: &Lattice) -> Vec<(Vec2, f64)> {
    let mut dirs: Vec<(Vec2, f64)> = Vec::new();
    for i in -3i32..=3 {
        for j in 0i32..=3 {
            if (j == 0 && i <= 0) || gcd(i.unsigned_abs(), j.unsigned_abs()) != 1 {
                continue;
            }
            let d = (lattice.a * i as f64 + lattice.b * j as f64).normalized();
            let reflect = |v: Vec2| d * (2.0 * v.dot(d)) - v;
            let maps = [lattice.a, lattice.b].iter().all(|v| {
                let f = lattice.to_frac(reflect(*v));
                (f.x - f.x.round()).abs() < 0.03 && (f.y - f.y.round()).abs() < 0.03
            });
            if maps && !dirs.iter().any(|(e, _)| e.cross(d).abs() < 1e-6) {
                dirs.push((d, shortest_along(lattice, d)));
            }
        }
    }
    dirs
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Spacing between consecutive lattice rows parallel to `d`.
pub fn row_spacing(lattice: &Lattice, period: f64) -> f64 {
    lattice.area() / period
}

/// Two axis lines coincide modulo lattice translations.
pub fn same_axis(lattice: &Lattice, a: &Line, b: &Line, tol: f64) -> bool {
    let (da, db) = (a.direction.normalized(), b.direction.normalized());
    if da.cross(db).abs() > 1e-3 {
        return false;
    }
    let n = da.perp();
    let s = row_spacing(lattice, shortest_along(lattice, da));
    let off = (n.dot(b.point) - n.dot(a.point)).rem_euclid(s);
    off.min(s - off) < tol
}

/// Mirror axes scoring below `theta`.
pub fn find_reflection_axes(ev: &Evaluator, lattice: &Lattice, theta: f64) -> Vec<AxisHit> {
    scan_reflection_axes(ev, lattice, theta).into_iter().filter(|a| a.score < theta).collect()
}

/// Refined mirror candidates, one scan per lattice-compatible direction.
pub fn scan_reflection_axes(ev: &Evaluator, lattice: &Lattice, theta: f64) -> Vec<AxisHit> {
    let c0 = ev.center();
    let mut all: Vec<AxisHit> = Vec::new();
    for (d, period) in candidate_directions(lattice) {
        let n = d.perp();
        let s = row_spacing(lattice, period);
        let steps = (s / 1.5).ceil().max(8.0) as usize;
        let line_at = |c: f64| Line::new(c0 + n * c, d);
        let grid: Vec<f64> = (0..steps)
            .into_par_iter()
            .map(|k| {
                let c = -s / 2.0 + s * k as f64 / steps as f64;
                ev.coarse(&Isometry2::reflection(line_at(c))).unwrap_or(f64::INFINITY)
            })
            .collect();
        let seeds: Vec<Vec<f64>> = periodic_minima(&grid, steps, 1)
            .into_iter()
            .take(AXIS_SEEDS)
            .map(|(k, _, _)| vec![-s / 2.0 + s * k as f64 / steps as f64])
            .collect();
        let same = |a: &[f64], b: &[f64]| {
            let off = (a[0] - b[0]).rem_euclid(s);
            off.min(s - off) < 0.75
        };
        let refined: Vec<AxisHit> = refine(&seeds, |p| Isometry2::reflection(line_at(p[0])), s / steps as f64, same, theta, ev)
            .into_iter()
            .map(|(p, score)| AxisHit { line: line_at(p[0]), score })
            .collect();
        all.extend(refined);
    }
    dedup_sorted(all, |h| h.score, |a, b| same_axis(lattice, &a.line, &b.line, 1.0))
}

/// Glide axes scoring below `theta`; glides lying on one of `mirrors` are
/// suppressed.
pub fn find_glide_axes(ev: &Evaluator, lattice: &Lattice, theta: f64, mirrors: &[AxisHit]) -> Vec<GlideHit> {
    accepted_glides(&scan_glide_axes(ev, lattice, theta), lattice, theta, mirrors)
}

pub fn accepted_glides(candidates: &[GlideHit], lattice: &Lattice, theta: f64, mirrors: &[AxisHit]) -> Vec<GlideHit> {
    candidates
        .iter()
        .filter(|g| g.score < theta && !mirrors.iter().any(|m| same_axis(lattice, &m.line, &g.line, 1.0)))
        .copied()
        .collect()
}

/// Refined glide candidates whose shift is not a lattice period.
pub fn scan_glide_axes(ev: &Evaluator, lattice: &Lattice, theta: f64) -> Vec<GlideHit> {
    let c0 = ev.center();
    let mut all: Vec<GlideHit> = Vec::new();
    for (d, period) in candidate_directions(lattice) {
        let n = d.perp();
        let s = row_spacing(lattice, period);
        let (ns, nt) = ((s / 2.0).ceil().max(8.0) as usize, 16usize);
        let line_at = |c: f64| Line::new(c0 + n * c, d);
        let iso = |c: f64, t: f64| Isometry2::glide(line_at(c), t);
        let grid: Vec<f64> = (0..ns * nt)
            .into_par_iter()
            .map(|k| {
                let (ci, ti) = (k % ns, k / ns);
                if ti == 0 {
                    return f64::INFINITY;
                }
                let c = -s / 2.0 + s * ci as f64 / ns as f64;
                let t = period * ti as f64 / nt as f64;
                ev.coarse(&iso(c, t)).unwrap_or(f64::INFINITY)
            })
            .collect();
        let seeds: Vec<Vec<f64>> = periodic_minima(&grid, ns, nt)
            .into_iter()
            .take(AXIS_SEEDS)
            .map(|(ci, ti, _)| vec![-s / 2.0 + s * ci as f64 / ns as f64, period * ti as f64 / nt as f64])
            .collect();
        let same = |a: &[f64], b: &[f64]| {
            let (u, v) = ((a[0] - b[0]).rem_euclid(s), (a[1] - b[1]).rem_euclid(period));
            u.min(s - u) < 0.75 && v.min(period - v) < 0.75
        };
        let refined: Vec<GlideHit> = refine(&seeds, |p| iso(p[0], p[1]), s / ns as f64, same, theta, ev)
            .into_iter()
            .map(|(p, score)| GlideHit { line: line_at(p[0]), shift: p[1].rem_euclid(period), score })
            .collect();
        // a glide whose shift is a full period is a mirror
        all.extend(refined.into_iter().filter(|g| g.shift > 1.0 && g.shift < period - 1.0));
    }
    dedup_sorted(all, |h| h.score, |a, b| same_axis(lattice, &a.line, &b.line, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeClass;

    #[test]
    fn directions_per_lattice_class() {
        let count = |l: Lattice| candidate_directions(&l).len();
        assert_eq!(count(Lattice::square(40.0)), 4);
        assert_eq!(count(Lattice::hexagonal(40.0)), 6);
        assert_eq!(count(Lattice::rectangular(40.0, 55.0)), 2);
        assert_eq!(count(Lattice::centered(40.0, 90.0)), 2);
        let oblique = Lattice::new(Vec2::new(40.0, 0.0), Vec2::new(11.0, 31.0)).unwrap();
        assert_eq!(oblique.class, LatticeClass::Oblique);
        assert_eq!(candidate_directions(&oblique), vec![]);
    }

    #[test]
    fn axes_equal_modulo_lattice() {
        let l = Lattice::rectangular(40.0, 30.0);
        let a = Line::new(Vec2::new(5.0, 0.0), Vec2::new(0.0, 1.0));
        let b = Line::new(Vec2::new(45.0, 17.0), Vec2::new(0.0, -1.0));
        let c = Line::new(Vec2::new(25.0, 17.0), Vec2::new(0.0, -1.0));
        assert!(same_axis(&l, &a, &b, 0.5));
        assert!(!same_axis(&l, &a, &c, 0.5));
    }

    #[test]
    fn minima_wrap_around() {
        let v = vec![0.0, 1.0, 2.0, 1.0, 3.0, 0.5];
        let m = periodic_minima(&v, 6, 1);
        assert_eq!(m.iter().map(|x| x.0).collect::<Vec<_>>(), vec![0, 3]);
    }
}
