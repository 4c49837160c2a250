//! Synthetic ornaments with known ground truth, used by tests, the CLI and
//! the Python bindings.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::generate::{
    generate, generate_with_cosets, apply_color_scheme, overlap_compose, Blend, ColorPermutation, ColorScheme,
    FundamentalDomain, GenerateOptions,
};
use crate::geometry::{polygon_area, polygon_contains, Isometry2, Point2, Vec2};
use crate::groups::GroupName;
use crate::lattice::Lattice;
use crate::raster::{Color, RasterPattern, BLUE, RED, WHITE};

/// A generated pattern with the parameters that produced it.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub pattern: RasterPattern,
    pub group: GroupName,
    pub lattice: Lattice,
    /// Pattern coordinate of the cell origin (a highest-order center).
    pub anchor: Point2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Disk {
    center: Point2,
    radius: f64,
    color: u8,
}

/// A domain painted with random red and blue disks on white.
pub fn random_disks_fd(group: GroupName, lattice: &Lattice, anchor: Point2, seed: u64) -> Result<FundamentalDomain> {
    let g = group.group();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poly: Vec<Point2> = g.fd_polygon.iter().map(|f| anchor + lattice.to_pattern(*f)).collect();
    let area = polygon_area(&poly).abs();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in &poly {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let scale = area.sqrt();
    let cell = lattice.a.norm().min(lattice.b.norm());
    let mut disks = Vec::new();
    let count = 5;
    while disks.len() < count {
        let c = Vec2::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
        if !polygon_contains(&poly, c, 0.0) {
            continue;
        }
        let r = (rng.random_range(0.18..0.42) * scale).min(0.16 * cell);
        let color = if rng.random_bool(0.5) { 1 } else { 2 };
        disks.push(Disk { center: c, radius: r, color });
    }
    FundamentalDomain::from_painter(group, lattice, anchor, vec![WHITE, RED, BLUE], move |p| {
        disks.iter().rev().find(|d| d.center.dist(p) <= d.radius).map_or(0, |d| d.color)
    })
}

/// A domain split into nearest-site cells colored white, red and blue,
/// so no color dominates.
pub fn random_fd(group: GroupName, lattice: &Lattice, anchor: Point2, seed: u64) -> Result<FundamentalDomain> {
    let g = group.group();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let poly: Vec<Point2> = g.fd_polygon.iter().map(|f| anchor + lattice.to_pattern(*f)).collect();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in &poly {
        x0 = x0.min(p.x);
        y0 = y0.min(p.y);
        x1 = x1.max(p.x);
        y1 = y1.max(p.y);
    }
    let mut sites: Vec<(Point2, u8)> = Vec::new();
    while sites.len() < 7 {
        let c = Vec2::new(rng.random_range(x0..x1), rng.random_range(y0..y1));
        if polygon_contains(&poly, c, 0.0) {
            // every color appears at least twice
            let color = if sites.len() < 6 { (sites.len() % 3) as u8 } else { rng.random_range(0..3) };
            sites.push((c, color));
        }
    }
    FundamentalDomain::from_painter(group, lattice, anchor, vec![WHITE, RED, BLUE], move |p| {
        sites.iter().min_by(|a, b| a.0.dist(p).total_cmp(&b.0.dist(p))).map_or(0, |s| s.1)
    })
}

/// Anchor near the canvas center with a seeded sub-pixel offset.
fn anchor_for(width: usize, height: usize, rng: &mut ChaCha8Rng) -> Point2 {
    Vec2::new(
        width as f64 / 2.0 + rng.random_range(-0.5..0.5),
        height as f64 / 2.0 + rng.random_range(-0.5..0.5),
    )
}

fn fixture_with<F>(group: GroupName, size: usize, cell: f64, seed: u64, paint: F) -> Result<Fixture>
where
    F: Fn(GroupName, &Lattice, Point2, u64) -> Result<FundamentalDomain>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let lattice = group.group().default_lattice(cell);
    let anchor = anchor_for(size, size, &mut rng);
    let fd = paint(group, &lattice, anchor, seed)?;
    let pattern = generate(&fd, group, &lattice, &GenerateOptions::smooth(size, size))?;
    Ok(Fixture { pattern, group, lattice, anchor })
}

/// A `size` x `size` anti-aliased pattern of `group` built from a random
/// three-color cell domain on the group's default lattice with side `cell`.
pub fn random_fixture(group: GroupName, size: usize, cell: f64, seed: u64) -> Result<Fixture> {
    fixture_with(group, size, cell, seed, random_fd)
}

/// Like [`random_fixture`] with disks on a white domain.
pub fn random_disks_fixture(group: GroupName, size: usize, cell: f64, seed: u64) -> Result<Fixture> {
    fixture_with(group, size, cell, seed, random_disks_fd)
}

/// A palette-indexed p6 pattern whose six-fold rotation swaps red and blue,
/// so the colored pattern only keeps p3.
pub fn two_colored_p6(size: usize, cell: f64, seed: u64) -> Result<Fixture> {
    let group = GroupName::P6;
    let lattice = Lattice::hexagonal(cell);
    let anchor = Vec2::new(size as f64 / 2.0, size as f64 / 2.0);
    let poly: Vec<Point2> = group.group().fd_polygon.iter().map(|f| anchor + lattice.to_pattern(*f)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centroid = poly.iter().fold(Vec2::ZERO, |s, p| s + *p) * (1.0 / poly.len() as f64);
    let scale = polygon_area(&poly).abs().sqrt();
    let blobs: Vec<(Point2, f64)> = (0..2)
        .map(|_| {
            let off = Vec2::new(rng.random_range(-0.25..0.25), rng.random_range(-0.25..0.25)) * scale;
            (centroid + off, rng.random_range(0.25..0.4) * scale)
        })
        .collect();
    let fd = FundamentalDomain::from_painter(group, &lattice, anchor, vec![WHITE, RED, BLUE], move |p| {
        u8::from(blobs.iter().any(|(c, r)| c.dist(p) <= *r))
    })?;
    let gen = generate_with_cosets(&fd, group, &lattice, &GenerateOptions::new(size, size))?;
    let scheme = ColorScheme { generators: vec![ColorPermutation::swap(3, 1, 2)] };
    let pattern = apply_color_scheme(&gen, &scheme)?;
    Ok(Fixture { pattern, group, lattice, anchor })
}

/// Ground truth of the Moroccan-style composite.
#[derive(Debug, Clone)]
pub struct TrapComposite {
    pub pattern: RasterPattern,
    /// The p6m layer before the overlay.
    pub base: RasterPattern,
    pub lattice: Lattice,
    pub anchor: Point2,
    /// Dodecagram (and octagram) centers: the lattice points.
    pub dodecagram_center: Point2,
    /// Three-leaf centers at (2/3, 1/3) of the cell.
    pub three_leaf_center: Point2,
}

const DODECAGRAM: Color = [25, 60, 150];
const LEAF: Color = [190, 40, 45];
const RING: Color = [215, 170, 60];
const OCTAGRAM: Color = [20, 110, 70];
const BACKGROUND: Color = [245, 240, 225];

fn star(p: Vec2, points: u32, r_out: f64, r_in: f64, phase: f64) -> bool {
    let r = p.norm();
    if r > r_out {
        return false;
    }
    if r <= r_in {
        return true;
    }
    // boundary of a regular star polygon in polar form
    let sector = std::f64::consts::TAU / points as f64;
    let a = (p.y.atan2(p.x) - phase).rem_euclid(sector);
    let t = (a / (sector / 2.0) - 1.0).abs();
    let tip = Vec2::new(r_out, 0.0);
    let valley = Vec2::new(r_in * (sector / 2.0).cos(), r_in * (sector / 2.0).sin());
    let edge = valley + (tip - valley) * (1.0 - t);
    r <= edge.norm()
}

fn ellipse(p: Vec2, center: Vec2, dir: Vec2, half_len: f64, half_width: f64) -> bool {
    let q = p - center;
    let (u, v) = (q.dot(dir), q.cross(dir));
    (u / half_len).powi(2) + (v / half_width).powi(2) <= 1.0
}

/// Nearest lattice point to `p` relative to `anchor`.
fn local(lattice: &Lattice, anchor: Point2, p: Point2) -> Vec2 {
    lattice.wrap(p - anchor)
}

/// A p6m ornament with dodecagrams on the lattice points and three-leaf
/// shapes on the three-fold centers, overlaid with a four-fold octagram
/// motif on every lattice point. The overlay keeps only the half-turns and
/// the mirrors along x and y, so the composite belongs to cmm.
pub fn moroccan_composite(size: usize, side: f64) -> Result<TrapComposite> {
    let lattice = Lattice::hexagonal(side);
    let anchor = Vec2::new(size as f64 / 2.0 + 0.25, size as f64 / 2.0 - 0.35);
    let l = side;
    let three = lattice.to_pattern(Vec2::new(2.0 / 3.0, 1.0 / 3.0));
    let palette = vec![BACKGROUND, DODECAGRAM, LEAF, RING];
    let fd = FundamentalDomain::from_painter(GroupName::P6m, &lattice, anchor, palette, move |p| {
        let q = p - anchor;
        if star(q, 12, 0.36 * l, 0.2 * l, 0.0) {
            return 1;
        }
        // three leaves pointing from the three-fold center toward its lattice neighbours
        let d = q - three;
        for k in 0..3 {
            let dir = Vec2::new(-three.x, -three.y).normalized().rotated(std::f64::consts::TAU * k as f64 / 3.0);
            if ellipse(d, dir * (0.13 * l), dir, 0.13 * l, 0.05 * l) {
                return 2;
            }
        }
        if d.norm() < 0.05 * l {
            return 2;
        }
        let r = q.norm();
        if (0.42 * l..0.46 * l).contains(&r) {
            return 3;
        }
        0
    })?;
    let base = generate(&fd, GroupName::P6m, &lattice, &GenerateOptions::smooth(size, size))?;
    // four-fold overlay, anti-aliased through supersampled coverage
    let k = 4usize;
    let mut rgb = Vec::with_capacity(size * size);
    let mut alpha = Vec::with_capacity(size * size);
    for y in 0..size {
        for x in 0..size {
            let mut cover = 0usize;
            for s in 0..k * k {
                let p = Vec2::new(
                    x as f64 + ((s % k) as f64 + 0.5) / k as f64 - 0.5,
                    y as f64 + ((s / k) as f64 + 0.5) / k as f64 - 0.5,
                );
                let q = local(&lattice, anchor, p);
                let inside = star(q, 8, 0.3 * l, 0.16 * l, 0.0)
                    || (0..4).any(|i| {
                        let dir = Vec2::new(1.0, 0.0).rotated(std::f64::consts::FRAC_PI_2 * i as f64);
                        ellipse(q, dir * (0.34 * l), dir, 0.12 * l, 0.06 * l)
                    });
                cover += usize::from(inside);
            }
            rgb.push(OCTAGRAM);
            alpha.push(((cover * 255) as f64 / (k * k) as f64).round() as u8);
        }
    }
    let overlay = RasterPattern::from_rgb(size, size, rgb)?.with_alpha(alpha)?;
    let pattern = overlap_compose(&base, &overlay, Blend::Alpha, &Isometry2::identity())?;
    Ok(TrapComposite {
        pattern: pattern.with_lattice(lattice),
        base,
        lattice,
        anchor,
        dodecagram_center: anchor,
        three_leaf_center: anchor + three,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::detect::isometry_mismatch;

    #[test]
    fn random_fixtures_are_deterministic() {
        let a = random_fixture(GroupName::P4g, 160, 64.0, 3).unwrap();
        let b = random_fixture(GroupName::P4g, 160, 64.0, 3).unwrap();
        assert_eq!(a.pattern, b.pattern);
    }

    #[test]
    fn generated_fixture_fits_its_own_generators() {
        let f = random_fixture(GroupName::P6m, 256, 80.0, 1).unwrap();
        for iso in crate::groups::group_generators_at(f.group, &f.lattice, f.anchor).unwrap() {
            assert!(isometry_mismatch(&f.pattern, &iso).unwrap() < 0.02);
        }
    }

    #[test]
    fn composite_keeps_half_turns_and_axis_mirrors() {
        let t = moroccan_composite(320, 100.0).unwrap();
        let c = t.dodecagram_center;
        let half = Isometry2::rotation(c, std::f64::consts::PI);
        assert!(isometry_mismatch(&t.pattern, &half).unwrap() < 0.02);
        let mx = Isometry2::reflection(crate::geometry::Line::new(c, Vec2::new(1.0, 0.0)));
        let my = Isometry2::reflection(crate::geometry::Line::new(c, Vec2::new(0.0, 1.0)));
        assert!(isometry_mismatch(&t.pattern, &mx).unwrap() < 0.02);
        assert!(isometry_mismatch(&t.pattern, &my).unwrap() < 0.02);
        let sixty = Isometry2::rotation(c, std::f64::consts::PI / 3.0);
        assert!(isometry_mismatch(&t.base, &sixty).unwrap() < 0.02);
        assert!(isometry_mismatch(&t.pattern, &sixty).unwrap() > 0.05);
    }
}
