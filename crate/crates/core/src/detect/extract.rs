//! Proper unit cell and fundamental domain extraction.
//!
//! A frame is a lattice basis in the group's standard setting plus an anchor
//! (the cell origin). Candidate frames combine admissible bases with anchors
//! on the highest-order centers, or on mirror or glide axes for groups
//! without rotations; a frame is valid when every coset representative maps
//! the pattern onto itself.

use std::collections::BTreeMap;

use serde::Serialize;

use super::classify::SymmetrySignature;
use super::mismatch::{pattern_difference, Evaluator};
use super::search::{AxisHit, CenterHit, GlideHit};
use crate::error::{Error, Result};
use crate::generate::{generate, polygon_mask, FundamentalDomain, GenerateOptions, Resampling};
use crate::geometry::{polygon_contains, Point2, Vec2};
use crate::groups::GroupName;
use crate::lattice::{Lattice, LatticeClass};
use crate::raster::RasterPattern;

/// Frames whose worst sample score differs by less than this count as tied.
pub const FRAME_TIE_MARGIN: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Frame {
    pub basis: Lattice,
    /// Cell origin, folded into the cell at the pattern origin.
    pub anchor: Point2,
    /// Worst coset score of the frame.
    pub score: f64,
}

fn admissible_bases(group: GroupName, lattice: &Lattice) -> Vec<Lattice> {
    let class = group.group().lattice_class;
    let r = lattice.reduced();
    if class == LatticeClass::Oblique {
        return vec![r];
    }
    let mut out: Vec<Lattice> = Vec::new();
    let range = -2i32..=2;
    for i1 in range.clone() {
        for j1 in range.clone() {
            for i2 in range.clone() {
                for j2 in range.clone() {
                    if i1 * j2 - j1 * i2 != 1 {
                        continue;
                    }
                    let u = r.a * i1 as f64 + r.b * j1 as f64;
                    let v = r.a * i2 as f64 + r.b * j2 as f64;
                    if let Ok(b) = Lattice::with_class(u, v, class) {
                        let b = b.snapped(class);
                        if !out.iter().any(|o| o.a.dist(b.a) < 1e-6 && o.b.dist(b.b) < 1e-6) {
                            out.push(b);
                        }
                    }
                }
            }
        }
    }
    out
}

fn candidate_anchors(
    ev: &Evaluator,
    centers: &BTreeMap<u32, Vec<CenterHit>>,
    mirrors: &[AxisHit],
    glides: &[GlideHit],
) -> Vec<Point2> {
    if let Some((_, list)) = centers.iter().next_back() {
        return list.iter().map(|c| c.center).collect();
    }
    let c = ev.center();
    let foot = |l: &crate::geometry::Line| l.point + l.direction * l.direction.dot(c - l.point);
    let mut out: Vec<Point2> = mirrors.iter().map(|m| foot(&m.line)).collect();
    out.extend(glides.iter().map(|g| foot(&g.line)));
    if out.is_empty() {
        out.push(c);
    }
    out
}

/// Folds a point into the cell `[0,1)a + [0,1)b` at the pattern origin.
fn fold(basis: &Lattice, p: Point2) -> Point2 {
    let f = basis.to_frac(p);
    basis.to_pattern(Vec2::new(f.x - f.x.floor(), f.y - f.y.floor()))
}

/// Best frame for `group` among the candidates implied by detected symmetries.
pub fn find_frame(
    ev: &Evaluator,
    group: GroupName,
    lattice: &Lattice,
    centers: &BTreeMap<u32, Vec<CenterHit>>,
    mirrors: &[AxisHit],
    glides: &[GlideHit],
    theta: f64,
) -> Result<Frame> {
    let g = group.group();
    let anchors = candidate_anchors(ev, centers, mirrors, glides);
    let mut passing: Vec<Frame> = Vec::new();
    for basis in admissible_bases(group, lattice) {
        for &a in &anchors {
            let isos = g.coset_isometries(&basis, a);
            let mut worst = 0.0f64;
            let mut ok = true;
            for iso in isos.iter().skip(1) {
                match ev.sparse(iso) {
                    Some(s) if s < theta => worst = worst.max(s),
                    _ => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                passing.push(Frame { basis, anchor: fold(&basis, a), score: worst });
            }
        }
    }
    // among frames tied on the sample score, take the lexicographically
    // first and confirm it on every pixel; fall back to the next on failure
    let lexical = |a: &Frame, b: &Frame| {
        a.anchor
            .x
            .total_cmp(&b.anchor.x)
            .then(a.anchor.y.total_cmp(&b.anchor.y))
            .then(a.basis.a.x.total_cmp(&b.basis.a.x))
            .then(a.basis.a.y.total_cmp(&b.basis.a.y))
    };
    while !passing.is_empty() {
        let best = passing.iter().map(|f| f.score).fold(f64::INFINITY, f64::min);
        let (k, f) = passing
            .iter()
            .enumerate()
            .filter(|(_, f)| f.score <= best + FRAME_TIE_MARGIN)
            .min_by(|a, b| lexical(a.1, b.1))
            .map(|(k, f)| (k, *f))
            .expect("non-empty");
        passing.swap_remove(k);
        let mut worst = 0.0f64;
        let mut ok = true;
        for iso in g.coset_isometries(&f.basis, f.anchor + near_center(ev, &f)).iter().skip(1) {
            match ev.full(iso) {
                Ok(s) if s < theta => worst = worst.max(s),
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return Ok(Frame { score: worst, ..f });
        }
    }
    Err(Error::AnchorNotFound(group.to_string()))
}

/// Lattice translation moving the frame's cell closest to the image center.
fn near_center(ev: &Evaluator, f: &Frame) -> Vec2 {
    let target = ev.center() - (f.basis.a + f.basis.b) * 0.5 - f.anchor;
    let t = f.basis.to_frac(target);
    f.basis.to_pattern(Vec2::new(t.x.round(), t.y.round()))
}

fn frame_of(sig: &SymmetrySignature) -> Result<Frame> {
    sig.frame.ok_or_else(|| Error::AnchorNotFound(sig.group.to_string()))
}

/// Places `polygon` (lattice coordinates) so its centroid lands closest to
/// the image center; returns the moved anchor.
fn centered_anchor(pattern: &RasterPattern, f: &Frame, polygon: &[Vec2]) -> Point2 {
    let n = polygon.len() as f64;
    let centroid = polygon.iter().fold(Vec2::ZERO, |s, p| s + *p) * (1.0 / n);
    let c = Vec2::new((pattern.width() - 1) as f64 / 2.0, (pattern.height() - 1) as f64 / 2.0);
    let t = f.basis.to_frac(c - f.anchor - f.basis.to_pattern(centroid));
    f.anchor + f.basis.to_pattern(Vec2::new(t.x.round(), t.y.round()))
}

fn crop_polygon(pattern: &RasterPattern, basis: &Lattice, anchor: Point2, polygon: &[Vec2]) -> Result<(RasterPattern, Point2)> {
    let (offset, w, h) = FundamentalDomain::frame(polygon, basis, anchor);
    if offset.x < 0.0 || offset.y < 0.0 || offset.x as usize + w > pattern.width() || offset.y as usize + h > pattern.height() {
        return Err(Error::AnchorNotFound("cell does not fit inside the pattern".into()));
    }
    let img = pattern.crop(offset.x as usize, offset.y as usize, w, h)?;
    Ok((img, offset))
}

/// Proper unit cell: the parallelogram of the frame's basis at its anchor,
/// with alpha outside the cell cleared.
pub fn extract_unit_cell(pattern: &RasterPattern, sig: &SymmetrySignature) -> Result<RasterPattern> {
    let f = frame_of(sig)?;
    let cell = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
    let anchor = centered_anchor(pattern, &f, &cell);
    let (img, offset) = crop_polygon(pattern, &f.basis, anchor, &cell)?;
    let corners: Vec<Point2> = cell.iter().map(|p| anchor + f.basis.to_pattern(*p)).collect();
    let alpha = (0..img.width() * img.height())
        .map(|i| {
            let p = offset + Vec2::new((i % img.width()) as f64, (i / img.width()) as f64);
            if polygon_contains(&corners, p, 0.5) {
                255
            } else {
                0
            }
        })
        .collect();
    img.with_alpha(alpha)
}

/// Fundamental domain cut from the pattern along the group's domain polygon.
pub fn extract_fundamental_domain(pattern: &RasterPattern, sig: &SymmetrySignature) -> Result<FundamentalDomain> {
    let f = frame_of(sig)?;
    let polygon = sig.group.group().fd_polygon.clone();
    let anchor = centered_anchor(pattern, &f, &polygon);
    let (img, offset) = crop_polygon(pattern, &f.basis, anchor, &polygon)?;
    let alpha = polygon_mask(&polygon, &f.basis, anchor, offset, img.width(), img.height());
    Ok(FundamentalDomain { image: img.with_alpha(alpha)?, offset, polygon, anchor })
}

/// Regenerates a canvas the size of `pattern` from its extracted domain and
/// returns it with its mean difference from the input.
pub fn regenerate(pattern: &RasterPattern, sig: &SymmetrySignature) -> Result<(RasterPattern, f64)> {
    let f = frame_of(sig)?;
    let fd = extract_fundamental_domain(pattern, sig)?;
    let opts = GenerateOptions {
        width: pattern.width(),
        height: pattern.height(),
        resampling: Resampling::Bilinear,
        supersample: 1,
    };
    let out = generate(&fd, sig.group, &f.basis, &opts)?;
    let d = pattern_difference(&out, pattern)?;
    Ok((out, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hexagonal_bases_for_p6_are_rotations() {
        let bases = admissible_bases(GroupName::P6, &Lattice::hexagonal(30.0));
        assert_eq!(bases.len(), 6);
        for b in &bases {
            assert!(b.satisfies(LatticeClass::Hexagonal));
            assert!(b.a.cross(b.b) > 0.0);
        }
    }

    #[test]
    fn square_bases() {
        assert_eq!(admissible_bases(GroupName::P4m, &Lattice::square(30.0)).len(), 4);
    }

    #[test]
    fn centered_bases_include_rhombic_pair() {
        let l = Lattice::centered(40.0, 90.0);
        let bases = admissible_bases(GroupName::Cmm, &l);
        assert!(bases.iter().any(|b| (b.a + b.b).cross(Vec2::new(1.0, 0.0)).abs() < 1e-9));
    }

    #[test]
    fn fold_lands_in_cell() {
        let l = Lattice::hexagonal(20.0);
        let p = fold(&l, Vec2::new(-57.3, 131.9));
        let f = l.to_frac(p);
        assert!((0.0..1.0).contains(&f.x) && (0.0..1.0).contains(&f.y));
    }
}
