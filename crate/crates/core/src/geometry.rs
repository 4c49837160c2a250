//! Planar vectors, lines and exact-kind isometries.
//!
//! Every isometry carries its kind (identity, translation, rotation,
//! reflection, glide) recomputed from the linear part and translation, so
//! the tag can never drift from the matrix it describes.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for algebraic identities (orthogonality, kind decisions).
pub const ALGEBRAIC_TOL: f64 = 1e-9;
/// Tolerance for geometric deduplication of points.
pub const GEOMETRIC_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

/// Points and vectors share a representation; the frame is stated by the caller.
pub type Point2 = Vec2;

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        Vec2::new(self.x / n, self.y / n)
    }

    /// Counter-clockwise perpendicular (in a y-up frame).
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn dist(self, o: Vec2) -> f64 {
        (self - o).norm()
    }

    pub fn rotated(self, angle: f64) -> Vec2 {
        Mat2::rotation(angle).apply(self)
    }

    pub fn to_array(self) -> [f64; 2] {
        [self.x, self.y]
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(a: [f64; 2]) -> Self {
        Vec2::new(a[0], a[1])
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({:.4}, {:.4})", self.x, self.y)
    }
}

/// Row-major 2x2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);

    pub fn rotation(angle: f64) -> Mat2 {
        let (s, c) = angle.sin_cos();
        Mat2([[c, -s], [s, c]])
    }

    /// Reflection across the line through the origin with direction angle `phi`.
    pub fn reflection(phi: f64) -> Mat2 {
        let (s, c) = (2.0 * phi).sin_cos();
        Mat2([[c, s], [s, -c]])
    }

    pub fn from_columns(a: Vec2, b: Vec2) -> Mat2 {
        Mat2([[a.x, b.x], [a.y, b.y]])
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        let m = &self.0;
        Vec2::new(m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y)
    }

    pub fn mul(&self, o: &Mat2) -> Mat2 {
        let (a, b) = (&self.0, &o.0);
        let mut r = [[0.0; 2]; 2];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(r)
    }

    pub fn transpose(&self) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0], m[1][0]], [m[0][1], m[1][1]]])
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d.abs() < 1e-15 {
            return None;
        }
        let m = &self.0;
        Some(Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }

    /// Largest absolute entry of `self^T * self - I`.
    pub fn orthogonality_error(&self) -> f64 {
        let p = self.transpose().mul(self);
        let mut e: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let target = if i == j { 1.0 } else { 0.0 };
                e = e.max((p.0[i][j] - target).abs());
            }
        }
        e
    }

    pub fn max_abs_diff(&self, o: &Mat2) -> f64 {
        let mut e: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                e = e.max((self.0[i][j] - o.0[i][j]).abs());
            }
        }
        e
    }
}

/// An infinite line given by a point on it and a unit direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub point: Point2,
    pub direction: Vec2,
}

impl Line {
    pub fn new(point: Point2, direction: Vec2) -> Self {
        Line { point, direction: direction.normalized() }
    }

    /// Unit normal (direction rotated by +90 degrees).
    pub fn normal(&self) -> Vec2 {
        self.direction.perp()
    }

    /// Signed offset of the line along its normal, measured from the origin.
    pub fn offset(&self) -> f64 {
        self.normal().dot(self.point)
    }

    pub fn distance_to(&self, p: Point2) -> f64 {
        self.normal().dot(p - self.point).abs()
    }

    /// Direction angle in [0, 180) degrees.
    pub fn angle_degrees(&self) -> f64 {
        let a = self.direction.y.atan2(self.direction.x).to_degrees();
        a.rem_euclid(180.0)
    }
}

/// Exact kind of a planar isometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IsometryKind {
    Identity,
    Translation { vector: Vec2 },
    /// `angle` in radians, normalized to (-pi, pi].
    Rotation { center: Point2, angle: f64 },
    Reflection { axis: Line },
    Glide { axis: Line, shift: f64 },
}

impl IsometryKind {
    pub fn name(&self) -> &'static str {
        match self {
            IsometryKind::Identity => "identity",
            IsometryKind::Translation { .. } => "translation",
            IsometryKind::Rotation { .. } => "rotation",
            IsometryKind::Reflection { .. } => "reflection",
            IsometryKind::Glide { .. } => "glide",
        }
    }
}

/// A distance-preserving map `p -> linear * p + translation`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Isometry2 {
    linear: Mat2,
    translation: Vec2,
    kind: IsometryKind,
}

fn normalize_angle(a: f64) -> f64 {
    let mut a = a.rem_euclid(2.0 * PI);
    if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Recovers the kind of the isometry `p -> linear * p + translation`.
pub fn classify_isometry(linear: &Mat2, translation: Vec2) -> Result<IsometryKind> {
    let err = linear.orthogonality_error();
    if !(err <= ALGEBRAIC_TOL) {
        return Err(Error::NonOrthogonal(err));
    }
    Ok(classify_unchecked(linear, translation))
}

fn classify_unchecked(linear: &Mat2, t: Vec2) -> IsometryKind {
    let m = &linear.0;
    if linear.det() > 0.0 {
        if linear.max_abs_diff(&Mat2::IDENTITY) <= ALGEBRAIC_TOL {
            if t.norm() <= ALGEBRAIC_TOL {
                IsometryKind::Identity
            } else {
                IsometryKind::Translation { vector: t }
            }
        } else {
            let angle = normalize_angle(m[1][0].atan2(m[0][0]));
            // (I - R) c = t
            let i_minus_r = Mat2([[1.0 - m[0][0], -m[0][1]], [-m[1][0], 1.0 - m[1][1]]]);
            let center = i_minus_r.inverse().map(|inv| inv.apply(t)).unwrap_or(Vec2::ZERO);
            IsometryKind::Rotation { center, angle }
        }
    } else {
        let phi = m[1][0].atan2(m[0][0]) / 2.0;
        let mut dir = Vec2::new(phi.cos(), phi.sin());
        let normal = dir.perp();
        let along = t.dot(dir);
        let across = t.dot(normal);
        let point = normal * (across / 2.0);
        if along.abs() <= ALGEBRAIC_TOL {
            IsometryKind::Reflection { axis: Line { point, direction: dir } }
        } else {
            if along < 0.0 {
                dir = -dir;
            }
            IsometryKind::Glide { axis: Line { point, direction: dir }, shift: along.abs() }
        }
    }
}

impl Isometry2 {
    pub fn identity() -> Self {
        Isometry2 { linear: Mat2::IDENTITY, translation: Vec2::ZERO, kind: IsometryKind::Identity }
    }

    pub fn from_parts(linear: Mat2, translation: Vec2) -> Result<Self> {
        if !translation.is_finite() || linear.0.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("non-finite isometry component".into()));
        }
        let kind = classify_isometry(&linear, translation)?;
        Ok(Isometry2 { linear, translation, kind })
    }

    /// Builds an isometry whose linear part is already known to be orthogonal
    /// up to accumulated rounding.
    fn from_parts_trusted(linear: Mat2, translation: Vec2) -> Self {
        let kind = classify_unchecked(&linear, translation);
        Isometry2 { linear, translation, kind }
    }

    pub fn translation(v: Vec2) -> Self {
        Self::from_parts_trusted(Mat2::IDENTITY, v)
    }

    /// Rotation by `angle` radians about `center`.
    pub fn rotation(center: Point2, angle: f64) -> Self {
        let r = Mat2::rotation(angle);
        let t = center - r.apply(center);
        Self::from_parts_trusted(r, t)
    }

    pub fn reflection(axis: Line) -> Self {
        Self::glide(axis, 0.0)
    }

    /// Reflection across `axis` followed by a shift along it.
    pub fn glide(axis: Line, shift: f64) -> Self {
        let d = axis.direction.normalized();
        let phi = d.y.atan2(d.x);
        let r = Mat2::reflection(phi);
        let t = axis.point - r.apply(axis.point) + d * shift;
        Self::from_parts_trusted(r, t)
    }

    pub fn linear(&self) -> &Mat2 {
        &self.linear
    }

    pub fn translation_part(&self) -> Vec2 {
        self.translation
    }

    pub fn kind(&self) -> IsometryKind {
        self.kind
    }

    pub fn det(&self) -> f64 {
        self.linear.det()
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        self.linear.apply(p) + self.translation
    }

    /// `self ∘ other`: applies `other` first.
    pub fn compose(&self, other: &Isometry2) -> Isometry2 {
        let linear = self.linear.mul(&other.linear);
        let translation = self.linear.apply(other.translation) + self.translation;
        Self::from_parts_trusted(linear, translation)
    }

    pub fn inverse(&self) -> Isometry2 {
        let inv = self.linear.transpose();
        let t = -inv.apply(self.translation);
        Self::from_parts_trusted(inv, t)
    }

    /// Order of a rotation (2 for 180 degrees, ...), `None` for other kinds or
    /// non-crystallographic angles.
    pub fn rotation_order(&self) -> Option<u32> {
        match self.kind {
            IsometryKind::Rotation { angle, .. } => {
                let n = 2.0 * PI / angle.abs();
                let r = n.round();
                ((n - r).abs() < 1e-6 && r >= 2.0).then_some(r as u32)
            }
            _ => None,
        }
    }

    /// Maximum deviation between the two maps' matrices and translations.
    pub fn approx_eq(&self, other: &Isometry2, tol: f64) -> bool {
        self.linear.max_abs_diff(&other.linear) <= tol
            && (self.translation - other.translation).norm() <= tol
    }

    /// Serializable description with angles in degrees.
    pub fn to_record(&self) -> IsometryRecord {
        let mut rec = IsometryRecord {
            kind: self.kind.name().to_string(),
            linear: self.linear.0,
            translation: self.translation.to_array(),
            center: None,
            angle_deg: None,
            axis_point: None,
            axis_angle_deg: None,
            shift: None,
        };
        match self.kind {
            IsometryKind::Rotation { center, angle } => {
                rec.center = Some(center.to_array());
                rec.angle_deg = Some(angle.to_degrees());
            }
            IsometryKind::Reflection { axis } => {
                rec.axis_point = Some(axis.point.to_array());
                rec.axis_angle_deg = Some(axis.angle_degrees());
            }
            IsometryKind::Glide { axis, shift } => {
                rec.axis_point = Some(axis.point.to_array());
                rec.axis_angle_deg = Some(axis.direction.y.atan2(axis.direction.x).to_degrees());
                rec.shift = Some(shift);
            }
            _ => {}
        }
        rec
    }
}

impl fmt::Display for Isometry2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            IsometryKind::Identity => write!(f, "identity"),
            IsometryKind::Translation { vector } => write!(f, "translation {vector}"),
            IsometryKind::Rotation { center, angle } => {
                write!(f, "rotation {:.2}° about {center}", angle.to_degrees())
            }
            IsometryKind::Reflection { axis } => {
                write!(f, "reflection across {:.2}° line through {}", axis.angle_degrees(), axis.point)
            }
            IsometryKind::Glide { axis, shift } => write!(
                f,
                "glide across {:.2}° line through {} by {shift:.4}",
                axis.angle_degrees(),
                axis.point
            ),
        }
    }
}

/// JSON form of an isometry. Angles are in degrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryRecord {
    pub kind: String,
    pub linear: [[f64; 2]; 2],
    pub translation: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub center: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub angle_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub axis_point: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub axis_angle_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub shift: Option<f64>,
}

impl TryFrom<&IsometryRecord> for Isometry2 {
    type Error = Error;
    fn try_from(r: &IsometryRecord) -> Result<Self> {
        Isometry2::from_parts(Mat2(r.linear), r.translation.into())
    }
}

/// Signed area of a polygon (positive for counter-clockwise order in a y-up frame).
pub fn polygon_area(poly: &[Point2]) -> f64 {
    let n = poly.len();
    (0..n).map(|i| poly[i].cross(poly[(i + 1) % n])).sum::<f64>() / 2.0
}

/// Point-in-convex-or-simple polygon test with an inclusive tolerance band.
pub fn polygon_contains(poly: &[Point2], p: Point2, eps: f64) -> bool {
    // Convex polygons only: every catalog domain is convex.
    let n = poly.len();
    let sign = polygon_area(poly).signum();
    (0..n).all(|i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let e = b - a;
        sign * e.cross(p - a) / e.norm() >= -eps
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_composition() {
        let r = Isometry2::rotation(Vec2::new(3.0, -1.0), 0.7);
        let c = Isometry2::identity().compose(&r);
        assert!(c.approx_eq(&r, 1e-12));
        assert_eq!(c.kind().name(), "rotation");
    }

    #[test]
    fn half_turn_is_involution() {
        let r = Isometry2::rotation(Vec2::new(5.0, 2.0), PI);
        assert_eq!(r.compose(&r).kind(), IsometryKind::Identity);
    }

    #[test]
    fn reflection_after_translation_along_axis_is_glide() {
        // Expanding by hand: reflection across the x-axis is diag(1,-1) with no
        // translation; composing with translation (3,0) applied first gives
        // p -> diag(1,-1) (p + (3,0)) = diag(1,-1) p + (3,0).
        let refl = Isometry2::reflection(Line::new(Vec2::ZERO, Vec2::new(1.0, 0.0)));
        let g = refl.compose(&Isometry2::translation(Vec2::new(3.0, 0.0)));
        assert_eq!(g.translation_part(), Vec2::new(3.0, 0.0));
        match g.kind() {
            IsometryKind::Glide { axis, shift } => {
                assert_abs_diff_eq!(shift, 3.0, epsilon = 1e-12);
                assert_abs_diff_eq!(axis.offset(), 0.0, epsilon = 1e-12);
                assert_abs_diff_eq!(axis.direction.x.abs(), 1.0, epsilon = 1e-12);
            }
            k => panic!("expected glide, got {k:?}"),
        }
    }

    #[test]
    fn classify_identity() {
        assert_eq!(classify_isometry(&Mat2::IDENTITY, Vec2::ZERO).unwrap(), IsometryKind::Identity);
    }

    #[test]
    fn classify_third_turn_solves_fixed_point() {
        let r = Mat2::rotation(2.0 * PI / 3.0);
        let c = Vec2::new(4.0, 7.0);
        let t = c - r.apply(c);
        let iso = Isometry2::from_parts(r, t).unwrap();
        assert_eq!(iso.rotation_order(), Some(3));
        match iso.kind() {
            IsometryKind::Rotation { center, angle } => {
                assert_abs_diff_eq!(center.x, 4.0, epsilon = 1e-9);
                assert_abs_diff_eq!(center.y, 7.0, epsilon = 1e-9);
                assert_abs_diff_eq!(angle, 2.0 * PI / 3.0, epsilon = 1e-12);
            }
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn classify_canonical_glide() {
        let k = classify_isometry(&Mat2([[1.0, 0.0], [0.0, -1.0]]), Vec2::new(5.0, 0.0)).unwrap();
        match k {
            IsometryKind::Glide { axis, shift } => {
                assert_abs_diff_eq!(shift, 5.0, epsilon = 1e-12);
                assert_abs_diff_eq!(axis.angle_degrees(), 0.0, epsilon = 1e-9);
                assert_abs_diff_eq!(axis.offset(), 0.0, epsilon = 1e-12);
            }
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn non_orthogonal_rejected() {
        let e = classify_isometry(&Mat2([[1.0, 0.1], [0.0, 1.0]]), Vec2::ZERO);
        assert!(matches!(e, Err(Error::NonOrthogonal(_))));
    }

    #[test]
    fn reflection_axis_offset() {
        // x -> -x + 6 fixes the vertical line x = 3
        let k = classify_isometry(&Mat2([[-1.0, 0.0], [0.0, 1.0]]), Vec2::new(6.0, 0.0)).unwrap();
        match k {
            IsometryKind::Reflection { axis } => {
                assert_abs_diff_eq!(axis.distance_to(Vec2::new(3.0, 11.0)), 0.0, epsilon = 1e-12);
                assert_abs_diff_eq!(axis.angle_degrees(), 90.0, epsilon = 1e-9);
            }
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn polygon_helpers() {
        let sq = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        assert_abs_diff_eq!(polygon_area(&sq), 1.0);
        assert!(polygon_contains(&sq, Vec2::new(0.5, 0.5), 0.0));
        assert!(polygon_contains(&sq, Vec2::new(1.0, 0.5), 1e-12));
        assert!(!polygon_contains(&sq, Vec2::new(1.1, 0.5), 1e-12));
    }
}
