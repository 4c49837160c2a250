//! Translation lattices and their Bravais classes.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Mat2, Point2, Vec2};

/// Angular tolerance for lattice class decisions, in degrees.
pub const ANGLE_TOL_DEG: f64 = 0.5;
/// Relative length tolerance for lattice class decisions.
pub const LENGTH_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeClass {
    Oblique,
    Rectangular,
    CenteredRectangular,
    Square,
    Hexagonal,
}

impl LatticeClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            LatticeClass::Oblique => "oblique",
            LatticeClass::Rectangular => "rectangular",
            LatticeClass::CenteredRectangular => "centered-rectangular",
            LatticeClass::Square => "square",
            LatticeClass::Hexagonal => "hexagonal",
        }
    }
}

impl fmt::Display for LatticeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A 2D translation lattice spanned by `a` and `b` (pattern coordinates).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub a: Vec2,
    pub b: Vec2,
    #[serde(rename = "latticeClass")]
    pub class: LatticeClass,
}

fn rel_eq(x: f64, y: f64) -> bool {
    (x - y).abs() <= LENGTH_TOL * x.abs().max(y.abs())
}

fn angle_deg(a: Vec2, b: Vec2) -> f64 {
    (a.dot(b) / (a.norm() * b.norm())).clamp(-1.0, 1.0).acos().to_degrees()
}

impl Lattice {
    /// Builds a lattice and assigns the most specific class its basis satisfies.
    pub fn new(a: Vec2, b: Vec2) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::Invalid("non-finite lattice vector".into()));
        }
        let scale = a.norm() * b.norm();
        if scale == 0.0 || a.cross(b).abs() <= 1e-6 * scale {
            return Err(Error::DegenerateLattice);
        }
        let mut l = Lattice { a, b, class: LatticeClass::Oblique };
        l.class = [
            LatticeClass::Hexagonal,
            LatticeClass::Square,
            LatticeClass::Rectangular,
            LatticeClass::CenteredRectangular,
        ]
        .into_iter()
        .find(|c| l.satisfies(*c))
        .unwrap_or(LatticeClass::Oblique);
        Ok(l)
    }

    /// Builds a lattice with an explicit class, validating the class constraints.
    pub fn with_class(a: Vec2, b: Vec2, class: LatticeClass) -> Result<Self> {
        let mut l = Lattice::new(a, b)?;
        if !l.satisfies(class) {
            return Err(Error::Invalid(format!("basis {a}, {b} does not satisfy {class} constraints")));
        }
        l.class = class;
        Ok(l)
    }

    pub fn square(side: f64) -> Self {
        Lattice { a: Vec2::new(side, 0.0), b: Vec2::new(0.0, side), class: LatticeClass::Square }
    }

    pub fn rectangular(w: f64, h: f64) -> Self {
        Lattice { a: Vec2::new(w, 0.0), b: Vec2::new(0.0, h), class: LatticeClass::Rectangular }
    }

    /// Hexagonal lattice with `a` along +x and 120 degrees between `a` and `b`.
    pub fn hexagonal(side: f64) -> Self {
        Lattice {
            a: Vec2::new(side, 0.0),
            b: Vec2::new(-side / 2.0, side * 3f64.sqrt() / 2.0),
            class: LatticeClass::Hexagonal,
        }
    }

    /// Rhombic primitive basis of a centered rectangular lattice whose
    /// conventional cell is `w` x `h`; the mirror direction `a + b` is +x.
    pub fn centered(w: f64, h: f64) -> Self {
        Lattice {
            a: Vec2::new(w / 2.0, -h / 2.0),
            b: Vec2::new(w / 2.0, h / 2.0),
            class: LatticeClass::CenteredRectangular,
        }
    }

    /// Whether the basis, exactly as given, meets the metric constraints of `class`.
    pub fn satisfies(&self, class: LatticeClass) -> bool {
        let (la, lb) = (self.a.norm(), self.b.norm());
        let ang = angle_deg(self.a, self.b);
        match class {
            LatticeClass::Oblique => true,
            LatticeClass::Rectangular => (ang - 90.0).abs() <= ANGLE_TOL_DEG,
            LatticeClass::CenteredRectangular => rel_eq(la, lb),
            LatticeClass::Square => rel_eq(la, lb) && (ang - 90.0).abs() <= ANGLE_TOL_DEG,
            LatticeClass::Hexagonal => rel_eq(la, lb) && (ang - 120.0).abs() <= ANGLE_TOL_DEG,
        }
    }

    pub fn basis(&self) -> Mat2 {
        Mat2::from_columns(self.a, self.b)
    }

    pub fn area(&self) -> f64 {
        self.a.cross(self.b).abs()
    }

    /// Lattice (fractional) coordinates of a displacement.
    pub fn to_frac(&self, v: Vec2) -> Vec2 {
        self.basis().inverse().expect("non-degenerate lattice").apply(v)
    }

    pub fn to_pattern(&self, f: Vec2) -> Vec2 {
        self.a * f.x + self.b * f.y
    }

    /// Displacement reduced to the lattice vector nearest the origin
    /// (minimum-image convention over the reduced basis).
    pub fn wrap(&self, v: Vec2) -> Vec2 {
        let r = self.reduced();
        let f = r.to_frac(v);
        let base = v - r.to_pattern(Vec2::new(f.x.round(), f.y.round()));
        let mut best = base;
        for i in -1..=1 {
            for j in -1..=1 {
                let c = base - r.to_pattern(Vec2::new(i as f64, j as f64));
                if c.norm_sq() < best.norm_sq() {
                    best = c;
                }
            }
        }
        best
    }

    /// Distance between two points modulo lattice translations.
    pub fn periodic_distance(&self, p: Point2, q: Point2) -> f64 {
        self.wrap(p - q).norm()
    }

    /// Lagrange–Gauss reduced basis: `|a| <= |b|`, `|a.b| <= |a|^2 / 2`, `a x b > 0`.
    pub fn reduced(&self) -> Lattice {
        let (mut a, mut b) = (self.a, self.b);
        if a.norm_sq() > b.norm_sq() {
            std::mem::swap(&mut a, &mut b);
        }
        loop {
            let mu = (a.dot(b) / a.norm_sq()).round();
            b = b - a * mu;
            if b.norm_sq() < a.norm_sq() - 1e-12 {
                std::mem::swap(&mut a, &mut b);
            } else {
                break;
            }
        }
        if a.cross(b) < 0.0 {
            b = -b;
        }
        Lattice::new(a, b).unwrap_or(*self)
    }

    /// Reduced basis rewritten in the conventional form of its most specific class:
    /// 120 degrees for hexagonal lattices, a rhombic basis for centered ones.
    pub fn canonical(&self) -> Lattice {
        let r = self.reduced();
        let (a, b) = (r.a, r.b);
        let candidates = [(a, b), (a, b - a), (a, b + a), (b, b - a), (b - a, b)];
        let rank = |c: LatticeClass| match c {
            LatticeClass::Hexagonal => 4,
            LatticeClass::Square => 4,
            LatticeClass::Rectangular => 3,
            LatticeClass::CenteredRectangular => 2,
            LatticeClass::Oblique => 1,
        };
        let mut best = r;
        for (u, v) in candidates {
            let Ok(l) = Lattice::new(u, v) else { continue };
            if (l.area() - r.area()).abs() > 1e-6 * r.area() {
                continue;
            }
            if rank(l.class) > rank(best.class) {
                best = l;
            }
        }
        best
    }

    /// Projects the basis onto the exact metric of `class`, keeping `a`'s
    /// direction and the orientation of the basis.
    pub fn snapped(&self, class: LatticeClass) -> Lattice {
        let (a, b) = (self.a, self.b);
        let orient = a.cross(b).signum();
        let len = (a.norm() + b.norm()) / 2.0;
        let (na, nb) = match class {
            LatticeClass::Oblique => (a, b),
            LatticeClass::Rectangular => {
                let d = a.normalized().perp() * orient;
                (a, d * b.dot(d))
            }
            LatticeClass::CenteredRectangular => {
                // equalize lengths symmetrically about the bisector
                let bis = (a.normalized() + b.normalized()).normalized();
                let half = angle_deg(a, b).to_radians() / 2.0;
                let perp = bis.perp();
                let s = if perp.dot(a) >= 0.0 { 1.0 } else { -1.0 };
                (
                    (bis * half.cos() + perp * (s * half.sin())) * len,
                    (bis * half.cos() - perp * (s * half.sin())) * len,
                )
            }
            LatticeClass::Square => {
                let u = a.normalized() * len;
                (u, u.perp() * orient)
            }
            LatticeClass::Hexagonal => {
                let u = a.normalized() * len;
                (u, u.rotated(orient * 2.0 * std::f64::consts::PI / 3.0))
            }
        };
        Lattice { a: na, b: nb, class }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn classes_of_standard_lattices() {
        assert_eq!(Lattice::new(Vec2::new(10.0, 0.0), Vec2::new(0.0, 10.0)).unwrap().class, LatticeClass::Square);
        assert_eq!(Lattice::new(Vec2::new(10.0, 0.0), Vec2::new(0.0, 7.0)).unwrap().class, LatticeClass::Rectangular);
        assert_eq!(Lattice::hexagonal(10.0).satisfies(LatticeClass::Hexagonal), true);
        let h = Lattice::hexagonal(10.0);
        assert_eq!(Lattice::new(h.a, h.b).unwrap().class, LatticeClass::Hexagonal);
        let c = Lattice::centered(10.0, 16.0);
        assert_eq!(Lattice::new(c.a, c.b).unwrap().class, LatticeClass::CenteredRectangular);
        assert_eq!(Lattice::new(Vec2::new(10.0, 0.0), Vec2::new(3.0, 8.0)).unwrap().class, LatticeClass::Oblique);
    }

    #[test]
    fn dependent_basis_rejected() {
        assert_eq!(Lattice::new(Vec2::new(1.0, 2.0), Vec2::new(2.0, 4.0)), Err(Error::DegenerateLattice));
    }

    #[test]
    fn with_class_validates() {
        assert!(Lattice::with_class(Vec2::new(10.0, 0.0), Vec2::new(0.0, 10.5), LatticeClass::Square).is_err());
        assert!(Lattice::with_class(Vec2::new(10.0, 0.0), Vec2::new(0.0, 10.05), LatticeClass::Square).is_ok());
    }

    #[test]
    fn reduction_finds_short_basis() {
        let l = Lattice::new(Vec2::new(10.0, 0.0), Vec2::new(33.0, 7.0)).unwrap().reduced();
        // shortest vectors of this lattice are (3, 7) and (7, -7)
        assert_abs_diff_eq!(l.a.norm(), 58f64.sqrt(), epsilon = 1e-9);
        assert_abs_diff_eq!(l.b.norm(), 98f64.sqrt(), epsilon = 1e-9);
    }

    #[test]
    fn canonical_hexagonal_uses_120_degrees() {
        let h = Lattice::hexagonal(20.0);
        let sixty = Lattice::new(h.a, h.a + h.b).unwrap();
        let c = sixty.canonical();
        assert_eq!(c.class, LatticeClass::Hexagonal);
        assert_abs_diff_eq!(angle_deg(c.a, c.b), 120.0, epsilon = 1e-9);
    }

    #[test]
    fn canonical_centered_is_rhombic() {
        let c = Lattice::centered(10.0, 30.0);
        // a non-rhombic primitive basis of the same lattice
        let skew = Lattice::new(c.a, c.a + c.b).unwrap();
        let can = skew.canonical();
        assert_eq!(can.class, LatticeClass::CenteredRectangular);
        assert_abs_diff_eq!(can.area(), c.area(), epsilon = 1e-9);
    }

    #[test]
    fn wrap_returns_minimum_image() {
        let l = Lattice::square(10.0);
        let w = l.wrap(Vec2::new(23.0, -18.0));
        assert_abs_diff_eq!(w.x, 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(w.y, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn snapping_restores_exact_metric() {
        let l = Lattice::new(Vec2::new(40.02, 0.01), Vec2::new(-19.97, 34.68)).unwrap();
        let s = l.snapped(LatticeClass::Hexagonal);
        assert_abs_diff_eq!(angle_deg(s.a, s.b), 120.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.a.norm(), s.b.norm(), epsilon = 1e-9);
        let c = Lattice::new(Vec2::new(30.0, -20.1), Vec2::new(30.2, 20.0)).unwrap();
        let cs = c.snapped(LatticeClass::CenteredRectangular);
        assert_abs_diff_eq!(cs.a.norm(), cs.b.norm(), epsilon = 1e-9);
    }
}
