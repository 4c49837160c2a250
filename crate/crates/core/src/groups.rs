//! The seventeen wallpaper groups.
//!
//! Each group is described by its coset representatives modulo lattice
//! translations, written as affine maps on lattice (fractional) coordinates
//! in the standard crystallographic setting. The origin sits on a rotation
//! center of the highest order (on a mirror for pm/cm, on a glide axis for
//! pg). Hexagonal groups use 120 degrees between `a` and `b`; the centered
//! groups use a rhombic primitive basis whose mirror runs along `a + b`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Isometry2, IsometryKind, Line, Mat2, Point2, Vec2, GEOMETRIC_TOL};
use crate::lattice::{Lattice, LatticeClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupName {
    P1,
    Pm,
    Pg,
    Cm,
    P2,
    Pmm,
    Pmg,
    Pgg,
    Cmm,
    P3,
    P3m1,
    P31m,
    P4,
    P4m,
    P4g,
    P6,
    P6m,
}

impl GroupName {
    pub const ALL: [GroupName; 17] = [
        GroupName::P1,
        GroupName::Pm,
        GroupName::Pg,
        GroupName::Cm,
        GroupName::P2,
        GroupName::Pmm,
        GroupName::Pmg,
        GroupName::Pgg,
        GroupName::Cmm,
        GroupName::P3,
        GroupName::P3m1,
        GroupName::P31m,
        GroupName::P4,
        GroupName::P4m,
        GroupName::P4g,
        GroupName::P6,
        GroupName::P6m,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            GroupName::P1 => "p1",
            GroupName::Pm => "pm",
            GroupName::Pg => "pg",
            GroupName::Cm => "cm",
            GroupName::P2 => "p2",
            GroupName::Pmm => "pmm",
            GroupName::Pmg => "pmg",
            GroupName::Pgg => "pgg",
            GroupName::Cmm => "cmm",
            GroupName::P3 => "p3",
            GroupName::P3m1 => "p3m1",
            GroupName::P31m => "p31m",
            GroupName::P4 => "p4",
            GroupName::P4m => "p4m",
            GroupName::P4g => "p4g",
            GroupName::P6 => "p6",
            GroupName::P6m => "p6m",
        }
    }

    pub fn group(&self) -> &'static WallpaperGroup {
        &catalog()[*self as usize]
    }
}

impl fmt::Display for GroupName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GroupName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        GroupName::ALL
            .iter()
            .copied()
            .find(|g| g.as_str() == s.trim())
            .ok_or_else(|| Error::UnknownGroup(s.to_string()))
    }
}

impl Serialize for GroupName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for GroupName {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Affine map on lattice coordinates: `f -> m f + t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FracOp {
    pub m: [[i32; 2]; 2],
    pub t: [f64; 2],
}

fn frac_reduce(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if (1.0 - r) < 1e-9 {
        0.0
    } else {
        r
    }
}

impl FracOp {
    pub const IDENTITY: FracOp = FracOp { m: [[1, 0], [0, 1]], t: [0.0, 0.0] };

    const fn new(m: [[i32; 2]; 2], t: [f64; 2]) -> Self {
        FracOp { m, t }
    }

    pub fn apply(&self, f: Vec2) -> Vec2 {
        let m = &self.m;
        Vec2::new(
            m[0][0] as f64 * f.x + m[0][1] as f64 * f.y + self.t[0],
            m[1][0] as f64 * f.x + m[1][1] as f64 * f.y + self.t[1],
        )
    }

    pub fn det(&self) -> i32 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &FracOp) -> FracOp {
        let (a, b) = (&self.m, &other.m);
        let mut m = [[0; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        let t = self.apply(Vec2::new(other.t[0], other.t[1]));
        FracOp { m, t: [t.x, t.y] }
    }

    pub fn inverse(&self) -> FracOp {
        let d = self.det();
        let m = &self.m;
        let inv = [[m[1][1] * d, -m[0][1] * d], [-m[1][0] * d, m[0][0] * d]];
        let op = FracOp { m: inv, t: [0.0, 0.0] };
        let t = op.apply(Vec2::new(-self.t[0], -self.t[1]));
        FracOp { m: inv, t: [t.x, t.y] }
    }

    /// Same linear part, translation reduced into [0, 1).
    pub fn reduced(&self) -> FracOp {
        FracOp { m: self.m, t: [frac_reduce(self.t[0]), frac_reduce(self.t[1])] }
    }

    pub fn same_coset(&self, other: &FracOp) -> bool {
        let (a, b) = (self.reduced(), other.reduced());
        let close = |x: f64, y: f64| {
            let d = (x - y).rem_euclid(1.0);
            d < 1e-9 || 1.0 - d < 1e-9
        };
        a.m == b.m && close(a.t[0], b.t[0]) && close(a.t[1], b.t[1])
    }

    /// Order of the linear part (1, 2, 3, 4 or 6).
    pub fn linear_order(&self) -> u32 {
        let mut p = FracOp { m: self.m, t: [0.0, 0.0] };
        for k in 1..=12 {
            if p.m == [[1, 0], [0, 1]] {
                return k;
            }
            p = p.compose(&FracOp { m: self.m, t: [0.0, 0.0] });
        }
        unreachable!("crystallographic linear parts have order at most 6")
    }

    /// The isometry this op induces in pattern coordinates for a lattice whose
    /// cell origin sits at `origin`.
    pub fn to_isometry(&self, lattice: &Lattice, origin: Point2) -> Isometry2 {
        let basis = lattice.basis();
        let inv = basis.inverse().expect("non-degenerate lattice");
        let m = Mat2([
            [self.m[0][0] as f64, self.m[0][1] as f64],
            [self.m[1][0] as f64, self.m[1][1] as f64],
        ]);
        let linear = basis.mul(&m).mul(&inv);
        let t = basis.apply(Vec2::new(self.t[0], self.t[1]));
        // p -> origin + B (M B^-1 (p - origin) + t)
        let translation = origin - linear.apply(origin) + t;
        let linear = orthonormalize(linear);
        Isometry2::from_parts(linear, translation).unwrap_or_else(|_| {
            // lattice not metrically compatible; keep the nearest orthogonal map
            Isometry2::from_parts(orthonormalize(linear), translation).expect("orthonormalized")
        })
    }
}

/// Nearest orthogonal matrix with the same determinant sign (polar decomposition in 2D).
fn orthonormalize(m: Mat2) -> Mat2 {
    let a = &m.0;
    if m.det() >= 0.0 {
        let (c, s) = (a[0][0] + a[1][1], a[1][0] - a[0][1]);
        let n = (c * c + s * s).sqrt();
        Mat2([[c / n, -s / n], [s / n, c / n]])
    } else {
        let (c, s) = (a[0][0] - a[1][1], a[1][0] + a[0][1]);
        let n = (c * c + s * s).sqrt();
        Mat2([[c / n, s / n], [s / n, -c / n]])
    }
}

/// Catalog entry for one wallpaper group.
#[derive(Debug, Clone, Serialize)]
pub struct WallpaperGroup {
    pub name: GroupName,
    #[serde(rename = "highestRotationOrder")]
    pub highest_rotation_order: u32,
    #[serde(rename = "hasMirror")]
    pub has_mirror: bool,
    #[serde(rename = "hasGlide")]
    pub has_glide: bool,
    #[serde(rename = "latticeClass")]
    pub lattice_class: LatticeClass,
    #[serde(rename = "pointGroupOrder")]
    pub point_group_order: usize,
    /// Coset representatives modulo lattice translations; the first is the identity.
    #[serde(rename = "cosetRepresentatives")]
    pub ops: Vec<FracOp>,
    /// Indices into `ops` of a generating set (together with translations).
    #[serde(rename = "generatorIndices")]
    pub generators: Vec<usize>,
    /// Fundamental domain polygon in lattice coordinates (convex).
    #[serde(rename = "fdPolygon")]
    pub fd_polygon: Vec<Vec2>,
}

const I: [[i32; 2]; 2] = [[1, 0], [0, 1]];
const NEG: [[i32; 2]; 2] = [[-1, 0], [0, -1]];
const MX: [[i32; 2]; 2] = [[-1, 0], [0, 1]]; // (-x, y)
const MY: [[i32; 2]; 2] = [[1, 0], [0, -1]]; // (x, -y)
const SWAP: [[i32; 2]; 2] = [[0, 1], [1, 0]]; // (y, x)
const NSWAP: [[i32; 2]; 2] = [[0, -1], [-1, 0]]; // (-y, -x)
const R4: [[i32; 2]; 2] = [[0, -1], [1, 0]]; // (-y, x)
const R4I: [[i32; 2]; 2] = [[0, 1], [-1, 0]]; // (y, -x)
// hexagonal setting, gamma = 120 degrees
const H3: [[i32; 2]; 2] = [[0, -1], [1, -1]]; // (-y, x-y)
const H3I: [[i32; 2]; 2] = [[-1, 1], [-1, 0]]; // (-x+y, -x)
const H6: [[i32; 2]; 2] = [[1, -1], [1, 0]]; // (x-y, x)
const H6I: [[i32; 2]; 2] = [[0, 1], [-1, 1]]; // (y, -x+y)
const HM1: [[i32; 2]; 2] = [[0, -1], [-1, 0]]; // (-y, -x)
const HM2: [[i32; 2]; 2] = [[-1, 1], [0, 1]]; // (-x+y, y)
const HM3: [[i32; 2]; 2] = [[1, 0], [1, -1]]; // (x, x-y)
const HM4: [[i32; 2]; 2] = [[0, 1], [1, 0]]; // (y, x)
const HM5: [[i32; 2]; 2] = [[1, -1], [0, -1]]; // (x-y, -y)
const HM6: [[i32; 2]; 2] = [[-1, 0], [-1, 1]]; // (-x, -x+y)

fn op(m: [[i32; 2]; 2]) -> FracOp {
    FracOp::new(m, [0.0, 0.0])
}

fn opt(m: [[i32; 2]; 2], t: [f64; 2]) -> FracOp {
    FracOp::new(m, t)
}

fn poly(pts: &[[f64; 2]]) -> Vec<Vec2> {
    pts.iter().map(|p| Vec2::new(p[0], p[1])).collect()
}

fn build(name: GroupName) -> WallpaperGroup {
    use GroupName::*;
    let h = 0.5;
    let (class, ops, generators, fd): (LatticeClass, Vec<FracOp>, Vec<usize>, Vec<Vec2>) = match name {
        P1 => (LatticeClass::Oblique, vec![op(I)], vec![], poly(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])),
        P2 => (
            LatticeClass::Oblique,
            vec![op(I), op(NEG)],
            vec![1],
            poly(&[[0.0, 0.0], [h, 0.0], [h, 1.0], [0.0, 1.0]]),
        ),
        Pm => (
            LatticeClass::Rectangular,
            vec![op(I), op(MX)],
            vec![1],
            poly(&[[0.0, 0.0], [h, 0.0], [h, 1.0], [0.0, 1.0]]),
        ),
        Pg => (
            LatticeClass::Rectangular,
            vec![op(I), opt(MX, [0.0, h])],
            vec![1],
            poly(&[[0.0, 0.0], [1.0, 0.0], [1.0, h], [0.0, h]]),
        ),
        Cm => (
            LatticeClass::CenteredRectangular,
            vec![op(I), op(SWAP)],
            vec![1],
            poly(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]),
        ),
        Pmm => (
            LatticeClass::Rectangular,
            vec![op(I), op(NEG), op(MX), op(MY)],
            vec![1, 2],
            poly(&[[0.0, 0.0], [h, 0.0], [h, h], [0.0, h]]),
        ),
        Pmg => (
            LatticeClass::Rectangular,
            vec![op(I), op(NEG), opt(MX, [h, 0.0]), opt(MY, [h, 0.0])],
            vec![1, 2],
            poly(&[[0.0, 0.0], [0.25, 0.0], [0.25, 1.0], [0.0, 1.0]]),
        ),
        Pgg => (
            LatticeClass::Rectangular,
            vec![op(I), op(NEG), opt(MX, [h, h]), opt(MY, [h, h])],
            vec![1, 2],
            poly(&[[0.0, 0.0], [h, 0.0], [h, h], [0.0, h]]),
        ),
        Cmm => (
            LatticeClass::CenteredRectangular,
            vec![op(I), op(NEG), op(SWAP), op(NSWAP)],
            vec![1, 2],
            poly(&[[0.0, 0.0], [1.0, 0.0], [h, h]]),
        ),
        P4 => (
            LatticeClass::Square,
            vec![op(I), op(R4), op(NEG), op(R4I)],
            vec![1],
            poly(&[[0.0, 0.0], [h, 0.0], [h, h], [0.0, h]]),
        ),
        P4m => (
            LatticeClass::Square,
            vec![op(I), op(R4), op(NEG), op(R4I), op(MX), op(MY), op(SWAP), op(NSWAP)],
            vec![1, 4],
            poly(&[[0.0, 0.0], [h, 0.0], [h, h]]),
        ),
        P4g => (
            LatticeClass::Square,
            vec![
                op(I),
                op(R4),
                op(NEG),
                op(R4I),
                opt(MX, [h, h]),
                opt(MY, [h, h]),
                opt(SWAP, [h, h]),
                opt(NSWAP, [h, h]),
            ],
            vec![1, 6],
            poly(&[[0.0, 0.0], [h, 0.0], [0.0, h]]),
        ),
        P3 => (
            LatticeClass::Hexagonal,
            vec![op(I), op(H3), op(H3I)],
            vec![1],
            poly(&[[0.0, 0.0], [2.0 / 3.0, 1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0], [-1.0 / 3.0, 1.0 / 3.0]]),
        ),
        P3m1 => (
            LatticeClass::Hexagonal,
            vec![op(I), op(H3), op(H3I), op(HM1), op(HM2), op(HM3)],
            vec![1, 3],
            poly(&[[0.0, 0.0], [2.0 / 3.0, 1.0 / 3.0], [1.0 / 3.0, 2.0 / 3.0]]),
        ),
        P31m => (
            LatticeClass::Hexagonal,
            vec![op(I), op(H3), op(H3I), op(HM4), op(HM5), op(HM6)],
            vec![1, 3],
            poly(&[[0.0, 0.0], [1.0, 0.0], [2.0 / 3.0, 1.0 / 3.0]]),
        ),
        P6 => (
            LatticeClass::Hexagonal,
            vec![op(I), op(H6), op(H3), op(NEG), op(H3I), op(H6I)],
            vec![1],
            poly(&[[0.0, 0.0], [1.0, 0.0], [2.0 / 3.0, 1.0 / 3.0]]),
        ),
        P6m => (
            LatticeClass::Hexagonal,
            vec![
                op(I),
                op(H6),
                op(H3),
                op(NEG),
                op(H3I),
                op(H6I),
                op(HM1),
                op(HM2),
                op(HM3),
                op(HM4),
                op(HM5),
                op(HM6),
            ],
            vec![1, 9],
            poly(&[[0.0, 0.0], [h, 0.0], [2.0 / 3.0, 1.0 / 3.0]]),
        ),
    };
    let s = name.as_str();
    let highest_rotation_order = ops.iter().filter(|o| o.det() == 1).map(|o| o.linear_order()).max().unwrap_or(1);
    // p4g carries diagonal mirrors that avoid its four-fold centers
    let has_mirror = s.contains('m') || name == P4g;
    // Groups carrying glide axes that are not mirror axes, including those
    // whose names show no 'g' (cm, cmm, p3m1, p31m, p4m, p6m).
    let has_glide = matches!(name, Pg | Cm | Pmg | Pgg | Cmm | P3m1 | P31m | P4m | P4g | P6m);
    WallpaperGroup {
        name,
        highest_rotation_order,
        has_mirror,
        has_glide,
        lattice_class: class,
        point_group_order: ops.len(),
        ops,
        generators,
        fd_polygon: fd,
    }
}

/// The seventeen groups in the conventional listing order.
pub fn catalog() -> &'static [WallpaperGroup] {
    use std::sync::OnceLock;
    static CATALOG: OnceLock<Vec<WallpaperGroup>> = OnceLock::new();
    CATALOG.get_or_init(|| GroupName::ALL.iter().map(|g| build(*g)).collect())
}

impl WallpaperGroup {
    /// Whether a lattice basis, as given, can host this group's recipe.
    pub fn accepts(&self, lattice: &Lattice) -> bool {
        lattice.satisfies(self.lattice_class)
    }

    pub fn check_lattice(&self, lattice: &Lattice) -> Result<()> {
        if self.accepts(lattice) {
            Ok(())
        } else {
            Err(Error::IncompatibleLattice {
                group: self.name.to_string(),
                lattice: lattice.class.to_string(),
            })
        }
    }

    /// Standard lattice used when a caller does not supply one.
    pub fn default_lattice(&self, size: f64) -> Lattice {
        match self.lattice_class {
            LatticeClass::Oblique => Lattice::new(Vec2::new(size, 0.0), Vec2::new(size * 0.3, size * 0.92)).unwrap(),
            LatticeClass::Rectangular => Lattice::rectangular(size * 1.1, size * 0.8),
            LatticeClass::CenteredRectangular => Lattice::centered(size * 1.1, size * 1.6),
            LatticeClass::Square => Lattice::square(size),
            LatticeClass::Hexagonal => Lattice::hexagonal(size),
        }
    }

    /// Coset representatives as pattern-space isometries with the cell origin at `origin`.
    pub fn coset_isometries(&self, lattice: &Lattice, origin: Point2) -> Vec<Isometry2> {
        self.ops.iter().map(|o| o.to_isometry(lattice, origin)).collect()
    }

    /// Element of the point group reached by `op`, as an index into `ops`.
    pub fn coset_index(&self, op: &FracOp) -> Option<usize> {
        self.ops.iter().position(|o| o.same_coset(op))
    }
}

/// Generators (besides lattice translations) for `group` in pattern
/// coordinates, with the cell origin at the pattern origin.
pub fn group_generators(group: GroupName, lattice: &Lattice) -> Result<Vec<Isometry2>> {
    group_generators_at(group, lattice, Vec2::ZERO)
}

pub fn group_generators_at(group: GroupName, lattice: &Lattice, origin: Point2) -> Result<Vec<Isometry2>> {
    let g = group.group();
    g.check_lattice(lattice)?;
    Ok(g.generators.iter().map(|&i| g.ops[i].to_isometry(lattice, origin)).collect())
}

/// Images of `p` (pattern coordinates) under the group, folded into the
/// primitive cell `origin + [0,1)a + [0,1)b` and deduplicated.
pub fn orbit(p: Point2, group: GroupName, lattice: &Lattice) -> Result<Vec<Point2>> {
    orbit_at(p, group, lattice, Vec2::ZERO)
}

pub fn orbit_at(p: Point2, group: GroupName, lattice: &Lattice, origin: Point2) -> Result<Vec<Point2>> {
    let g = group.group();
    g.check_lattice(lattice)?;
    let f = lattice.to_frac(p - origin);
    let mut out: Vec<Point2> = Vec::new();
    for o in &g.ops {
        let q = o.apply(f);
        let q = Vec2::new(frac_reduce(q.x), frac_reduce(q.y));
        let pt = origin + lattice.to_pattern(q);
        if !out.iter().any(|e| lattice.periodic_distance(*e, pt) < GEOMETRIC_TOL) {
            out.push(pt);
        }
    }
    Ok(out)
}

/// A rotation center of the group inside the unit cell, in lattice coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct SpecialPoint {
    pub position: Vec2,
    pub order: u32,
    /// Orbit class under the full group; classes are numbered per order.
    pub class: usize,
}

/// A mirror or glide line of the group, in lattice coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct SpecialLine {
    pub point: Vec2,
    pub direction: Vec2,
    pub glide: bool,
}

fn wrap_frac(v: Vec2) -> Vec2 {
    Vec2::new(frac_reduce(v.x), frac_reduce(v.y))
}

fn frac_close(a: Vec2, b: Vec2) -> bool {
    let d = |x: f64, y: f64| {
        let r = (x - y).rem_euclid(1.0);
        r.min(1.0 - r)
    };
    d(a.x, b.x) < 1e-7 && d(a.y, b.y) < 1e-7
}

/// Rotation centers of each order inside one cell (modulo translations),
/// labelled by their orbit class.
pub fn rotation_centers(group: GroupName) -> Vec<SpecialPoint> {
    let g = group.group();
    let mut found: Vec<(Vec2, u32)> = Vec::new();
    for o in g.ops.iter().filter(|o| o.det() == 1 && o.m != I) {
        let order = o.linear_order();
        let m = &o.m;
        let a = Mat2([[1.0 - m[0][0] as f64, -(m[0][1] as f64)], [-(m[1][0] as f64), 1.0 - m[1][1] as f64]]);
        let inv = a.inverse().expect("rotation has a unique fixed point");
        for i in -3..=3 {
            for j in -3..=3 {
                let rhs = Vec2::new(o.t[0] + i as f64, o.t[1] + j as f64);
                let c = wrap_frac(inv.apply(rhs));
                match found.iter_mut().find(|(p, _)| frac_close(*p, c)) {
                    Some(e) => e.1 = e.1.max(order),
                    None => found.push((c, order)),
                }
            }
        }
    }
    found.sort_by(|a, b| {
        b.1.cmp(&a.1)
            .then(a.0.x.partial_cmp(&b.0.x).unwrap())
            .then(a.0.y.partial_cmp(&b.0.y).unwrap())
    });
    let mut class_of: Vec<Option<usize>> = vec![None; found.len()];
    let mut next: BTreeMap<u32, usize> = BTreeMap::new();
    for i in 0..found.len() {
        if class_of[i].is_some() {
            continue;
        }
        let order = found[i].1;
        let c = *next.entry(order).or_insert(0);
        *next.get_mut(&order).unwrap() += 1;
        for o in &g.ops {
            let img = wrap_frac(o.apply(found[i].0));
            if let Some(j) = found.iter().position(|(p, _)| frac_close(*p, img)) {
                class_of[j] = Some(c);
            }
        }
    }
    found
        .into_iter()
        .zip(class_of)
        .map(|((position, order), class)| SpecialPoint { position, order, class: class.unwrap() })
        .collect()
}

/// Mirror and glide lines through the cell, evaluated in a concrete lattice so
/// that glide shifts can be compared with the axis period.
pub fn reflection_lines(group: GroupName, lattice: &Lattice) -> Vec<SpecialLine> {
    let g = group.group();
    let mut out: Vec<SpecialLine> = Vec::new();
    let inv = lattice.basis().inverse().expect("lattice");
    for o in g.ops.iter().filter(|o| o.det() == -1) {
        for i in -2..=2 {
            for j in -2..=2 {
                let shifted = FracOp::new(o.m, [o.t[0] + i as f64, o.t[1] + j as f64]);
                let iso = shifted.to_isometry(lattice, Vec2::ZERO);
                let (axis, shift) = match iso.kind() {
                    IsometryKind::Reflection { axis } => (axis, 0.0),
                    IsometryKind::Glide { axis, shift } => (axis, shift),
                    _ => continue,
                };
                let period = shortest_along(lattice, axis.direction);
                let rem = (shift / period).fract();
                let is_glide = rem > 1e-6 && rem < 1.0 - 1e-6;
                if !is_glide && shift > 1e-6 {
                    continue; // a mirror composed with a translation along it
                }
                let p = wrap_frac(inv.apply(axis.point));
                let d = inv.apply(axis.direction);
                let line = SpecialLine { point: p, direction: d, glide: is_glide };
                let dup = out.iter().any(|l| {
                    l.glide == line.glide && same_frac_line(lattice, l, &line)
                });
                if !dup {
                    out.push(line);
                }
            }
        }
    }
    out
}

fn same_frac_line(lattice: &Lattice, a: &SpecialLine, b: &SpecialLine) -> bool {
    let da = lattice.to_pattern(a.direction).normalized();
    let db = lattice.to_pattern(b.direction).normalized();
    if da.cross(db).abs() > 1e-6 {
        return false;
    }
    let la = Line::new(lattice.to_pattern(a.point), da);
    // same line modulo lattice translations
    for i in -2..=2 {
        for j in -2..=2 {
            let p = lattice.to_pattern(b.point + Vec2::new(i as f64, j as f64));
            if la.distance_to(p) < 1e-6 * lattice.a.norm() {
                return true;
            }
        }
    }
    false
}

/// Length of the shortest lattice vector parallel to `dir`.
pub fn shortest_along(lattice: &Lattice, dir: Vec2) -> f64 {
    let d = dir.normalized();
    let mut best = f64::INFINITY;
    for i in -6i32..=6 {
        for j in -6i32..=6 {
            if i == 0 && j == 0 {
                continue;
            }
            let v = lattice.to_pattern(Vec2::new(i as f64, j as f64));
            if v.cross(d).abs() < 1e-6 * v.norm() {
                best = best.min(v.norm());
            }
        }
    }
    best
}

/// JSON reference document of the catalog, generator matrices included for
/// a unit lattice of each class.
pub fn catalog_json() -> serde_json::Value {
    let groups: Vec<serde_json::Value> = catalog()
        .iter()
        .map(|g| {
            let lattice = g.default_lattice(1.0);
            let gens: Vec<_> = g.generators.iter().map(|&i| g.ops[i].to_isometry(&lattice, Vec2::ZERO).to_record()).collect();
            serde_json::json!({
                "name": g.name,
                "highestRotationOrder": g.highest_rotation_order,
                "hasMirror": g.has_mirror,
                "hasGlide": g.has_glide,
                "latticeClass": g.lattice_class,
                "pointGroupOrder": g.point_group_order,
                "cosetRepresentatives": g.ops,
                "generatorIndices": g.generators,
                "fdPolygon": g.fd_polygon,
                "referenceLattice": lattice,
                "generators": gens,
            })
        })
        .collect();
    serde_json::json!({
        "groups": groups,
        "twoColorGroupCount": 46,
        "threeColorGroupCount": 23,
        "angleUnit": "degrees",
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::polygon_area;

    #[test]
    fn catalog_has_seventeen_named_groups() {
        let names: Vec<&str> = catalog().iter().map(|g| g.name.as_str()).collect();
        assert_eq!(
            names,
            ["p1", "pm", "pg", "cm", "p2", "pmm", "pmg", "pgg", "cmm", "p3", "p3m1", "p31m", "p4", "p4m", "p4g", "p6", "p6m"]
        );
    }

    #[test]
    fn point_group_orders() {
        let expected = [1, 2, 2, 2, 2, 4, 4, 4, 4, 3, 6, 6, 4, 8, 8, 6, 12];
        for (g, e) in catalog().iter().zip(expected) {
            assert_eq!(g.point_group_order, e, "{}", g.name);
        }
    }

    #[test]
    fn highest_order_matches_name_digit() {
        let expected = [1, 1, 1, 1, 2, 2, 2, 2, 2, 3, 3, 3, 4, 4, 4, 6, 6];
        for (g, e) in catalog().iter().zip(expected) {
            assert_eq!(g.highest_rotation_order, e, "{}", g.name);
        }
    }

    #[test]
    fn fd_area_is_cell_over_order() {
        for g in catalog() {
            let a = polygon_area(&g.fd_polygon).abs();
            assert!((a - 1.0 / g.point_group_order as f64).abs() < 1e-12, "{} {a}", g.name);
        }
    }

    #[test]
    fn mirror_and_glide_flags_match_geometry() {
        for g in catalog() {
            let lines = reflection_lines(g.name, &g.default_lattice(10.0));
            let mirrors = lines.iter().any(|l| !l.glide);
            let glides = lines.iter().any(|l| l.glide);
            assert_eq!(mirrors, g.has_mirror, "{} mirror", g.name);
            assert_eq!(glides, g.has_glide, "{} glide", g.name);
        }
    }

    #[test]
    fn parse_names() {
        assert_eq!("p31m".parse::<GroupName>().unwrap(), GroupName::P31m);
        assert!(matches!("p5".parse::<GroupName>(), Err(Error::UnknownGroup(_))));
    }

    #[test]
    fn p1_has_no_generators() {
        let l = Lattice::new(Vec2::new(10.0, 0.0), Vec2::new(3.0, 9.0)).unwrap();
        assert!(group_generators(GroupName::P1, &l).unwrap().is_empty());
    }

    #[test]
    fn p2_generator_is_half_turn_about_origin() {
        let l = Lattice::new(Vec2::new(10.0, 0.0), Vec2::new(3.0, 9.0)).unwrap();
        let gens = group_generators(GroupName::P2, &l).unwrap();
        assert_eq!(gens.len(), 1);
        assert_eq!(gens[0].rotation_order(), Some(2));
        match gens[0].kind() {
            IsometryKind::Rotation { center, .. } => assert!(center.norm() < 1e-9),
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn incompatible_lattice_rejected() {
        let l = Lattice::square(10.0);
        assert!(matches!(group_generators(GroupName::P6m, &l), Err(Error::IncompatibleLattice { .. })));
        assert!(matches!(orbit(Vec2::new(1.0, 2.0), GroupName::P3, &l), Err(Error::IncompatibleLattice { .. })));
    }

    #[test]
    fn six_fold_center_is_fixed() {
        let l = Lattice::hexagonal(10.0);
        assert_eq!(orbit(Vec2::ZERO, GroupName::P6, &l).unwrap().len(), 1);
    }

    #[test]
    fn cmm_has_three_two_fold_classes() {
        let centers = rotation_centers(GroupName::Cmm);
        let classes: std::collections::BTreeSet<usize> = centers.iter().filter(|c| c.order == 2).map(|c| c.class).collect();
        assert_eq!(centers.len(), 4);
        assert_eq!(classes.len(), 3);
    }

    #[test]
    fn pure_two_fold_class_counts() {
        let count = |g: GroupName| {
            rotation_centers(g)
                .iter()
                .filter(|c| c.order == 2)
                .map(|c| c.class)
                .collect::<std::collections::BTreeSet<_>>()
                .len()
        };
        assert_eq!(count(GroupName::P2), 4);
        assert_eq!(count(GroupName::Pmm), 4);
        assert_eq!(count(GroupName::Pmg), 2);
        assert_eq!(count(GroupName::Pgg), 2);
        assert_eq!(count(GroupName::Cmm), 3);
        assert_eq!(count(GroupName::P4), 1);
        assert_eq!(count(GroupName::P6m), 1);
        assert_eq!(count(GroupName::P3), 0);
    }
}
