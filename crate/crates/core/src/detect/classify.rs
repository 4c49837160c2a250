//! Wallpaper group classification from detected symmetries.
//!
//! Rotation orders are tested in the sequence 6, 4, 3, 2; the group follows
//! from the highest accepted order, mirror and glide presence, and whether
//! the highest-order centers sit on mirrors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::extract::{find_frame, Frame};
use super::lattice::detect_lattice_with;
use super::mismatch::{Evaluator, DEFAULT_THETA};
use super::search::{
    accepted_glides, order_fits, same_axis, scan_glide_axes, scan_reflection_axes, scan_rotation_centers, AxisHit, CenterHit,
    GlideHit,
};
use crate::error::{Error, Result};
use crate::geometry::{Isometry2, Point2};
use crate::groups::GroupName;
use crate::lattice::Lattice;
use crate::raster::RasterPattern;

/// Orders tested, in testing sequence.
pub const TESTED_ORDERS: [u32; 4] = [6, 4, 3, 2];
/// Distance (pixels, modulo the lattice) under which two centers coincide.
const SAME_POINT: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Acceptance threshold on match scores.
    pub theta: f64,
    /// Features scoring within this margin of `theta` must not change the label.
    pub margin: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { theta: DEFAULT_THETA, margin: 0.01 }
    }
}

/// Detected symmetries of a pattern and the group they imply.
#[derive(Debug, Clone, Serialize)]
pub struct SymmetrySignature {
    pub lattice: Lattice,
    /// Accepted centers keyed by their highest order.
    #[serde(rename = "rotationCenters")]
    pub rotation_centers: BTreeMap<u32, Vec<CenterHit>>,
    #[serde(rename = "mirrorAxes")]
    pub mirror_axes: Vec<AxisHit>,
    #[serde(rename = "glideAxes")]
    pub glide_axes: Vec<GlideHit>,
    #[serde(rename = "twoFoldClassCount")]
    pub two_fold_class_count: usize,
    pub group: GroupName,
    pub confidence: f64,
    pub theta: f64,
    /// Best score seen for each tested order that had no accepted center.
    #[serde(rename = "rejectedOrders")]
    pub rejected_orders: BTreeMap<u32, f64>,
    /// Cell basis and anchor in the group's standard setting.
    pub frame: Option<Frame>,
    pub metric: String,
}

impl SymmetrySignature {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("signature serializes")
    }

    pub fn highest_order(&self) -> u32 {
        self.rotation_centers.keys().copied().max().unwrap_or(1)
    }
}

/// All refined candidates of one pattern, before thresholding.
pub struct Findings {
    pub lattice: Lattice,
    pub centers: BTreeMap<u32, Vec<CenterHit>>,
    pub mirrors: Vec<AxisHit>,
    pub glides: Vec<GlideHit>,
}

/// Outcome of the decision table at one threshold.
pub struct Decision {
    pub group: GroupName,
    pub centers: BTreeMap<u32, Vec<CenterHit>>,
    pub mirrors: Vec<AxisHit>,
    pub glides: Vec<GlideHit>,
    pub two_fold_class_count: usize,
    pub worst_accepted: f64,
}

fn rotation_angle(order: u32) -> f64 {
    std::f64::consts::TAU / order as f64
}

impl Findings {
    pub fn gather(ev: &Evaluator, lattice: Lattice, theta: f64) -> Findings {
        let centers = TESTED_ORDERS.iter().map(|&o| (o, scan_rotation_centers(ev, o, &lattice, theta))).collect();
        let mirrors = scan_reflection_axes(ev, &lattice, theta);
        let glides = scan_glide_axes(ev, &lattice, theta);
        Findings { lattice, centers, mirrors, glides }
    }

    fn on_mirror(&self, p: Point2, mirrors: &[AxisHit]) -> bool {
        mirrors.iter().any(|m| {
            let through = crate::geometry::Line::new(p, m.line.direction);
            same_axis(&self.lattice, &m.line, &through, SAME_POINT)
        })
    }

    /// Applies the decision table with acceptance threshold `theta`.
    pub fn decide(&self, theta: f64) -> Decision {
        let l = &self.lattice;
        let mut accepted: BTreeMap<u32, Vec<CenterHit>> = BTreeMap::new();
        for (&o, list) in &self.centers {
            if order_fits(o, l) {
                let hits: Vec<CenterHit> = list.iter().filter(|c| c.score < theta).copied().collect();
                if !hits.is_empty() {
                    accepted.insert(o, hits);
                }
            }
        }
        // four- and three-fold rotations never coexist; keep the better one
        if let (Some(f), Some(t)) = (accepted.get(&4), accepted.get(&3)) {
            let drop = if f[0].score <= t[0].score { 3 } else { 4 };
            accepted.remove(&drop);
        }
        // report each center under its highest order only
        let mut pure: BTreeMap<u32, Vec<CenterHit>> = BTreeMap::new();
        for (&o, list) in accepted.iter().rev() {
            let kept: Vec<CenterHit> = list
                .iter()
                .filter(|c| {
                    !pure.iter().any(|(&h, hs)| h % o == 0 && hs.iter().any(|x| l.periodic_distance(x.center, c.center) < SAME_POINT))
                })
                .copied()
                .collect();
            if !kept.is_empty() {
                pure.insert(o, kept);
            }
        }
        let mirrors: Vec<AxisHit> = self.mirrors.iter().filter(|m| m.score < theta).copied().collect();
        let glides = accepted_glides(&self.glides, l, theta, &mirrors);
        let n = pure.keys().copied().max().unwrap_or(1);
        let mut directions: Vec<crate::geometry::Vec2> = Vec::new();
        for m in &mirrors {
            if !directions.iter().any(|d| d.cross(m.line.direction).abs() < 1e-3) {
                directions.push(m.line.direction);
            }
        }
        let on4 = pure.get(&4).is_some_and(|cs| cs.iter().all(|c| self.on_mirror(c.center, &mirrors)));
        let on3 = pure.get(&3).is_some_and(|cs| cs.iter().all(|c| self.on_mirror(c.center, &mirrors)));
        let centers_on_mirrors = |order: u32| if order == 4 { on4 } else { on3 };
        let has_m = !mirrors.is_empty();
        let has_g = !glides.is_empty();
        let two_fold_class_count = label_classes(l, &mut pure, &mirrors, &glides);
        use GroupName::*;
        let group = match n {
            6 => {
                if has_m {
                    P6m
                } else {
                    P6
                }
            }
            4 => {
                if !has_m {
                    P4
                } else if centers_on_mirrors(4) {
                    P4m
                } else {
                    P4g
                }
            }
            3 => {
                if !has_m {
                    P3
                } else if centers_on_mirrors(3) {
                    P3m1
                } else {
                    P31m
                }
            }
            2 => match directions.len() {
                0 => {
                    if has_g {
                        Pgg
                    } else {
                        P2
                    }
                }
                1 => Pmg,
                _ => {
                    if has_g || two_fold_class_count == 3 {
                        Cmm
                    } else {
                        Pmm
                    }
                }
            },
            _ => match (has_m, has_g) {
                (false, false) => P1,
                (false, true) => Pg,
                (true, false) => Pm,
                (true, true) => Cm,
            },
        };
        let worst_accepted = pure
            .values()
            .flatten()
            .map(|c| c.score)
            .chain(mirrors.iter().map(|m| m.score))
            .chain(glides.iter().map(|g| g.score))
            .fold(0.0, f64::max);
        Decision { group, centers: pure, mirrors, glides, two_fold_class_count, worst_accepted }
    }
}

/// Labels center classes (orbits under the accepted symmetries, modulo the
/// lattice) and returns the number of pure two-fold classes.
fn label_classes(l: &Lattice, centers: &mut BTreeMap<u32, Vec<CenterHit>>, mirrors: &[AxisHit], glides: &[GlideHit]) -> usize {
    let mut isos: Vec<Isometry2> = Vec::new();
    for (&o, list) in centers.iter() {
        for c in list {
            for k in 1..o {
                isos.push(Isometry2::rotation(c.center, rotation_angle(o) * k as f64));
            }
        }
    }
    isos.extend(mirrors.iter().map(|m| Isometry2::reflection(m.line)));
    isos.extend(glides.iter().map(|g| Isometry2::glide(g.line, g.shift)));
    let mut two_fold = 0;
    for (&o, list) in centers.iter_mut() {
        let n = list.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut Vec<usize>, i: usize) -> usize {
            let mut i = i;
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for i in 0..n {
            for iso in &isos {
                let img = iso.apply(list[i].center);
                if let Some(j) = (0..n).find(|&j| l.periodic_distance(img, list[j].center) < SAME_POINT) {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
        let mut labels: Vec<usize> = Vec::new();
        for i in 0..n {
            let r = find(&mut parent, i);
            let label = match labels.iter().position(|&x| x == r) {
                Some(k) => k,
                None => {
                    labels.push(r);
                    labels.len() - 1
                }
            };
            list[i].class = label;
        }
        if o == 2 {
            two_fold = labels.len();
        }
    }
    two_fold
}

/// Classifies a periodic pattern with the default threshold.
pub fn classify(pattern: &RasterPattern) -> Result<SymmetrySignature> {
    classify_with(pattern, &ClassifyOptions::default())
}

pub fn classify_with(pattern: &RasterPattern, opts: &ClassifyOptions) -> Result<SymmetrySignature> {
    let ev = Evaluator::new(pattern);
    let lattice = detect_lattice_with(pattern, &ev, opts.theta)?;
    let findings = Findings::gather(&ev, lattice, opts.theta);
    let d = findings.decide(opts.theta);
    let confidence = (1.0 - d.worst_accepted / opts.theta).clamp(0.0, 1.0);
    for alt_theta in [opts.theta - opts.margin, opts.theta + opts.margin] {
        let alt = findings.decide(alt_theta);
        if alt.group != d.group {
            let alt_conf = (1.0 - alt.worst_accepted / alt_theta).clamp(0.0, 1.0);
            return Err(Error::AmbiguousClassification(vec![
                (d.group.to_string(), confidence),
                (alt.group.to_string(), alt_conf),
            ]));
        }
    }
    let mut rejected_orders = BTreeMap::new();
    for o in TESTED_ORDERS {
        let accepted = d.centers.contains_key(&o)
            || d.centers.keys().any(|&h| h != o && h % o == 0);
        if !accepted {
            if let Some(best) = findings.centers.get(&o).and_then(|l| l.first()) {
                rejected_orders.insert(o, best.score);
            }
        }
    }
    let frame = find_frame(&ev, d.group, &lattice, &d.centers, &d.mirrors, &d.glides, opts.theta).ok();
    Ok(SymmetrySignature {
        lattice,
        rotation_centers: d.centers,
        mirror_axes: d.mirrors,
        glide_axes: d.glides,
        two_fold_class_count: d.two_fold_class_count,
        group: d.group,
        confidence,
        theta: opts.theta,
        rejected_orders,
        frame,
        metric: "mean absolute RGB difference, bilinear resampling".into(),
    })
}
