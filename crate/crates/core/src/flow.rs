//! The linking flow λ(x, t) = x + χ(t)·u and its curvature evolution.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::linking::{Link, LinkingAssignment};
use crate::skeleton::{NodeKind, SkeletalNode, SkeletalStructure};

/// Displacement along u at flow time t: 2tr up to the boundary, then a
/// linear interpolation from r to ℓ.
pub fn chi(r: f64, ell: f64, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::FlowTime(t));
    }
    Ok(if t <= 0.5 { 2.0 * t * r } else { 2.0 * (1.0 - t) * r + (2.0 * t - 1.0) * ell })
}

pub fn linking_flow_point(node: &SkeletalNode, link: &Link, t: f64) -> Result<Point> {
    Ok(node.position + node.direction * chi(node.radius, link.ell, t)?)
}

/// κ_t = κ_r / (1 − χ·κ_r).
pub fn evolve_curvature(kappa_r: f64, chi: f64) -> Result<f64> {
    let den = 1.0 - chi * kappa_r;
    if den.abs() < 1e-12 {
        return Err(Error::FocalPoint);
    }
    Ok(kappa_r / den)
}

/// Radial curvature of the linking axis side reached at distance ℓ.
pub fn linking_axis_curvature(kappa_r: f64, ell: f64) -> Result<f64> {
    Ok(-evolve_curvature(kappa_r, ell)?)
}

/// Curvature of a fan's level arc at radius χ, in the same sign
/// convention (convex arcs negative).
pub fn fan_level_curvature(chi: f64) -> f64 {
    -1.0 / chi
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SideCheck {
    pub object: usize,
    pub node: usize,
    pub pass: bool,
    /// 1/κ − ℓ when κ > 0.
    pub margin: Option<f64>,
    /// Fan side checked by the edge condition.
    pub edge: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonsingularityReport {
    pub sides: Vec<SideCheck>,
}

impl NonsingularityReport {
    pub fn failures(&self) -> usize {
        self.sides.iter().filter(|s| !s.pass).count()
    }

    pub fn passes(&self) -> bool {
        self.failures() == 0
    }

    pub fn min_margin(&self) -> Option<f64> {
        self.sides.iter().filter_map(|s| s.margin).reduce(f64::min)
    }
}

/// Radial curvature used by the flow for a node side; `None` on fans.
pub fn side_curvature(s: &SkeletalStructure, k: usize) -> Option<f64> {
    match s.nodes[k].kind {
        NodeKind::Smooth => s.nodes[k].radial_curvature.or_else(|| s.integrand_poly(k).map(|p| p.kappa)),
        _ => None,
    }
}

/// Check ℓ < 1/κ_r wherever κ_r > 0, and the fan edge condition.
pub fn check_nonsingularity(skeletons: &[SkeletalStructure], assignment: &LinkingAssignment) -> NonsingularityReport {
    let mut sides = Vec::new();
    for (s, ls) in skeletons.iter().zip(&assignment.links) {
        for (k, link) in ls.iter().enumerate() {
            let check = match side_curvature(s, k) {
                Some(kappa) if kappa > 0.0 => {
                    let m = 1.0 / kappa - link.ell;
                    SideCheck { object: s.object, node: k, pass: m > 0.0, margin: Some(m), edge: false }
                }
                Some(_) => SideCheck { object: s.object, node: k, pass: true, margin: None, edge: false },
                // fan level arcs have negative curvature at every positive radius
                None => SideCheck { object: s.object, node: k, pass: true, margin: None, edge: true },
            };
            sides.push(check);
        }
    }
    NonsingularityReport { sides }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldOver {
    pub object: usize,
    pub stratum: usize,
    pub element: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSet {
    pub t: f64,
    /// One closed polyline per object.
    pub curves: Vec<Vec<Point>>,
    pub fold_overs: Vec<FoldOver>,
}

impl LevelSet {
    pub fn length(&self) -> f64 {
        self.curves
            .iter()
            .map(|c| {
                let n = c.len();
                (0..n).map(|k| c[k].dist(c[(k + 1) % n])).sum::<f64>()
            })
            .sum()
    }
}

/// Level curves B_t = λ_t(M̃_i), with fold-overs reported per element.
pub fn level_set(skeletons: &[SkeletalStructure], assignment: &LinkingAssignment, t: f64) -> Result<LevelSet> {
    let mut curves = Vec::with_capacity(skeletons.len());
    let mut fold_overs = Vec::new();
    for (s, ls) in skeletons.iter().zip(&assignment.links) {
        let pts = s
            .nodes
            .iter()
            .zip(ls)
            .map(|(n, l)| linking_flow_point(n, l, t))
            .collect::<Result<Vec<_>>>()?;
        for (e, el) in s.elements.iter().enumerate() {
            let ubar = (s.nodes[el.a].direction + s.nodes[el.b].direction) * 0.5;
            if ubar.cross(pts[el.b] - pts[el.a]) < -1e-12 {
                fold_overs.push(FoldOver { object: s.object, stratum: s.nodes[el.a].stratum, element: e });
            }
        }
        curves.push(pts);
    }
    Ok(LevelSet { t, curves, fold_overs })
}
