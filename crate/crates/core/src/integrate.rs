//! Skeletal integrals: medial measure, boundary and region integrals,
//! Crofton, Weyl and Steiner volumes.
//!
//! All integrals use per-node weights from [`NodeWeights`]: the area swept
//! by a node's half elements out to radius s is `m·s + e·s²/2`.

use serde::{Deserialize, Serialize};

use crate::config_model::{BoundingRegion, Contour};
use crate::error::{Error, Result};
use crate::geom::{clip_ray_to_polygon, pairwise_sum, Point};
use crate::linking::{LinkingAssignment, Target};
use crate::par::{self, Parallelism};
use crate::skeleton::{SkeletalNode, SkeletalStructure};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadratureParams {
    /// Gauss-Legendre nodes on each of [0, r] and [r, ℓ].
    pub gauss_nodes: usize,
    /// Largest partial-Blum deviation accepted by boundary integrals.
    pub blum_tolerance: f64,
    pub parallelism: Parallelism,
}

impl Default for QuadratureParams {
    fn default() -> Self {
        QuadratureParams { gauss_nodes: 16, blum_tolerance: 0.05, parallelism: Parallelism::Auto }
    }
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Medial measure dM at a node: side measure plus the fan's r·Δθ.
pub fn medial_measure(s: &SkeletalStructure, k: usize) -> f64 {
    let w = &s.weights[k];
    w.measure + s.nodes[k].radius * w.fan_angle
}

/// Σ g·dM over the double of the skeleton.
pub fn skeletal_integral(s: &SkeletalStructure, g: impl Fn(usize, &SkeletalNode) -> f64) -> f64 {
    let terms: Vec<f64> = (0..s.nodes.len()).map(|k| g(k, &s.nodes[k]) * medial_measure(s, k)).collect();
    pairwise_sum(&terms)
}

/// ∫_B g dV via the radial map, each half element evaluated at its own
/// midpoint foot.
pub fn boundary_integral(s: &SkeletalStructure, g: impl Fn(Point) -> f64, q: &QuadratureParams) -> Result<f64> {
    let dev = s.max_blum_deviation();
    if dev > q.blum_tolerance {
        return Err(Error::PartialBlum { max_deviation: dev });
    }
    let mut terms = Vec::with_capacity(2 * s.elements.len());
    for el in &s.elements {
        let (na, nb) = (&s.nodes[el.a], &s.nodes[el.b]);
        let fm = na.foot.lerp(nb.foot, 0.5);
        for (nd, p) in [(na, na.foot.lerp(fm, 0.5)), (nb, nb.foot.lerp(fm, 0.5))] {
            let jac = el.measure + el.turning * nd.radius;
            terms.push(0.5 * jac * g(p));
        }
    }
    Ok(pairwise_sum(&terms))
}

/// vol(Ω_i) = ∫ I(r) dM.
pub fn weyl_volume(s: &SkeletalStructure) -> f64 {
    let terms: Vec<f64> = (0..s.nodes.len()).map(|k| s.weights[k].area(s.nodes[k].radius)).collect();
    pairwise_sum(&terms)
}

/// Total neighborhood of object i: ∫ I(ℓ) − I(r) dM over all its strata.
pub fn steiner_volume(s: &SkeletalStructure, assignment: &LinkingAssignment) -> f64 {
    let ls = &assignment.links[s.object];
    let terms: Vec<f64> = (0..s.nodes.len())
        .map(|k| s.weights[k].area(ls[k].ell) - s.weights[k].area(s.nodes[k].radius))
        .collect();
    pairwise_sum(&terms)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Source {
    Skeletal,
    Oracle,
    AnalyticFixture,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeRow {
    pub object: usize,
    pub target: Target,
    pub omega: f64,
    pub neighborhood: f64,
    pub total: f64,
    /// Some side in this row fails the nonsingularity check.
    #[serde(default)]
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VolumeTable {
    pub source: Source,
    pub objects: usize,
    pub rows: Vec<VolumeRow>,
    /// vol(Ω_i) per object.
    pub object_volumes: Vec<f64>,
}

impl VolumeTable {
    pub fn row(&self, object: usize, target: Target) -> Option<&VolumeRow> {
        self.rows.iter().find(|r| r.object == object && r.target == target)
    }

    pub fn omega(&self, object: usize, target: Target) -> f64 {
        self.row(object, target).map_or(0.0, |r| r.omega)
    }

    pub fn neighborhood(&self, object: usize, target: Target) -> f64 {
        self.row(object, target).map_or(0.0, |r| r.neighborhood)
    }

    pub fn total(&self, object: usize, target: Target) -> f64 {
        self.row(object, target).map_or(0.0, |r| r.total)
    }
}

/// vol(Ω_{i→t}), vol(N_{i→t}), vol(R_{i→t}) for every label present.
pub fn region_volumes(
    skeletons: &[SkeletalStructure],
    assignment: &LinkingAssignment,
    failing: &[(usize, usize)],
) -> VolumeTable {
    let mut acc: std::collections::BTreeMap<(usize, Target), (Vec<f64>, Vec<f64>, Vec<f64>)> = Default::default();
    for s in skeletons {
        let ls = &assignment.links[s.object];
        for (k, nd) in s.nodes.iter().enumerate() {
            let w = &s.weights[k];
            let e = acc.entry((s.object, ls[k].target)).or_default();
            let inner = w.area(nd.radius);
            let whole = w.area(ls[k].ell);
            e.0.push(inner);
            e.1.push(whole - inner);
            e.2.push(whole);
        }
    }
    let rows = acc
        .into_iter()
        .map(|((object, target), (o, n, r))| VolumeRow {
            object,
            target,
            omega: pairwise_sum(&o),
            neighborhood: pairwise_sum(&n),
            total: pairwise_sum(&r),
            flagged: failing
                .iter()
                .any(|&(i, k)| i == object && assignment.links[i][k].target == target),
        })
        .collect();
    VolumeTable {
        source: Source::Skeletal,
        objects: skeletons.len(),
        rows,
        object_volumes: skeletons.iter().map(weyl_volume).collect(),
    }
}

/// Planar integrand for region integrals.
pub enum Integrand<'a> {
    Constant(f64),
    /// Indicator of a polygon, integrated by exact ray clipping.
    Indicator(&'a Contour),
    Function(&'a (dyn Fn(Point) -> f64 + Sync)),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelPart {
    pub object: usize,
    pub target: Target,
    pub interior: f64,
    pub exterior: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionIntegral {
    pub total: f64,
    pub interior: f64,
    pub exterior: f64,
    pub by_label: Vec<LabelPart>,
}

/// ∫ (m + e·t) dt over [t0, t1].
fn poly_integral(m: f64, e: f64, t0: f64, t1: f64) -> f64 {
    m * (t1 - t0) + 0.5 * e * (t1 * t1 - t0 * t0)
}

/// Interior ([0, r]) and exterior ([r, ℓ]) parts of the ray integral at a node.
fn ray_parts(nd: &SkeletalNode, m: f64, e: f64, ell: f64, g: &Integrand, gl: &(Vec<f64>, Vec<f64>)) -> (f64, f64) {
    let r = nd.radius;
    match g {
        Integrand::Constant(c) => (c * poly_integral(m, e, 0.0, r), c * poly_integral(m, e, r, ell)),
        Integrand::Indicator(q) => {
            let clip = |t0: f64, t1: f64| -> f64 {
                clip_ray_to_polygon(q.vertices(), nd.position, nd.direction, t0, t1)
                    .into_iter()
                    .map(|(a, b)| poly_integral(m, e, a, b))
                    .sum()
            };
            (clip(0.0, r), clip(r, ell))
        }
        Integrand::Function(f) => {
            let seg = |t0: f64, t1: f64| -> f64 {
                if t1 <= t0 {
                    return 0.0;
                }
                let half = 0.5 * (t1 - t0);
                let mid = 0.5 * (t1 + t0);
                gl.0.iter()
                    .zip(&gl.1)
                    .map(|(&z, &w)| {
                        let t = mid + half * z;
                        w * f(nd.position + nd.direction * t) * (m + e * t)
                    })
                    .sum::<f64>()
                    * half
            };
            (seg(0.0, r), seg(r, ell))
        }
    }
}

pub fn region_integral(
    skeletons: &[SkeletalStructure],
    assignment: &LinkingAssignment,
    g: &Integrand,
    q: &QuadratureParams,
) -> RegionIntegral {
    let gl = gauss_legendre(q.gauss_nodes);
    let mut int_terms = Vec::new();
    let mut ext_terms = Vec::new();
    let mut labels: std::collections::BTreeMap<(usize, Target), (Vec<f64>, Vec<f64>)> = Default::default();
    for s in skeletons {
        let ls = &assignment.links[s.object];
        let parts = par::map_range(q.parallelism, s.nodes.len(), |k| {
            let w = &s.weights[k];
            ray_parts(&s.nodes[k], w.measure, w.turning + w.fan_angle, ls[k].ell, g, &gl)
        });
        for (k, (a, b)) in parts.into_iter().enumerate() {
            int_terms.push(a);
            ext_terms.push(b);
            let e = labels.entry((s.object, ls[k].target)).or_default();
            e.0.push(a);
            e.1.push(b);
        }
    }
    let interior = pairwise_sum(&int_terms);
    let exterior = pairwise_sum(&ext_terms);
    RegionIntegral {
        total: interior + exterior,
        interior,
        exterior,
        by_label: labels
            .into_iter()
            .map(|((object, target), (a, b))| LabelPart {
                object,
                target,
                interior: pairwise_sum(&a),
                exterior: pairwise_sum(&b),
            })
            .collect(),
    }
}

/// vol(Q) as a weighted sum of clipped linking-ray lengths.
pub fn crofton_volume(
    skeletons: &[SkeletalStructure],
    assignment: &LinkingAssignment,
    bounding: &BoundingRegion,
    polygon: &Contour,
    dist_to_config: impl Fn(Point) -> f64,
    q: &QuadratureParams,
) -> Result<f64> {
    for &p in polygon.vertices() {
        let tol = 1e-9;
        let inside = bounding.boundary.as_ref().is_none_or(|b| b.contains(p) || b.distance(p) < tol);
        if !inside || bounding.cap.is_some_and(|t| dist_to_config(p) > t + tol) {
            return Err(Error::Region("polygon is not contained in the bounding region".into()));
        }
    }
    Ok(region_integral(skeletons, assignment, &Integrand::Indicator(polygon), q).total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_polynomials() {
        let (x, w) = gauss_legendre(16);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((m - 2.0 / 31.0).abs() < 1e-14);
        let (x3, w3) = gauss_legendre(3);
        assert!((x3[2] - (0.6f64).sqrt()).abs() < 1e-15);
        assert!((w3[1] - 8.0 / 9.0).abs() < 1e-15);
    }
}
