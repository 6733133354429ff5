//! Discrete Blum skeletons built from boundary samples.
//!
//! Every boundary sample becomes one node side `(x, u, r)` with foot
//! `x + r·u` on the boundary. Convex corners carry fans of zero radius.

use serde::{Deserialize, Serialize};

use crate::config_model::Contour;
use crate::error::{Error, Result};
use crate::geom::{self, angle_between, pt, signed_angle, Point};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletonParams {
    /// Target number of boundary samples; edges are split to at most
    /// `perimeter / samples_per_boundary`, and every vertex is a sample.
    pub samples_per_boundary: usize,
    /// Touches subtending less than this angle at the disk centre are noise.
    pub theta_min: f64,
    /// Largest angular step inside corner fans.
    pub fan_step: f64,
    /// Fan-like runs spanning fewer sampling steps than this collapse to a point.
    pub collapse_steps: f64,
    /// An element is fan-like when the skeleton moves less than this
    /// fraction of `r·Δθ`.
    pub fan_like_ratio: f64,
}

impl Default for SkeletonParams {
    fn default() -> Self {
        SkeletonParams {
            samples_per_boundary: 512,
            theta_min: 0.15,
            fan_step: std::f64::consts::PI / 256.0,
            collapse_steps: 2.0,
            fan_like_ratio: 0.25,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    /// Foot on a smooth stretch of boundary.
    Smooth,
    /// Fan direction at a convex corner (r = 0).
    ConvexCorner,
    /// Fan direction at a reflex corner.
    ReflexCorner,
    /// Member of a collapsed end fan (disk centre, stadium cap).
    Cap,
}

impl NodeKind {
    pub fn is_corner(self) -> bool {
        matches!(self, NodeKind::ConvexCorner | NodeKind::ReflexCorner)
    }
}

/// One side of a skeletal point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletalNode {
    pub position: Point,
    pub direction: Point,
    pub radius: f64,
    pub foot: Point,
    /// Arc-length coordinate of the foot along the contour.
    pub foot_arc: f64,
    pub kind: NodeKind,
    pub stratum: usize,
    /// Arc length along the stratum (angle for fan strata).
    pub arc_length: f64,
    /// Outward boundary normal at the foot.
    pub normal: Point,
    /// Boundary curvature at the foot; convex arcs are negative.
    pub boundary_curvature: Option<f64>,
    /// Radial curvature measured from the skeleton geometry.
    pub radial_curvature: Option<f64>,
    pub density: Option<f64>,
}

/// Piece of the double between two consecutive nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Element {
    pub a: usize,
    pub b: usize,
    pub fan: bool,
    /// det(ū, Δx): medial measure of the element.
    pub measure: f64,
    /// det(u_a, u_b) for sides, the signed angle for fans.
    pub turning: f64,
}

impl Element {
    /// Area swept by the element between radii 0 and s.
    pub fn area(&self, s: f64) -> f64 {
        self.measure * s + 0.5 * self.turning * s * s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StratumKind {
    Side,
    Fan,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stratum {
    pub kind: StratumKind,
    /// Consecutive elements (indices into `elements`).
    pub elements: Vec<usize>,
    /// Polyline length for sides, total angle for fans.
    pub length: f64,
}

/// Quadrature weights collected at a node from its two adjacent half elements.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NodeWeights {
    pub measure: f64,
    pub turning: f64,
    pub fan_angle: f64,
}

impl NodeWeights {
    /// ∫₀ˢ Jacobian: the swept area out to radius s.
    pub fn area(&self, s: f64) -> f64 {
        self.measure * s + 0.5 * (self.turning + self.fan_angle) * s * s
    }

    pub fn jacobian(&self, s: f64) -> f64 {
        self.measure + (self.turning + self.fan_angle) * s
    }
}

/// Coefficients of I(s) = s − (κ/2)s².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegrandPoly {
    pub kappa: f64,
}

impl IntegrandPoly {
    pub fn eval(&self, s: f64) -> f64 {
        s - 0.5 * self.kappa * s * s
    }

    pub fn derivative(&self, s: f64) -> f64 {
        1.0 - self.kappa * s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletalStructure {
    pub object: usize,
    pub nodes: Vec<SkeletalNode>,
    pub elements: Vec<Element>,
    pub strata: Vec<Stratum>,
    pub weights: Vec<NodeWeights>,
    pub sampling_step: f64,
    pub perimeter: f64,
    pub params: SkeletonParams,
}

#[derive(Clone, Copy, Debug)]
struct Sample {
    p: Point,
    arc: f64,
    vertex: Option<usize>,
    /// Edge carrying the sample and the position along it.
    edge: usize,
    t: f64,
}

fn boundary_samples(c: &Contour, step: f64) -> Vec<Sample> {
    let mut out = Vec::new();
    let mut arc = 0.0;
    for k in 0..c.len() {
        let (a, b) = c.edge(k);
        let len = a.dist(b);
        out.push(Sample { p: a, arc, vertex: Some(k), edge: k, t: 0.0 });
        let m = ((len / step) - 1e-9).ceil().max(1.0) as usize;
        for j in 1..m {
            let t = j as f64 / m as f64;
            out.push(Sample { p: a.lerp(b, t), arc: arc + t * len, vertex: None, edge: k, t });
        }
        arc += len;
    }
    out
}

fn outward(e: Point) -> Point {
    pt(e.y, -e.x).normalized()
}

/// Radius of the first significant touch of the disk family centred at
/// `b − τ·n` with radius τ.
pub(crate) fn interior_touch(c: &Contour, b: Point, n: Point, theta_min: f64, eps: f64) -> f64 {
    let mut best = f64::INFINITY;
    for k in 0..c.len() {
        let (a, e) = c.edge(k);
        let d = e - a;
        let len = d.norm();
        let m = d / len;
        let nu = pt(m.y, -m.x);
        let den = n.dot(nu) - 1.0;
        if den < -1e-15 {
            let tau = (b - a).dot(nu) / den;
            if tau > eps && tau < best {
                let centre = b - n * tau;
                let y = centre + nu * tau;
                let s = (y - a).dot(m);
                if (0.0..=len).contains(&s) && angle_between(n, nu) >= theta_min {
                    best = tau;
                }
            }
        }
        let w = b - a;
        let den = 2.0 * n.dot(w);
        if den > 0.0 {
            let tau = w.norm2() / den;
            if tau > eps && tau < best {
                let centre = b - n * tau;
                if angle_between(n, a - centre) >= theta_min {
                    best = tau;
                }
            }
        }
    }
    best
}

pub fn compute_skeleton(contour: &Contour, object: usize, params: &SkeletonParams) -> Result<SkeletalStructure> {
    if params.samples_per_boundary < 64 {
        return Err(Error::Argument("samples_per_boundary must be ≥ 64".into()));
    }
    let perimeter = contour.perimeter();
    let step = perimeter / params.samples_per_boundary as f64;
    let samples = boundary_samples(contour, step);
    let ns = samples.len();
    let (lo, hi) = contour.bbox();
    let eps = 1e-12 * lo.dist(hi);
    let nv = contour.len();

    let mut raw: Vec<SkeletalNode> = Vec::with_capacity(ns + 64);
    for (si, s) in samples.iter().enumerate() {
        let prev = samples[(si + ns - 1) % ns].p;
        let next = samples[(si + 1) % ns].p;
        let corner = s.vertex.and_then(|k| {
            let a = contour.vertices()[(k + nv - 1) % nv];
            let e = contour.vertices()[(k + 1) % nv];
            let turn = signed_angle(s.p - a, e - s.p);
            (turn.abs() >= params.theta_min).then(|| (outward(s.p - a), turn))
        });
        match corner {
            Some((n_in, turn)) => {
                let steps = ((turn.abs() / params.fan_step) - 1e-9).ceil().max(1.0) as usize;
                for j in 0..=steps {
                    let u = n_in.rotate(turn * j as f64 / steps as f64);
                    let (kind, r) = if turn > 0.0 {
                        (NodeKind::ConvexCorner, 0.0)
                    } else {
                        (NodeKind::ReflexCorner, interior_touch(contour, s.p, u, params.theta_min, eps))
                    };
                    raw.push(new_node(s, u, r, kind, u, None));
                }
            }
            None => {
                let n = smooth_normal(contour, s, params.theta_min);
                let kb = -circle_curvature(prev, s.p, next);
                let r = interior_touch(contour, s.p, n, params.theta_min, eps);
                raw.push(new_node(s, n, r, NodeKind::Smooth, n, Some(kb)));
            }
        }
    }
    if raw.iter().any(|r| !r.radius.is_finite()) {
        return Err(Error::TooThin(object));
    }
    let mut nodes = raw;
    collapse_fans(&mut nodes, step, params);

    let elements = build_elements(&nodes);
    let strata = build_strata(&nodes, &elements);
    let mut s = SkeletalStructure {
        object,
        nodes,
        elements,
        strata,
        weights: Vec::new(),
        sampling_step: step,
        perimeter,
        params: *params,
    };
    s.finish();
    if s.strata.is_empty() {
        return Err(Error::TooThin(object));
    }
    Ok(s)
}

fn new_node(s: &Sample, u: Point, r: f64, kind: NodeKind, normal: Point, kb: Option<f64>) -> SkeletalNode {
    SkeletalNode {
        position: s.p - u * r,
        direction: u,
        radius: r,
        foot: s.p,
        foot_arc: s.arc,
        kind,
        stratum: 0,
        arc_length: 0.0,
        normal,
        boundary_curvature: kb,
        radial_curvature: None,
        density: None,
    }
}

/// Normal at a vertex below the corner threshold: the mean of both edge
/// normals. `None` at corners.
fn vertex_normal(c: &Contour, k: usize, theta_min: f64) -> Option<Point> {
    let nv = c.len();
    let v = c.vertices();
    let (a, p, e) = (v[(k + nv - 1) % nv], v[k], v[(k + 1) % nv]);
    (signed_angle(p - a, e - p).abs() < theta_min).then(|| (outward(p - a) + outward(e - p)).normalized())
}

/// Normal of the smooth boundary the polygon stands for: vertex normals
/// at smooth vertices, rotated linearly along each edge. Next to a corner
/// the edge keeps its own normal.
fn smooth_normal(c: &Contour, s: &Sample, theta_min: f64) -> Point {
    let nv = c.len();
    let (a, b) = c.edge(s.edge);
    let own = outward(b - a);
    let na = vertex_normal(c, s.edge, theta_min).unwrap_or(own);
    if s.vertex.is_some() {
        return na;
    }
    let nb = vertex_normal(c, (s.edge + 1) % nv, theta_min).unwrap_or(own);
    na.rotate(signed_angle(na, nb) * s.t)
}

/// Curvature of the circle through three points, positive for left turns.
pub fn circle_curvature(a: Point, b: Point, c: Point) -> f64 {
    let den = a.dist(b) * b.dist(c) * a.dist(c);
    if den == 0.0 {
        return 0.0;
    }
    2.0 * (b - a).cross(c - b) / den
}

const FAN_WINDOW: usize = 4;

fn collapse_fans(nodes: &mut [SkeletalNode], step: f64, params: &SkeletonParams) {
    let n = nodes.len();
    // judged over a window so that sampling zigzag in near-circular
    // stretches does not hide the fan
    let fan_like: Vec<bool> = (0..n)
        .map(|k| {
            let window = (0..=2 * FAN_WINDOW).map(|j| (k + n + j - FAN_WINDOW) % n);
            if window.clone().any(|j| nodes[j].kind != NodeKind::Smooth) {
                return false;
            }
            let a = &nodes[(k + n - FAN_WINDOW) % n];
            let b = &nodes[(k + FAN_WINDOW + 1) % n];
            let dtheta = signed_angle(a.direction, b.direction).abs();
            let rbar = 0.5 * (a.radius + b.radius);
            dtheta > 0.0 && a.position.dist(b.position) < params.fan_like_ratio * rbar * dtheta
        })
        .collect();
    let mut runs: Vec<Vec<usize>> = Vec::new();
    if fan_like.iter().all(|&f| f) {
        runs.push((0..n).collect());
    } else {
        let start = fan_like.iter().position(|&f| !f).unwrap_or(0);
        let mut cur: Vec<usize> = Vec::new();
        for off in 1..=n {
            let e = (start + off) % n;
            if fan_like[e] {
                if cur.is_empty() {
                    cur.push(e);
                }
                cur.push((e + 1) % n);
            } else if !cur.is_empty() {
                runs.push(std::mem::take(&mut cur));
            }
        }
        if !cur.is_empty() {
            runs.push(cur);
        }
    }
    for run in runs {
        let pts: Vec<Point> = run.iter().map(|&k| nodes[k].position).collect();
        let (lo, hi) = crate::config_model::bbox(&pts);
        if lo.dist(hi) > params.collapse_steps * step {
            continue;
        }
        let centre = pts.iter().fold(pt(0.0, 0.0), |acc, &p| acc + p) / pts.len() as f64;
        for &k in &run {
            let nd = &mut nodes[k];
            let d = nd.foot - centre;
            nd.position = centre;
            nd.radius = d.norm();
            nd.direction = d / nd.radius;
            nd.kind = NodeKind::Cap;
        }
    }
}

fn build_elements(nodes: &[SkeletalNode]) -> Vec<Element> {
    let n = nodes.len();
    (0..n)
        .map(|a| {
            let b = (a + 1) % n;
            let (p, q) = (&nodes[a], &nodes[b]);
            if p.position == q.position {
                Element { a, b, fan: true, measure: 0.0, turning: signed_angle(p.direction, q.direction) }
            } else {
                let ubar = (p.direction + q.direction) * 0.5;
                Element {
                    a,
                    b,
                    fan: false,
                    measure: ubar.cross(q.position - p.position),
                    turning: p.direction.cross(q.direction),
                }
            }
        })
        .collect()
}

const STRATUM_BREAK: f64 = std::f64::consts::FRAC_PI_4;

fn build_strata(nodes: &[SkeletalNode], elements: &[Element]) -> Vec<Stratum> {
    let n = elements.len();
    let dx = |e: &Element| nodes[e.b].position - nodes[e.a].position;
    let joins = |e: &Element, f: &Element| -> bool {
        if e.fan != f.fan {
            return false;
        }
        if e.fan {
            return nodes[e.a].position == nodes[f.a].position;
        }
        angle_between(dx(e), dx(f)) <= STRATUM_BREAK
    };
    let start = (0..n).find(|&k| !joins(&elements[(k + n - 1) % n], &elements[k]));
    let Some(start) = start else {
        let kind = if elements[0].fan { StratumKind::Fan } else { StratumKind::Side };
        return vec![Stratum { kind, elements: (0..n).collect(), length: 0.0 }];
    };
    let mut out: Vec<Stratum> = Vec::new();
    for off in 0..n {
        let k = (start + off) % n;
        let e = &elements[k];
        if off == 0 || !joins(&elements[(k + n - 1) % n], e) {
            let kind = if e.fan { StratumKind::Fan } else { StratumKind::Side };
            out.push(Stratum { kind, elements: Vec::new(), length: 0.0 });
        }
        out.last_mut().expect("stratum").elements.push(k);
    }
    out
}

impl SkeletalStructure {
    /// Derive strata lengths, node labels, densities, weights and curvatures.
    fn finish(&mut self) {
        let n = self.nodes.len();
        for (si, st) in self.strata.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, &e) in st.elements.iter().enumerate() {
                let el = self.elements[e];
                if j == 0 {
                    self.nodes[el.a].stratum = si;
                    self.nodes[el.a].arc_length = 0.0;
                }
                acc += if el.fan {
                    el.turning.abs()
                } else {
                    self.nodes[el.b].position.dist(self.nodes[el.a].position)
                };
                if j + 1 < st.elements.len() {
                    self.nodes[el.b].stratum = si;
                    self.nodes[el.b].arc_length = acc;
                }
            }
            st.length = acc;
        }
        let mut w = vec![NodeWeights::default(); n];
        for el in &self.elements {
            for k in [el.a, el.b] {
                if el.fan {
                    w[k].fan_angle += 0.5 * el.turning;
                } else {
                    w[k].measure += 0.5 * el.measure;
                    w[k].turning += 0.5 * el.turning;
                }
            }
        }
        self.weights = w;
        // element k starts at node k
        let mut elem_stratum = vec![0usize; n];
        for (si, st) in self.strata.iter().enumerate() {
            for &e in &st.elements {
                elem_stratum[e] = si;
            }
        }
        for k in 0..n {
            let prev = self.elements[(k + n - 1) % n];
            let next = self.elements[k];
            let sides: Vec<&Element> = [&prev, &next].into_iter().filter(|e| !e.fan).collect();
            let node = &self.nodes[k];
            let tangent = match sides.len() {
                2 if elem_stratum[prev.a] == elem_stratum[next.a] => {
                    Some(self.nodes[next.b].position - self.nodes[prev.a].position)
                }
                0 => None,
                _ => {
                    let e = if !next.fan { next } else { prev };
                    Some(self.nodes[e.b].position - self.nodes[e.a].position)
                }
            };
            let density = tangent.map(|t| t.normalized().cross(node.direction).abs());
            let kappa = (sides.len() == 2 && node.kind == NodeKind::Smooth && self.weights[k].measure > 0.0)
                .then(|| -self.weights[k].turning / self.weights[k].measure);
            let node = &mut self.nodes[k];
            node.density = density;
            node.radial_curvature = kappa;
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Medial density ρ = |T × u| of a node side, `None` on fans.
    pub fn medial_density(&self, k: usize) -> Option<f64> {
        self.nodes[k].density
    }

    /// I(s) coefficients for node sides carrying side measure.
    pub fn integrand_poly(&self, k: usize) -> Option<IntegrandPoly> {
        let w = &self.weights[k];
        (w.measure > 0.0).then(|| IntegrandPoly { kappa: -w.turning / w.measure })
    }

    /// Angle between a node's direction and the boundary normal at its foot.
    pub fn check_partial_blum(&self, k: usize) -> BlumCheck {
        let nd = &self.nodes[k];
        BlumCheck { deviation: angle_between(nd.direction, nd.normal), corner: nd.kind.is_corner() }
    }

    /// Largest partial-Blum deviation over non-corner feet.
    pub fn max_blum_deviation(&self) -> f64 {
        (0..self.len())
            .map(|k| self.check_partial_blum(k))
            .filter(|c| !c.corner)
            .map(|c| c.deviation)
            .fold(0.0, f64::max)
    }

    /// Move the skeletal point of node `k` by `delta`, keeping its foot.
    pub fn offset_node(&mut self, k: usize, delta: Point) {
        let nd = &mut self.nodes[k];
        nd.position += delta;
        let d = nd.foot - nd.position;
        nd.radius = d.norm();
        nd.direction = d / nd.radius;
        self.elements = build_elements(&self.nodes);
        self.strata = build_strata(&self.nodes, &self.elements);
        self.finish();
    }

    pub fn total_medial_measure(&self) -> f64 {
        geom::pairwise_sum(&self.weights.iter().map(|w| w.measure).collect::<Vec<_>>())
    }

    /// Polylines of the skeleton, one per side stratum, plus fan centres.
    pub fn polylines(&self) -> Vec<Vec<Point>> {
        self.strata
            .iter()
            .map(|st| {
                let mut v: Vec<Point> = Vec::new();
                for &e in &st.elements {
                    let el = self.elements[e];
                    if v.is_empty() {
                        v.push(self.nodes[el.a].position);
                    }
                    v.push(self.nodes[el.b].position);
                }
                v.dedup();
                v
            })
            .collect()
    }
}

/// Partial-Blum check result for a node side.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlumCheck {
    pub deviation: f64,
    /// Foot at a boundary corner; excluded from the Blum domain.
    pub corner: bool,
}

/// κ_r = κ_B / (1 + r·κ_B).
pub fn radial_curvature(boundary_curvature: f64, r: f64) -> f64 {
    boundary_curvature / (1.0 + r * boundary_curvature)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn formula_examples() {
        assert_eq!(radial_curvature(0.0, 3.0), 0.0);
        assert!((radial_curvature(1.0, 1.0) - 0.5).abs() < 1e-15);
        assert!((radial_curvature(-0.5, 1.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn square_centre_radius() {
        let c = fixtures::square(0.0, 0.0, 1.0);
        let s = compute_skeleton(&c, 0, &SkeletonParams::default()).unwrap();
        let max_r = s.nodes.iter().map(|n| n.radius).fold(0.0, f64::max);
        assert!((max_r - 1.0).abs() < 1e-12);
        for n in &s.nodes {
            let p = n.position;
            let off = (p.x.abs() - p.y.abs()).abs();
            assert!(off < 1e-9, "{p:?}");
        }
        assert_eq!(s.strata.iter().filter(|st| st.kind == StratumKind::Side).count(), 8);
    }

    #[test]
    fn diagonal_density() {
        let c = fixtures::square(0.0, 0.0, 1.0);
        let s = compute_skeleton(&c, 0, &SkeletonParams::default()).unwrap();
        let k = s
            .nodes
            .iter()
            .position(|n| n.kind == NodeKind::Smooth && (n.foot.y + 0.5).abs() < 1e-9 && n.foot.x == 1.0)
            .unwrap();
        assert!((s.medial_density(k).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn disk_collapses() {
        let c = fixtures::disk(0.0, 0.0, 1.0, 256);
        let s = compute_skeleton(&c, 0, &SkeletonParams::default()).unwrap();
        assert!(s.nodes.iter().all(|n| n.kind == NodeKind::Cap));
        assert!(s.nodes[0].position.norm() < 1e-3);
        assert_eq!(s.strata.len(), 1);
        assert_eq!(s.strata[0].kind, StratumKind::Fan);
    }

    #[test]
    fn offset_breaks_blum() {
        let c = fixtures::stadium(512);
        let mut s = compute_skeleton(&c, 0, &SkeletonParams::default()).unwrap();
        let k = s.nodes.iter().position(|n| (n.foot - pt(2.0, 1.0)).norm() < 0.05).unwrap();
        assert!(s.check_partial_blum(k).deviation < 0.02);
        s.offset_node(k, pt(0.2, 0.0));
        assert!(s.check_partial_blum(k).deviation > 0.1);
    }
}
