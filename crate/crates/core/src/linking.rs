//! Linking axis, linking functions and linking regions.

use serde::{Deserialize, Serialize};

use crate::config_model::{BoundingRegion, Configuration};
use crate::error::{Error, Result};
use crate::geom::{angle_between, pt, Point};
use crate::par::{self, Parallelism};
use crate::skeleton::{NodeKind, SkeletalStructure};

/// Where a linking ray ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Object(usize),
    /// Linked back to the same object.
    SelfLink,
    /// Capped at the bounding region.
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkingParams {
    pub theta_min: f64,
    /// Exit rays closer than this angle to ∂Ω̃ count as tangent.
    pub tangency_tolerance: f64,
    pub parallelism: Parallelism,
}

impl Default for LinkingParams {
    fn default() -> Self {
        LinkingParams { theta_min: 0.15, tangency_tolerance: 1e-3, parallelism: Parallelism::Auto }
    }
}

#[derive(Clone, Copy, Debug)]
struct Feature {
    a: Point,
    m: Point,
    nu: Point,
    len: f64,
    object: usize,
}

fn features(config: &Configuration) -> Vec<Feature> {
    let mut out = Vec::new();
    for (i, c) in config.objects.iter().enumerate() {
        for k in 0..c.len() {
            let (a, b) = c.edge(k);
            let d = b - a;
            let len = d.norm();
            let m = d / len;
            out.push(Feature { a, m, nu: pt(m.y, -m.x), len, object: i });
        }
    }
    out
}

/// First significant touch of the exterior disk family centred at
/// `b + τ·u` with radius τ. Touches on the ray's own object count only if
/// they subtend at least `theta_min` at the centre.
fn exterior_touch(feats: &[Feature], own: usize, b: Point, u: Point, theta_min: f64, eps: f64) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    let mut consider = |tau: f64, obj: usize, y: Point| {
        if !(tau > eps) {
            return;
        }
        if let Some((t, o)) = best {
            let tol = 1e-12 * t.max(1.0);
            if tau > t + tol || (tau > t - tol && obj >= o) {
                return;
            }
        }
        if obj == own {
            let c = b + u * tau;
            if angle_between(-u, y - c) < theta_min {
                return;
            }
        }
        best = Some((tau, obj));
    };
    for f in feats {
        let den = 1.0 - u.dot(f.nu);
        if den > 1e-15 {
            let tau = (b - f.a).dot(f.nu) / den;
            let y = b + u * tau - f.nu * tau;
            let s = (y - f.a).dot(f.m);
            if (0.0..=f.len).contains(&s) {
                consider(tau, f.object, y);
            }
        }
        let w = b - f.a;
        let uw = u.dot(w);
        if uw < 0.0 {
            consider(-w.norm2() / (2.0 * uw), f.object, f.a);
        }
    }
    best
}

/// Result of marching one linking ray.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RayHit {
    /// Distance from the foot to the first linking-axis point, with its object.
    pub collision: Option<(f64, usize)>,
    /// Distance from the foot to ∂Ω̃ (polygon exit or threshold cap).
    pub exit: f64,
    /// Exit is through the polygon at a grazing angle.
    pub tangent: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisLabel {
    /// Unordered pair, smaller index first.
    Pair(usize, usize),
    SelfPair(usize),
    Boundary(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisStratum {
    pub label: AxisLabel,
    /// Object whose rays traced this polyline.
    pub source: usize,
    pub points: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkingAxis {
    /// `hits[i][k]` for node `k` of object `i`.
    pub hits: Vec<Vec<RayHit>>,
    pub strata: Vec<AxisStratum>,
    pub branch_points: Vec<Point>,
    pub tangent_exits: usize,
}

impl LinkingAxis {
    /// Strata carrying a given label.
    pub fn strata_with(&self, label: AxisLabel) -> impl Iterator<Item = &AxisStratum> {
        self.strata.iter().filter(move |s| s.label == label)
    }
}

fn check_collar(config: &Configuration, bounding: &BoundingRegion) -> Result<()> {
    let Some(b) = &bounding.boundary else { return Ok(()) };
    let scale = config.diameter().max(1.0);
    for (i, c) in config.objects.iter().enumerate() {
        for &p in c.vertices() {
            if !b.contains(p) && b.distance(p) > 1e-12 * scale {
                return Err(Error::NoCollar(i));
            }
        }
    }
    Ok(())
}

pub fn compute_linking_axis(
    config: &Configuration,
    skeletons: &[SkeletalStructure],
    bounding: &BoundingRegion,
    params: &LinkingParams,
) -> Result<LinkingAxis> {
    check_collar(config, bounding)?;
    let feats = features(config);
    let eps = 1e-12 * config.diameter().max(1.0);
    let index: Vec<(usize, usize)> =
        skeletons.iter().flat_map(|s| (0..s.nodes.len()).map(move |k| (s.object, k))).collect();
    let flat = par::map_slice(params.parallelism, &index, |&(i, k)| {
        let s = skeletons.iter().find(|s| s.object == i).expect("skeleton for object");
        let nd = &s.nodes[k];
        // exterior disks at a reflex vertex cut both adjacent edges at once,
        // so the exterior axis starts at the vertex itself
        let collision = if nd.kind == NodeKind::ReflexCorner {
            Some((0.0, i))
        } else {
            exterior_touch(&feats, i, nd.foot, nd.direction, params.theta_min, eps)
        };
        let mut exit = bounding.exit_distance(nd.foot, nd.direction);
        let mut tangent = false;
        if let (Some(poly), true) = (&bounding.boundary, exit.is_finite()) {
            let q = nd.foot + nd.direction * exit;
            tangent = grazing(poly.vertices(), q, nd.direction, params.tangency_tolerance);
        }
        if let Some(t) = bounding.cap {
            if t < exit {
                exit = t;
                tangent = false;
            }
        }
        let collision = collision.filter(|&(t, _)| t <= exit);
        RayHit { collision, exit, tangent }
    });
    let mut hits: Vec<Vec<RayHit>> = skeletons.iter().map(|s| Vec::with_capacity(s.nodes.len())).collect();
    for (&(i, _), h) in index.iter().zip(flat) {
        if h.collision.is_none() && !h.exit.is_finite() {
            return Err(Error::Internal(format!("object {i}: linking ray leaves every bound")));
        }
        let slot = skeletons.iter().position(|s| s.object == i).expect("skeleton");
        hits[slot].push(h);
    }
    let tangent_exits = hits.iter().flatten().filter(|h| h.tangent).count();
    let mut strata = Vec::new();
    let mut branch_points = Vec::new();
    for (s, hs) in skeletons.iter().zip(&hits) {
        let i = s.object;
        let label_of = |h: &RayHit| match h.collision {
            Some((_, j)) if j == i => AxisLabel::SelfPair(i),
            Some((_, j)) => AxisLabel::Pair(i.min(j), i.max(j)),
            None => AxisLabel::Boundary(i),
        };
        let point_of = |k: usize| {
            let h = &hs[k];
            let t = h.collision.map_or(h.exit, |c| c.0);
            s.nodes[k].foot + s.nodes[k].direction * t
        };
        for run in cyclic_runs(hs.len(), |k| label_of(&hs[k])) {
            let label = label_of(&hs[run[0]]);
            let mut points: Vec<Point> = run.iter().map(|&k| point_of(k)).collect();
            points.dedup();
            branch_points.push(points[0]);
            strata.push(AxisStratum { label, source: i, points });
        }
    }
    Ok(LinkingAxis { hits, strata, branch_points, tangent_exits })
}

fn grazing(poly: &[Point], q: Point, u: Point, tol: f64) -> bool {
    let n = poly.len();
    let mut best = (f64::INFINITY, 0usize);
    for k in 0..n {
        let d = crate::geom::segment_distance(poly[k], poly[(k + 1) % n], q);
        if d < best.0 {
            best = (d, k);
        }
    }
    let e = (poly[(best.1 + 1) % n] - poly[best.1]).normalized();
    e.cross(u).abs() < tol.sin()
}

/// Maximal runs of equal keys around a cycle of length `n`.
pub(crate) fn cyclic_runs<K: PartialEq>(n: usize, key: impl Fn(usize) -> K) -> Vec<Vec<usize>> {
    if n == 0 {
        return Vec::new();
    }
    let start = (0..n).find(|&k| key(k) != key((k + n - 1) % n));
    let Some(start) = start else { return vec![(0..n).collect()] };
    let mut out: Vec<Vec<usize>> = Vec::new();
    for off in 0..n {
        let k = (start + off) % n;
        if off == 0 || key(k) != key((k + n - 1) % n) {
            out.push(Vec::new());
        }
        out.last_mut().expect("run").push(k);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub ell: f64,
    pub target: Target,
    pub terminal: Point,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkingAssignment {
    /// `links[i][k]` for node `k` of object `i`.
    pub links: Vec<Vec<Link>>,
}

pub fn compute_linking_assignment(skeletons: &[SkeletalStructure], axis: &LinkingAxis) -> Result<LinkingAssignment> {
    let mut links = Vec::with_capacity(skeletons.len());
    for (s, hs) in skeletons.iter().zip(&axis.hits) {
        let mut v = Vec::with_capacity(hs.len());
        for (nd, h) in s.nodes.iter().zip(hs) {
            let (t, target) = match h.collision {
                Some((t, j)) if j == s.object => (t, Target::SelfLink),
                Some((t, j)) => (t, Target::Object(j)),
                None if h.exit.is_finite() => (h.exit, Target::Unbounded),
                None => return Err(Error::Internal("ray exits without hitting anything".into())),
            };
            v.push(Link { ell: nd.radius + t, target, terminal: nd.foot + nd.direction * t });
        }
        links.push(v);
    }
    Ok(LinkingAssignment { links })
}

impl LinkingAssignment {
    pub fn link(&self, object: usize, node: usize) -> &Link {
        &self.links[object][node]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkStratum {
    pub object: usize,
    pub target: Target,
    pub nodes: Vec<usize>,
}

/// Group node sides into contiguous runs with a common target.
pub fn partition_strata(assignment: &LinkingAssignment) -> Vec<LinkStratum> {
    let mut out = Vec::new();
    for (i, ls) in assignment.links.iter().enumerate() {
        for run in cyclic_runs(ls.len(), |k| ls[k].target) {
            out.push(LinkStratum { object: i, target: ls[run[0]].target, nodes: run });
        }
    }
    out
}

/// Polygonal linking regions for one (object, target) label.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RegionSet {
    /// Ω_{i→t}: quads swept by t ∈ [0, 1/2].
    pub interior: Vec<Vec<Point>>,
    /// N_{i→t}: quads swept by t ∈ [1/2, 1].
    pub exterior: Vec<Vec<Point>>,
    /// B_{i→t}: foot polylines.
    pub boundary: Vec<Vec<Point>>,
    /// Some element of this label folds over.
    pub unreliable: bool,
}

impl RegionSet {
    pub fn interior_area(&self) -> f64 {
        self.interior.iter().map(|q| crate::geom::signed_area(q).abs()).sum()
    }

    pub fn exterior_area(&self) -> f64 {
        self.exterior.iter().map(|q| crate::geom::signed_area(q).abs()).sum()
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary
            .iter()
            .map(|l| l.windows(2).map(|w| w[0].dist(w[1])).sum::<f64>())
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkingRegions {
    /// Keyed by (object, target).
    pub regions: Vec<((usize, Target), RegionSet)>,
}

impl LinkingRegions {
    pub fn get(&self, object: usize, target: Target) -> Option<&RegionSet> {
        self.regions.iter().find(|(k, _)| *k == (object, target)).map(|(_, r)| r)
    }
}

#[derive(Clone, Copy)]
struct Side {
    x: Point,
    foot: Point,
    term: Point,
}

pub fn extract_regions(skeletons: &[SkeletalStructure], assignment: &LinkingAssignment) -> LinkingRegions {
    let mut map: std::collections::BTreeMap<(usize, Target), RegionSet> = Default::default();
    for (s, ls) in skeletons.iter().zip(&assignment.links) {
        let i = s.object;
        let side = |k: usize| Side { x: s.nodes[k].position, foot: s.nodes[k].foot, term: ls[k].terminal };
        for el in &s.elements {
            let (ta, tb) = (ls[el.a].target, ls[el.b].target);
            let (pa, pb) = (side(el.a), side(el.b));
            let ubar = (s.nodes[el.a].direction + s.nodes[el.b].direction) * 0.5;
            let folded = !el.fan && ubar.cross(pb.term - pa.term) < -1e-12;
            if ta == tb {
                push_quads(map.entry((i, ta)).or_default(), pa, pb, folded);
            } else {
                let mid = Side {
                    x: pa.x.lerp(pb.x, 0.5),
                    foot: pa.foot.lerp(pb.foot, 0.5),
                    term: pa.term.lerp(pb.term, 0.5),
                };
                push_quads(map.entry((i, ta)).or_default(), pa, mid, folded);
                push_quads(map.entry((i, tb)).or_default(), mid, pb, folded);
            }
        }
        for run in cyclic_runs(ls.len(), |k| ls[k].target) {
            let mut feet: Vec<Point> = run.iter().map(|&k| s.nodes[k].foot).collect();
            feet.dedup();
            if feet.len() > 1 {
                map.entry((i, ls[run[0]].target)).or_default().boundary.push(feet);
            }
        }
    }
    LinkingRegions { regions: map.into_iter().collect() }
}

fn push_quads(set: &mut RegionSet, a: Side, b: Side, folded: bool) {
    set.interior.push(vec![a.x, b.x, b.foot, a.foot]);
    set.exterior.push(vec![a.foot, b.foot, b.term, a.term]);
    set.unreliable |= folded;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config_model::build_bounding_region;
    use crate::fixtures;
    use crate::skeleton::{compute_skeleton, SkeletonParams};

    fn two_squares() -> (Vec<SkeletalStructure>, LinkingAxis, LinkingAssignment) {
        let f = fixtures::two_squares();
        let region = build_bounding_region(&f.configuration, &f.bounding).unwrap();
        let sk: Vec<_> = f
            .configuration
            .objects
            .iter()
            .enumerate()
            .map(|(i, c)| compute_skeleton(c, i, &SkeletonParams::default()).unwrap())
            .collect();
        let axis = compute_linking_axis(&f.configuration, &sk, &region, &LinkingParams::default()).unwrap();
        let asg = compute_linking_assignment(&sk, &axis).unwrap();
        (sk, axis, asg)
    }

    #[test]
    fn centre_rays() {
        let (sk, _, asg) = two_squares();
        let find = |u: Point| {
            sk[0].nodes.iter().position(|n| n.position.norm() < 1e-12 && (n.direction - u).norm() < 1e-12).unwrap()
        };
        let right = asg.link(0, find(pt(1.0, 0.0)));
        assert!((right.ell - 3.0).abs() < 1e-12);
        assert_eq!(right.target, Target::Object(1));
        let up = asg.link(0, find(pt(0.0, 1.0)));
        assert!((up.ell - 3.0).abs() < 1e-12);
        assert_eq!(up.target, Target::Unbounded);
    }

    #[test]
    fn bisector_stratum() {
        let (_, axis, _) = two_squares();
        let pair: Vec<_> = axis.strata_with(AxisLabel::Pair(0, 1)).collect();
        assert_eq!(pair.len(), 2);
        for s in pair {
            assert!(s.points.iter().all(|p| (p.x - 3.0).abs() < 1e-9));
            let ys: Vec<f64> = s.points.iter().map(|p| p.y).collect();
            let top = ys.iter().cloned().fold(f64::MIN, f64::max);
            assert!((top - 3.0).abs() < 0.05, "{top}");
        }
    }

    #[test]
    fn fan_splits_at_45_degrees() {
        let (sk, _, asg) = two_squares();
        for (k, n) in sk[0].nodes.iter().enumerate() {
            if n.kind == crate::skeleton::NodeKind::ConvexCorner && n.foot == pt(1.0, 1.0) {
                let phi = n.direction.y.atan2(n.direction.x);
                let t = asg.link(0, k).target;
                if phi < std::f64::consts::FRAC_PI_4 - 1e-9 {
                    assert_eq!(t, Target::Object(1));
                } else if phi > std::f64::consts::FRAC_PI_4 + 1e-9 {
                    assert_eq!(t, Target::Unbounded);
                }
            }
        }
    }

    #[test]
    fn runs_wrap_around() {
        let v = [1, 1, 2, 2, 1];
        let r = cyclic_runs(5, |k| v[k]);
        assert_eq!(r, vec![vec![2, 3], vec![4, 0, 1]]);
    }
}
