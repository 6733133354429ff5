use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point or vector in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl From<[f64; 2]> for Point {
    fn from(a: [f64; 2]) -> Self {
        Point { x: a[0], y: a[1] }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

pub const fn pt(x: f64, y: f64) -> Point {
    Point { x, y }
}

impl Point {
    pub fn dot(self, o: Point) -> f64 {
        self.x * o.x + self.y * o.y
    }

    /// z-component of the cross product.
    pub fn cross(self, o: Point) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm2(self) -> f64 {
        self.dot(self)
    }

    pub fn dist(self, o: Point) -> f64 {
        (self - o).norm()
    }

    pub fn normalized(self) -> Point {
        let n = self.norm();
        if n > 0.0 {
            self / n
        } else {
            self
        }
    }

    /// Rotate a quarter turn counter-clockwise.
    pub fn perp(self) -> Point {
        pt(-self.y, self.x)
    }

    pub fn rotate(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        pt(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn lerp(self, o: Point, t: f64) -> Point {
        self + (o - self) * t
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, o: Point) -> Point {
        pt(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Point {
    fn add_assign(&mut self, o: Point) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, o: Point) -> Point {
        pt(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        pt(self.x * s, self.y * s)
    }
}

impl Div<f64> for Point {
    type Output = Point;
    fn div(self, s: f64) -> Point {
        pt(self.x / s, self.y / s)
    }
}

impl Neg for Point {
    type Output = Point;
    fn neg(self) -> Point {
        pt(-self.x, -self.y)
    }
}

/// Signed angle from `a` to `b` in (-pi, pi].
pub fn signed_angle(a: Point, b: Point) -> f64 {
    a.cross(b).atan2(a.dot(b))
}

/// Unsigned angle between two vectors.
pub fn angle_between(a: Point, b: Point) -> f64 {
    signed_angle(a, b).abs()
}

/// Closest point of segment `ab` to `p` and its parameter in [0, 1].
pub fn closest_on_segment(a: Point, b: Point, p: Point) -> (Point, f64) {
    let d = b - a;
    let len2 = d.norm2();
    if len2 == 0.0 {
        return (a, 0.0);
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    (a + d * t, t)
}

pub fn segment_distance(a: Point, b: Point, p: Point) -> f64 {
    closest_on_segment(a, b, p).0.dist(p)
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed segments `ab` and `cd` share at least one point.
pub fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Intersection point of two segments known to intersect (midpoint of overlap
/// for collinear cases).
pub fn segment_intersection_point(a: Point, b: Point, c: Point, d: Point) -> Point {
    let r = b - a;
    let s = d - c;
    let den = r.cross(s);
    if den.abs() > 1e-300 {
        let t = (c - a).cross(s) / den;
        return a + r * t.clamp(0.0, 1.0);
    }
    let mut cand: Vec<Point> = Vec::new();
    for (p, seg) in [(a, (c, d)), (b, (c, d)), (c, (a, b)), (d, (a, b))] {
        if on_segment(seg.0, seg.1, p) {
            cand.push(p);
        }
    }
    match cand.len() {
        0 => a,
        _ => {
            let s = cand.iter().fold(pt(0.0, 0.0), |acc, &p| acc + p);
            s / cand.len() as f64
        }
    }
}

/// Parameter t ≥ 0 where ray `o + t·dir` crosses segment `ab`, if any.
pub fn ray_segment(o: Point, dir: Point, a: Point, b: Point) -> Option<f64> {
    let s = b - a;
    let den = dir.cross(s);
    if den.abs() < 1e-300 {
        return None;
    }
    let w = a - o;
    let t = w.cross(s) / den;
    let v = w.cross(dir) / den;
    if t >= 0.0 && (-1e-12..=1.0 + 1e-12).contains(&v) {
        Some(t)
    } else {
        None
    }
}

/// Twice the signed area (positive for counter-clockwise).
pub fn signed_area(v: &[Point]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        s += v[i].cross(v[(i + 1) % n]);
    }
    0.5 * s
}

pub fn perimeter(v: &[Point]) -> f64 {
    let n = v.len();
    (0..n).map(|i| v[i].dist(v[(i + 1) % n])).sum()
}

/// Crossing-number point-in-polygon test (boundary points may go either way).
pub fn point_in_polygon(v: &[Point], p: Point) -> bool {
    let n = v.len();
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (v[i], v[j]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Distance from `p` to the closed polyline `v`.
pub fn polygon_distance(v: &[Point], p: Point) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| segment_distance(v[i], v[(i + 1) % n], p))
        .fold(f64::INFINITY, f64::min)
}

/// Convex hull by monotone chain, counter-clockwise, collinear points dropped.
pub fn convex_hull(points: &[Point]) -> Vec<Point> {
    let mut p: Vec<Point> = points.to_vec();
    p.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    p.dedup();
    if p.len() < 3 {
        return p;
    }
    let mut lower: Vec<Point> = Vec::new();
    for &q in &p {
        while lower.len() >= 2 && orient(lower[lower.len() - 2], lower[lower.len() - 1], q) <= 0.0 {
            lower.pop();
        }
        lower.push(q);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &q in p.iter().rev() {
        while upper.len() >= 2 && orient(upper[upper.len() - 2], upper[upper.len() - 1], q) <= 0.0 {
            upper.pop();
        }
        upper.push(q);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Sub-intervals of [t0, t1] on which `o + t·dir` lies inside polygon `v`.
pub fn clip_ray_to_polygon(v: &[Point], o: Point, dir: Point, t0: f64, t1: f64) -> Vec<(f64, f64)> {
    if t1 <= t0 {
        return Vec::new();
    }
    let mut cuts = vec![t0, t1];
    let n = v.len();
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        let s = b - a;
        let den = dir.cross(s);
        if den.abs() < 1e-300 {
            continue;
        }
        let w = a - o;
        let t = w.cross(s) / den;
        let u = w.cross(dir) / den;
        if (0.0..=1.0).contains(&u) && t > t0 && t < t1 {
            cuts.push(t);
        }
    }
    cuts.sort_by(f64::total_cmp);
    let mut out: Vec<(f64, f64)> = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a <= 0.0 {
            continue;
        }
        if point_in_polygon(v, o + dir * (0.5 * (a + b))) {
            match out.last_mut() {
                Some(last) if last.1 == a => last.1 = b,
                _ => out.push((a, b)),
            }
        }
    }
    out
}

/// Distance along `o + t·dir` (t > 0) to the boundary of a convex polygon
/// containing `o`.
pub fn convex_exit(v: &[Point], o: Point, dir: Point) -> Option<f64> {
    let n = v.len();
    let mut best: Option<f64> = None;
    for i in 0..n {
        let e = v[(i + 1) % n] - v[i];
        // outward normal of a CCW edge
        let nrm = pt(e.y, -e.x);
        let den = dir.dot(nrm);
        if den <= 0.0 {
            continue;
        }
        let t = (v[i] - o).dot(nrm) / den;
        let t = t.max(0.0);
        best = Some(best.map_or(t, |b: f64| b.min(t)));
    }
    best
}

/// Sum with a fixed pairwise tree so results do not depend on thread count.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_of_square_points() {
        let pts = [pt(0.0, 0.0), pt(1.0, 0.0), pt(0.5, 0.5), pt(1.0, 1.0), pt(0.0, 1.0), pt(0.5, 0.0)];
        let h = convex_hull(&pts);
        assert_eq!(h.len(), 4);
        assert!((signed_area(&h) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn clip_ray_through_square() {
        let sq = [pt(-1.0, -1.0), pt(1.0, -1.0), pt(1.0, 1.0), pt(-1.0, 1.0)];
        let iv = clip_ray_to_polygon(&sq, pt(-3.0, 0.0), pt(1.0, 0.0), 0.0, 10.0);
        assert_eq!(iv.len(), 1);
        assert!((iv[0].0 - 2.0).abs() < 1e-12 && (iv[0].1 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn exit_from_box() {
        let b = [pt(-3.0, -3.0), pt(9.0, -3.0), pt(9.0, 3.0), pt(-3.0, 3.0)];
        let t = convex_exit(&b, pt(1.0, 0.0), pt(0.0, 1.0)).unwrap();
        assert!((t - 3.0).abs() < 1e-12);
    }

    #[test]
    fn crossing_segments() {
        assert!(segments_intersect(pt(0.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0), pt(1.0, 0.0)));
        assert!(!segments_intersect(pt(0.0, 0.0), pt(1.0, 0.0), pt(0.0, 1.0), pt(1.0, 1.0)));
        let p = segment_intersection_point(pt(0.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0), pt(1.0, 0.0));
        assert!((p - pt(0.5, 0.5)).norm() < 1e-15);
    }

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&v), 499500.0);
    }
}
