//! Brute-force grid labeling of the bounded plane.
//!
//! Every cell centre is classified from scratch by nearest-feature
//! queries: find the nearest boundary point, then follow the grassfire
//! ray outward until another significant feature is as close as the ray
//! has travelled. Nothing from the skeletal pipeline is used.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config_model::{BoundingRegion, Configuration};
use crate::error::{Error, Result};
use crate::geom::{self, angle_between, closest_on_segment, pt, Point};
use crate::integrate::{Source, VolumeRow, VolumeTable};
use crate::linking::{LinkingRegions, Target};
use crate::par::{self, Parallelism};

pub const MIN_RESOLUTION: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub theta_min: f64,
    /// Length tolerance of the ray continuation root.
    pub root_tolerance: f64,
    /// Side of the blocks filled from five probe cells when all probes
    /// agree; 1 labels every cell individually.
    pub block: usize,
    pub parallelism: Parallelism,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams { theta_min: 0.15, root_tolerance: 1e-10, block: 8, parallelism: Parallelism::Auto }
    }
}

impl OracleParams {
    pub fn exhaustive(mut self) -> OracleParams {
        self.block = 1;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CellLabel {
    Outside,
    Inside { object: usize, target: Target },
    Neighborhood { object: usize, target: Target },
}

impl CellLabel {
    pub fn object(self) -> Option<usize> {
        match self {
            CellLabel::Outside => None,
            CellLabel::Inside { object, .. } | CellLabel::Neighborhood { object, .. } => Some(object),
        }
    }
}

fn encode(n: usize, object: usize, target: Target, exterior: bool) -> u32 {
    let t = match target {
        Target::Object(j) => j,
        Target::SelfLink => object,
        Target::Unbounded => n,
    };
    (1 + ((object * (n + 1) + t) * 2 + exterior as usize)) as u32
}

fn decode(n: usize, code: u32) -> CellLabel {
    if code == 0 {
        return CellLabel::Outside;
    }
    let c = code as usize - 1;
    let exterior = c % 2 == 1;
    let (object, t) = ((c / 2) / (n + 1), (c / 2) % (n + 1));
    let target = if t == n {
        Target::Unbounded
    } else if t == object {
        Target::SelfLink
    } else {
        Target::Object(t)
    };
    if exterior {
        CellLabel::Neighborhood { object, target }
    } else {
        CellLabel::Inside { object, target }
    }
}

#[derive(Clone, Copy, Debug)]
struct Seg {
    a: Point,
    b: Point,
    object: usize,
}

#[derive(Clone, Copy, Debug)]
struct Aabb {
    lo: Point,
    hi: Point,
}

impl Aabb {
    fn of(s: &Seg) -> Aabb {
        Aabb { lo: pt(s.a.x.min(s.b.x), s.a.y.min(s.b.y)), hi: pt(s.a.x.max(s.b.x), s.a.y.max(s.b.y)) }
    }

    fn union(self, o: Aabb) -> Aabb {
        Aabb { lo: pt(self.lo.x.min(o.lo.x), self.lo.y.min(o.lo.y)), hi: pt(self.hi.x.max(o.hi.x), self.hi.y.max(o.hi.y)) }
    }

    fn dist2(&self, p: Point) -> f64 {
        let dx = (self.lo.x - p.x).max(0.0).max(p.x - self.hi.x);
        let dy = (self.lo.y - p.y).max(0.0).max(p.y - self.hi.y);
        dx * dx + dy * dy
    }
}

enum BvhNode {
    Leaf { bbox: Aabb, start: usize, end: usize },
    Inner { bbox: Aabb, left: usize, right: usize },
}

/// Bounding volume hierarchy over all boundary segments.
struct Bvh {
    segs: Vec<Seg>,
    nodes: Vec<BvhNode>,
}

const LEAF: usize = 4;

impl Bvh {
    fn new(config: &Configuration) -> Bvh {
        let mut segs = Vec::new();
        for (i, c) in config.objects.iter().enumerate() {
            for k in 0..c.len() {
                let (a, b) = c.edge(k);
                segs.push(Seg { a, b, object: i });
            }
        }
        let mut bvh = Bvh { segs, nodes: Vec::new() };
        let n = bvh.segs.len();
        bvh.build(0, n);
        bvh
    }

    fn build(&mut self, start: usize, end: usize) -> usize {
        let bbox = self.segs[start..end].iter().map(Aabb::of).reduce(Aabb::union).expect("nonempty range");
        let id = self.nodes.len();
        if end - start <= LEAF {
            self.nodes.push(BvhNode::Leaf { bbox, start, end });
            return id;
        }
        self.nodes.push(BvhNode::Leaf { bbox, start, end });
        let wide = bbox.hi.x - bbox.lo.x >= bbox.hi.y - bbox.lo.y;
        let key = |s: &Seg| if wide { s.a.x + s.b.x } else { s.a.y + s.b.y };
        let mid = (start + end) / 2;
        self.segs[start..end].select_nth_unstable_by(mid - start, |p, q| key(p).total_cmp(&key(q)));
        let left = self.build(start, mid);
        let right = self.build(mid, end);
        self.nodes[id] = BvhNode::Inner { bbox, left, right };
        id
    }

    /// Nearest accepted segment point: (squared distance, object, point).
    fn nearest(&self, p: Point, accept: impl Fn(&Seg, Point) -> bool) -> Option<(f64, usize, Point)> {
        let mut best: Option<(f64, usize, Point)> = None;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let bound = best.map_or(f64::INFINITY, |b| b.0);
            match &self.nodes[id] {
                BvhNode::Leaf { bbox, start, end } => {
                    if bbox.dist2(p) > bound {
                        continue;
                    }
                    for s in &self.segs[*start..*end] {
                        let (y, _) = closest_on_segment(s.a, s.b, p);
                        let d2 = (y - p).norm2();
                        let better = match best {
                            None => true,
                            Some((bd, bo, _)) => d2 < bd || (d2 == bd && s.object < bo),
                        };
                        if better && accept(s, y) {
                            best = Some((d2, s.object, y));
                        }
                    }
                }
                BvhNode::Inner { bbox, left, right } => {
                    if bbox.dist2(p) > bound {
                        continue;
                    }
                    let (dl, dr) = (self.bbox(*left).dist2(p), self.bbox(*right).dist2(p));
                    if dl < dr {
                        stack.push(*right);
                        stack.push(*left);
                    } else {
                        stack.push(*left);
                        stack.push(*right);
                    }
                }
            }
        }
        best
    }

    fn bbox(&self, id: usize) -> Aabb {
        match &self.nodes[id] {
            BvhNode::Leaf { bbox, .. } | BvhNode::Inner { bbox, .. } => *bbox,
        }
    }
}

struct Labeler<'a> {
    config: &'a Configuration,
    region: &'a BoundingRegion,
    bvh: Bvh,
    bboxes: Vec<(Point, Point)>,
    params: OracleParams,
    scale: f64,
}

impl<'a> Labeler<'a> {
    fn new(config: &'a Configuration, region: &'a BoundingRegion, params: OracleParams) -> Labeler<'a> {
        Labeler {
            config,
            region,
            bvh: Bvh::new(config),
            bboxes: config.objects.iter().map(|c| c.bbox()).collect(),
            params,
            scale: config.diameter().max(1.0),
        }
    }

    fn inside(&self, p: Point) -> Option<usize> {
        (0..self.config.len()).find(|&k| {
            let (lo, hi) = self.bboxes[k];
            p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && self.config.objects[k].contains(p)
        })
    }

    /// Distance from `q` to the nearest significant feature for the ray
    /// from `b` on object `own`, with that feature's object.
    fn significant(&self, q: Point, b: Point, own: usize) -> Option<(f64, usize)> {
        let back = b - q;
        let theta = self.params.theta_min;
        self.bvh
            .nearest(q, |s, y| s.object != own || angle_between(back, y - q) >= theta)
            .map(|(d2, o, _)| (d2.sqrt(), o))
    }

    /// Label of the ray from foot `b` along `dir`, starting the search at `s0`.
    fn continue_ray(&self, b: Point, dir: Point, own: usize, s0: f64) -> Target {
        let mut smax = self.region.exit_distance(b, dir);
        if let Some(t) = self.region.cap {
            smax = smax.min(t);
        }
        if !smax.is_finite() {
            return Target::Unbounded;
        }
        let target = |o: usize| if o == own { Target::SelfLink } else { Target::Object(o) };
        let g = |s: f64| self.significant(b + dir * s, b, own).map(|(d, o)| (d - s, o));
        let lo0 = s0.max(1e-9 * self.scale).min(smax);
        let Some((glo, olo)) = g(lo0) else { return Target::Unbounded };
        if glo <= 0.0 {
            return target(olo);
        }
        let Some((ghi, ohi)) = g(smax) else { return Target::Unbounded };
        if ghi > 0.0 {
            return Target::Unbounded;
        }
        // Illinois regula falsi; the bracket keeps g(lo) > 0 ≥ g(hi)
        let (mut lo, mut hi, mut flo, mut fhi, mut obj) = (lo0, smax, glo, ghi, ohi);
        let mut side = 0i8;
        let tol = self.params.root_tolerance * self.scale;
        for _ in 0..200 {
            if hi - lo <= tol {
                break;
            }
            let mut s = (lo * fhi - hi * flo) / (fhi - flo);
            if !(s > lo && s < hi) {
                s = 0.5 * (lo + hi);
            }
            let Some((fs, os)) = g(s) else { break };
            if fs > 0.0 {
                lo = s;
                flo = fs;
                if side == 1 {
                    fhi *= 0.5;
                }
                side = 1;
            } else {
                hi = s;
                fhi = fs;
                obj = os;
                if side == -1 {
                    flo *= 0.5;
                }
                side = -1;
            }
        }
        target(obj)
    }

    fn classify(&self, p: Point) -> u32 {
        let n = self.config.len();
        let Some((d2, i, y)) = self.bvh.nearest(p, |_, _| true) else { return 0 };
        let d = d2.sqrt();
        if let Some(k) = self.inside(p) {
            let dir = if d > 0.0 { (y - p) / d } else { self.edge_normal(k, y) };
            let t = self.continue_ray(y, dir, k, 0.0);
            return encode(n, k, t, false);
        }
        if !self.region.contains(p, d) {
            return 0;
        }
        if d == 0.0 {
            let t = self.continue_ray(y, self.edge_normal(i, y), i, 0.0);
            return encode(n, i, t, true);
        }
        let t = self.continue_ray(y, (p - y) / d, i, d);
        encode(n, i, t, true)
    }

    fn edge_normal(&self, k: usize, y: Point) -> Point {
        let c = &self.config.objects[k];
        let mut best = (f64::INFINITY, pt(1.0, 0.0));
        for e in 0..c.len() {
            let (a, b) = c.edge(e);
            let dd = geom::segment_distance(a, b, y);
            if dd < best.0 {
                let m = (b - a).normalized();
                best = (dd, pt(m.y, -m.x));
            }
        }
        best.1
    }
}

/// Per-cell labels of the lattice covering Ω̃.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleGrid {
    pub resolution: usize,
    pub cell: f64,
    /// Lower-left lattice corner.
    pub origin: Point,
    pub nx: usize,
    pub ny: usize,
    pub objects: usize,
    /// Row-major label codes; see [`OracleGrid::label`].
    pub labels: Vec<u32>,
}

impl OracleGrid {
    pub fn centre(&self, ix: usize, iy: usize) -> Point {
        self.origin + pt((ix as f64 + 0.5) * self.cell, (iy as f64 + 0.5) * self.cell)
    }

    pub fn label(&self, ix: usize, iy: usize) -> CellLabel {
        decode(self.objects, self.labels[iy * self.nx + ix])
    }

    pub fn cell_area(&self) -> f64 {
        self.cell * self.cell
    }

    /// Nearest object of every cell (none outside Ω̃).
    pub fn nearest_objects(&self) -> Vec<Option<usize>> {
        self.labels.iter().map(|&c| decode(self.objects, c).object()).collect()
    }

    /// Distance from every cell centre to the configuration, as f32.
    pub fn distance_field(&self, config: &Configuration, mode: Parallelism) -> Vec<f32> {
        let bvh = Bvh::new(config);
        par::map_range(mode, self.ny, |iy| {
            (0..self.nx)
                .map(|ix| bvh.nearest(self.centre(ix, iy), |_, _| true).map_or(f32::INFINITY, |b| b.0.sqrt() as f32))
                .collect::<Vec<_>>()
        })
        .concat()
    }

    /// Counts per distinct label, in label order.
    pub fn counts(&self) -> Vec<(CellLabel, usize)> {
        let mut m: std::collections::BTreeMap<CellLabel, usize> = Default::default();
        for &c in &self.labels {
            *m.entry(decode(self.objects, c)).or_default() += 1;
        }
        m.into_iter().collect()
    }

    /// Binary graymap of the label codes plus a JSON legend.
    pub fn write_pgm(&self, path: &std::path::Path) -> Result<()> {
        let io = |source| Error::Io { path: path.display().to_string(), source };
        let max = self.labels.iter().copied().max().unwrap_or(0).max(1);
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        write!(f, "P5\n{} {}\n{}\n", self.nx, self.ny, max).map_err(io)?;
        // top row first
        for iy in (0..self.ny).rev() {
            for &c in &self.labels[iy * self.nx..(iy + 1) * self.nx] {
                if max < 256 {
                    f.write_all(&[c as u8]).map_err(io)?;
                } else {
                    f.write_all(&(c as u16).to_be_bytes()).map_err(io)?;
                }
            }
        }
        f.flush().map_err(io)
    }

    pub fn legend(&self) -> Vec<(u32, CellLabel)> {
        let mut codes: Vec<u32> = self.labels.clone();
        codes.sort_unstable();
        codes.dedup();
        codes.into_iter().map(|c| (c, decode(self.objects, c))).collect()
    }
}

fn lattice(config: &Configuration, region: &BoundingRegion, resolution: usize) -> Result<(Point, f64, usize, usize)> {
    if resolution < MIN_RESOLUTION {
        return Err(Error::Argument(format!("oracle resolution {resolution} is below {MIN_RESOLUTION}")));
    }
    let (lo, hi) = region.extent(config);
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Bounding("oracle needs a bounded region".into()));
    }
    let w = (hi.x - lo.x).max(hi.y - lo.y);
    let h = w / resolution as f64;
    let nx = ((hi.x - lo.x) / h - 1e-9).ceil().max(1.0) as usize;
    let ny = ((hi.y - lo.y) / h - 1e-9).ceil().max(1.0) as usize;
    Ok((lo, h, nx, ny))
}

/// Label every cell centre of a `resolution`-per-axis lattice.
pub fn grid_labels(
    config: &Configuration,
    region: &BoundingRegion,
    resolution: usize,
    params: &OracleParams,
) -> Result<OracleGrid> {
    let (origin, cell, nx, ny) = lattice(config, region, resolution)?;
    let lab = Labeler::new(config, region, *params);
    let centre = |ix: usize, iy: usize| origin + pt((ix as f64 + 0.5) * cell, (iy as f64 + 0.5) * cell);
    let b = params.block.max(1);
    let bands = ny.div_ceil(b);
    let rows = par::map_range(params.parallelism, bands, |band| {
        let y0 = band * b;
        let y1 = (y0 + b).min(ny);
        let mut out = vec![u32::MAX; (y1 - y0) * nx];
        let mut x0 = 0;
        while x0 < nx {
            let x1 = (x0 + b).min(nx);
            fill_block(&lab, &centre, &mut out, nx, y0, (x0, x1), (y0, y1));
            x0 = x1;
        }
        out
    });
    let labels = rows.concat();
    Ok(OracleGrid { resolution, cell, origin, nx, ny, objects: config.len(), labels })
}

/// Label the block [x0,x1)×[y0,y1) into `out` (rows from `base`),
/// filling it uniformly when five probes agree, else splitting it.
fn fill_block(
    lab: &Labeler,
    centre: &impl Fn(usize, usize) -> Point,
    out: &mut [u32],
    nx: usize,
    base: usize,
    (x0, x1): (usize, usize),
    (y0, y1): (usize, usize),
) {
    let get = |out: &mut [u32], ix: usize, iy: usize| {
        let slot = &mut out[(iy - base) * nx + ix];
        if *slot == u32::MAX {
            *slot = lab.classify(centre(ix, iy));
        }
        *slot
    };
    let (w, h) = (x1 - x0, y1 - y0);
    if w <= 2 && h <= 2 {
        for iy in y0..y1 {
            for ix in x0..x1 {
                get(out, ix, iy);
            }
        }
        return;
    }
    let probes = [(x0, y0), (x1 - 1, y0), (x0, y1 - 1), (x1 - 1, y1 - 1), ((x0 + x1) / 2, (y0 + y1) / 2)];
    let first = get(out, probes[0].0, probes[0].1);
    let uniform = probes[1..].iter().all(|&(ix, iy)| get(out, ix, iy) == first);
    if uniform {
        for iy in y0..y1 {
            for ix in x0..x1 {
                out[(iy - base) * nx + ix] = first;
            }
        }
        return;
    }
    let (xm, ym) = (x0 + w.div_ceil(2), y0 + h.div_ceil(2));
    for (xs, ys) in [((x0, xm), (y0, ym)), ((xm, x1), (y0, ym)), ((x0, xm), (ym, y1)), ((xm, x1), (ym, y1))] {
        if xs.0 < xs.1 && ys.0 < ys.1 {
            fill_block(lab, centre, out, nx, base, xs, ys);
        }
    }
}

fn table_from_counts(objects: usize, counts: impl Iterator<Item = (CellLabel, f64)>) -> VolumeTable {
    let mut acc: std::collections::BTreeMap<(usize, Target), (f64, f64)> = Default::default();
    let mut object_volumes = vec![0.0; objects];
    for (label, v) in counts {
        match label {
            CellLabel::Inside { object, target } => {
                acc.entry((object, target)).or_default().0 += v;
                object_volumes[object] += v;
            }
            CellLabel::Neighborhood { object, target } => acc.entry((object, target)).or_default().1 += v,
            CellLabel::Outside => {}
        }
    }
    let rows = acc
        .into_iter()
        .map(|((object, target), (omega, neighborhood))| VolumeRow {
            object,
            target,
            omega,
            neighborhood,
            total: omega + neighborhood,
            flagged: false,
        })
        .collect();
    VolumeTable { source: Source::Oracle, objects, rows, object_volumes }
}

/// Cell counts times cell area per label.
pub fn oracle_volumes(grid: &OracleGrid) -> VolumeTable {
    let a = grid.cell_area();
    table_from_counts(grid.objects, grid.counts().into_iter().map(|(l, c)| (l, c as f64 * a)))
}

/// Area of Ω̃ as the oracle sees it.
pub fn oracle_region_area(grid: &OracleGrid) -> f64 {
    grid.labels.iter().filter(|&&c| c != 0).count() as f64 * grid.cell_area()
}

/// Closeness and significance from oracle volumes.
pub fn oracle_invariants(
    table: &VolumeTable,
) -> (crate::invariants::ClosenessTable, crate::invariants::SignificanceVector) {
    (crate::invariants::closeness(table), crate::invariants::significance(table))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledVolumes {
    pub table: VolumeTable,
    pub samples: usize,
    /// Standard error of each row's omega and neighborhood.
    pub standard_errors: Vec<(f64, f64)>,
}

/// Monte-Carlo volumes from `samples` seeded uniform points, for variance
/// estimates only.
pub fn sampled_volumes(
    config: &Configuration,
    region: &BoundingRegion,
    samples: usize,
    seed: u64,
    params: &OracleParams,
) -> Result<SampledVolumes> {
    let (lo, hi) = region.extent(config);
    if !(lo.is_finite() && hi.is_finite()) || samples == 0 {
        return Err(Error::Argument("sampling needs a bounded region and at least one sample".into()));
    }
    let lab = Labeler::new(config, region, *params);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Point> =
        (0..samples).map(|_| pt(rng.gen_range(lo.x..hi.x), rng.gen_range(lo.y..hi.y))).collect();
    let codes = par::map_slice(params.parallelism, &pts, |&p| lab.classify(p));
    let box_area = (hi.x - lo.x) * (hi.y - lo.y);
    let mut counts: std::collections::BTreeMap<CellLabel, usize> = Default::default();
    for c in codes {
        *counts.entry(decode(config.len(), c)).or_default() += 1;
    }
    let frac = |c: usize| c as f64 / samples as f64;
    let se = |c: usize| box_area * (frac(c) * (1.0 - frac(c)) / samples as f64).sqrt();
    let table = table_from_counts(config.len(), counts.iter().map(|(l, &c)| (*l, frac(c) * box_area)));
    let count_of = |l: CellLabel| counts.get(&l).copied().unwrap_or(0);
    let standard_errors = table
        .rows
        .iter()
        .map(|r| {
            (
                se(count_of(CellLabel::Inside { object: r.object, target: r.target })),
                se(count_of(CellLabel::Neighborhood { object: r.object, target: r.target })),
            )
        })
        .collect();
    Ok(SampledVolumes { table, samples, standard_errors })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionAgreement {
    pub object: usize,
    pub target: Target,
    pub cells: usize,
    pub matching: usize,
}

impl RegionAgreement {
    pub fn fraction(&self) -> f64 {
        if self.cells == 0 {
            1.0
        } else {
            self.matching as f64 / self.cells as f64
        }
    }
}

/// Share of the cells inside each linking-region polygon that carry the
/// same label in the grid.
pub fn region_agreement(grid: &OracleGrid, regions: &LinkingRegions) -> Vec<RegionAgreement> {
    let mut out = Vec::new();
    for ((object, target), set) in &regions.regions {
        let mut cells = 0;
        let mut matching = 0;
        for (quads, exterior) in [(&set.interior, false), (&set.exterior, true)] {
            let want = if exterior {
                CellLabel::Neighborhood { object: *object, target: *target }
            } else {
                CellLabel::Inside { object: *object, target: *target }
            };
            for q in quads.iter() {
                rasterize(grid, q, |ix, iy| {
                    cells += 1;
                    matching += (grid.label(ix, iy) == want) as usize;
                });
            }
        }
        out.push(RegionAgreement { object: *object, target: *target, cells, matching });
    }
    out
}

fn rasterize(grid: &OracleGrid, poly: &[Point], mut f: impl FnMut(usize, usize)) {
    if geom::signed_area(poly).abs() < 1e-300 {
        return;
    }
    let (mut lo, mut hi) = (poly[0], poly[0]);
    for &p in poly {
        lo = pt(lo.x.min(p.x), lo.y.min(p.y));
        hi = pt(hi.x.max(p.x), hi.y.max(p.y));
    }
    let idx = |v: f64, o: f64, n: usize| (((v - o) / grid.cell - 0.5).max(0.0) as usize).min(n.saturating_sub(1));
    let (x0, x1) = (idx(lo.x, grid.origin.x, grid.nx), idx(hi.x, grid.origin.x, grid.nx) + 1);
    let (y0, y1) = (idx(lo.y, grid.origin.y, grid.ny), idx(hi.y, grid.origin.y, grid.ny) + 1);
    for iy in y0..y1.min(grid.ny) {
        for ix in x0..x1.min(grid.nx) {
            if geom::point_in_polygon(poly, grid.centre(ix, iy)) {
                f(ix, iy);
            }
        }
    }
}

/// Largest relative disagreement between two tables over the volume
/// entries present in either, ignoring entries below `floor`.
pub fn max_relative_disagreement(a: &VolumeTable, b: &VolumeTable, floor: f64) -> f64 {
    let mut keys: Vec<(usize, Target)> = a.rows.iter().chain(&b.rows).map(|r| (r.object, r.target)).collect();
    keys.sort();
    keys.dedup();
    let rel = |x: f64, y: f64| if x.abs().max(y.abs()) < floor { 0.0 } else { (x - y).abs() / x.abs().max(y.abs()) };
    let mut worst: f64 = 0.0;
    for (i, t) in keys {
        worst = worst
            .max(rel(a.omega(i, t), b.omega(i, t)))
            .max(rel(a.neighborhood(i, t), b.neighborhood(i, t)))
            .max(rel(a.total(i, t), b.total(i, t)));
    }
    for (x, y) in a.object_volumes.iter().zip(&b.object_volumes) {
        worst = worst.max(rel(*x, *y));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config_model::build_bounding_region;
    use crate::fixtures;

    #[test]
    fn codes_round_trip() {
        let n = 3;
        for object in 0..n {
            for target in [Target::Object((object + 1) % n), Target::SelfLink, Target::Unbounded] {
                for ext in [false, true] {
                    let l = decode(n, encode(n, object, target, ext));
                    assert_eq!(l.object(), Some(object));
                    let t = match l {
                        CellLabel::Inside { target, .. } | CellLabel::Neighborhood { target, .. } => target,
                        CellLabel::Outside => unreachable!(),
                    };
                    assert_eq!(t, target);
                }
            }
        }
        assert_eq!(decode(n, 0), CellLabel::Outside);
    }

    #[test]
    fn two_squares_point_labels() {
        let f = fixtures::two_squares();
        let region = build_bounding_region(&f.configuration, &f.bounding).unwrap();
        let lab = Labeler::new(&f.configuration, &region, OracleParams::default());
        let n = 2;
        assert_eq!(decode(n, lab.classify(pt(0.9, 0.1))), CellLabel::Inside { object: 0, target: Target::Object(1) });
        assert_eq!(decode(n, lab.classify(pt(0.1, 0.9))), CellLabel::Inside { object: 0, target: Target::Unbounded });
        assert_eq!(decode(n, lab.classify(pt(2.0, 0.5))), CellLabel::Neighborhood { object: 0, target: Target::Object(1) });
        // corner fan: below 45° links across, above runs to the box
        assert_eq!(decode(n, lab.classify(pt(2.0, 1.5))), CellLabel::Neighborhood { object: 0, target: Target::Object(1) });
        assert_eq!(decode(n, lab.classify(pt(1.5, 2.0))), CellLabel::Neighborhood { object: 0, target: Target::Unbounded });
        assert_eq!(decode(n, lab.classify(pt(4.0, 0.0))), CellLabel::Neighborhood { object: 1, target: Target::Object(0) });
    }

    #[test]
    fn rejects_low_resolution() {
        let f = fixtures::two_squares();
        let region = build_bounding_region(&f.configuration, &f.bounding).unwrap();
        assert!(grid_labels(&f.configuration, &region, 128, &OracleParams::default()).is_err());
    }

    #[test]
    fn u_shape_self_links() {
        let f = fixtures::u_shape();
        let region = build_bounding_region(&f.configuration, &f.bounding).unwrap();
        let lab = Labeler::new(&f.configuration, &region, OracleParams::default());
        assert_eq!(decode(1, lab.classify(pt(1.5, 2.0))), CellLabel::Neighborhood { object: 0, target: Target::SelfLink });
    }
}
