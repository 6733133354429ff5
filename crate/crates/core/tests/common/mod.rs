//! Shared helpers for the integration suites: random convex
//! configurations and the per-configuration property checks.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use skelink_core::config_model::{
    build_bounding_region, parse_document, serialize_document, BoundingRegion, BoundingSpec, ConfigDocument,
    Configuration,
};
use skelink_core::flow::level_set;
use skelink_core::geom::{self, pt, Point};
use skelink_core::integrate::weyl_volume;
use skelink_core::invariants::table_violations;
use skelink_core::linking::Target;
use skelink_core::pipeline::{analyze, Analysis, PipelineParams};
use skelink_core::proximity_graph::{
    edge_threshold_subgraph, linked_components, proximity_weights, renormalize, renormalized_weights,
    vertex_threshold_subgraph, volume_weights, ProximityMatrix, TieredGraph, Variant,
};
use skelink_core::skeleton::{NodeKind, StratumKind};

/// Convex polygon with vertices on a rotated ellipse at sorted random angles.
pub fn random_convex(rng: &mut ChaCha8Rng, centre: Point) -> Vec<Point> {
    let n = rng.gen_range(4..=12);
    let (a, b) = (rng.gen_range(0.7..1.6), rng.gen_range(0.5..1.2));
    let rot = rng.gen_range(0.0..std::f64::consts::PI);
    // jittered equal spacing keeps every gap well above zero
    let step = std::f64::consts::TAU / n as f64;
    let phase = rng.gen_range(0.0..step);
    (0..n)
        .map(|k| {
            let t = phase + step * (k as f64 + rng.gen_range(-0.3..0.3));
            centre + pt(a * t.cos(), b * t.sin()).rotate(rot)
        })
        .collect()
}

/// 2 to 6 random convex objects on a jittered lattice, in a box with a
/// collar of 2.
pub fn random_document(seed: u64) -> ConfigDocument {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = rng.gen_range(2..=6);
    let cols = 3;
    let polys: Vec<Vec<Point>> = (0..k)
        .map(|i| {
            let c = pt(4.0 * (i % cols) as f64, 4.0 * (i / cols) as f64) + pt(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
            random_convex(&mut rng, c)
        })
        .collect();
    let configuration = Configuration::new(polys).expect("lattice spacing keeps objects apart");
    let (lo, hi) = configuration.bbox();
    let m = 2.0;
    ConfigDocument {
        bounding: Some(BoundingSpec::Box { corners: [lo - pt(m, m), hi + pt(m, m)] }),
        configuration,
    }
}

pub fn region_of(doc: &ConfigDocument) -> BoundingRegion {
    build_bounding_region(&doc.configuration, doc.bounding.as_ref().expect("bounding")).expect("region")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn box_area(spec: &BoundingSpec) -> Option<f64> {
    match spec {
        BoundingSpec::Box { corners: [a, b] } => Some((b.x - a.x).abs() * (b.y - a.y).abs()),
        _ => None,
    }
}

/// Every listed property on one configuration; returns the violations.
pub fn check_properties(doc: &ConfigDocument) -> Vec<String> {
    let mut bad = Vec::new();
    let config = &doc.configuration;

    // config_model
    match parse_document(&serialize_document(doc)) {
        Ok(back) if back == *doc => {}
        Ok(_) => bad.push("round trip changed the document".into()),
        Err(e) => bad.push(format!("round trip failed: {e}")),
    }
    let region = region_of(doc);
    let b = region.boundary.as_ref().expect("box region");
    for c in &config.objects {
        for &p in c.vertices() {
            if !(b.contains(p) && b.distance(p) > 0.0) {
                bad.push(format!("box does not strictly contain {p:?}"));
            }
        }
    }

    let a = match analyze(config, &region, &PipelineParams::default()) {
        Ok(a) => a,
        Err(e) => {
            bad.push(format!("pipeline failed: {e}"));
            return bad;
        }
    };
    bad.extend(skeleton_properties(doc, &a));
    bad.extend(linking_properties(doc, &a));
    bad.extend(flow_properties(&a));
    bad.extend(table_violations(&a.closeness, &a.significance).into_iter().map(|v| format!("table: {v}")));
    bad.extend(weight_properties(&a));
    bad
}

fn skeleton_properties(doc: &ConfigDocument, a: &Analysis) -> Vec<String> {
    let mut bad = Vec::new();
    for s in &a.skeletons {
        let c = &doc.configuration.objects[s.object];
        for (k, node) in s.nodes.iter().enumerate() {
            let x = node.position + node.direction * node.radius;
            let d = c.distance(x);
            if d > 2.0 * s.sampling_step {
                bad.push(format!("object {}: node {k} lands {d:.3e} off the boundary", s.object));
            }
        }
        for st in s.strata.iter().filter(|st| st.kind == StratumKind::Side) {
            let mut sign = 0.0f64;
            for &e in &st.elements {
                let el = &s.elements[e];
                let mut d = s.nodes[el.b].foot_arc - s.nodes[el.a].foot_arc;
                d -= s.perimeter * (d / s.perimeter).round();
                if d.abs() < 1e-12 {
                    continue;
                }
                if sign == 0.0 {
                    sign = d.signum();
                } else if d.signum() != sign {
                    bad.push(format!("object {}: foot arc not monotone on a side stratum", s.object));
                    break;
                }
            }
        }
        let shoelace = c.area();
        if rel(weyl_volume(s), shoelace) > 0.01 {
            bad.push(format!("object {}: Weyl area {} vs shoelace {shoelace}", s.object, weyl_volume(s)));
        }
    }
    bad
}

fn linking_properties(doc: &ConfigDocument, a: &Analysis) -> Vec<String> {
    let mut bad = Vec::new();
    let n = doc.configuration.len();
    let mut linked = vec![vec![false; n]; n];
    for (i, (s, ls)) in a.skeletons.iter().zip(&a.assignment.links).enumerate() {
        for (node, l) in s.nodes.iter().zip(ls) {
            if l.ell < node.radius - 1e-9 {
                bad.push(format!("object {i}: ell {} below r {}", l.ell, node.radius));
            }
            if let Target::Object(j) = l.target {
                linked[i][j] = true;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            if linked[i][j] != linked[j][i] {
                bad.push(format!("linking not symmetric between {i} and {j}"));
            }
        }
    }
    let t = &a.volumes;
    for i in 0..n {
        let sum: f64 = t.rows.iter().filter(|r| r.object == i).map(|r| r.omega).sum();
        if rel(sum, t.object_volumes[i]) > 0.01 {
            bad.push(format!("object {i}: interior parts sum to {sum}, area {}", t.object_volumes[i]));
        }
    }
    for r in &t.rows {
        if (r.total - (r.omega + r.neighborhood)).abs() > 1e-12 * r.total.abs().max(1.0) {
            bad.push(format!("R != Omega + N for {:?}", (r.object, r.target)));
        }
    }
    if let Some(area) = doc.bounding.as_ref().and_then(box_area) {
        let ext: f64 = t.rows.iter().map(|r| r.neighborhood).sum();
        let want = area - t.object_volumes.iter().sum::<f64>();
        if rel(ext, want) > 0.01 {
            bad.push(format!("exterior parts sum to {ext}, expected {want}"));
        }
    }
    bad
}

fn flow_properties(a: &Analysis) -> Vec<String> {
    let mut bad = Vec::new();
    if a.nonsingularity.passes() {
        for k in 0..=16 {
            let t = k as f64 / 16.0;
            match level_set(&a.skeletons, &a.assignment, t) {
                Ok(ls) if !ls.fold_overs.is_empty() => bad.push(format!("{} fold-overs at t = {t}", ls.fold_overs.len())),
                Ok(_) => {}
                Err(e) => bad.push(format!("level set at t = {t}: {e}")),
            }
        }
    }
    for s in &a.skeletons {
        if s.nodes.iter().any(|n| n.kind == NodeKind::Smooth && !n.radius.is_finite()) {
            bad.push(format!("object {}: infinite radius", s.object));
        }
    }
    bad
}

fn weight_properties(a: &Analysis) -> Vec<String> {
    let mut bad = Vec::new();
    let c = &a.closeness.product;
    let p = ProximityMatrix::from_entries(c.clone(), Variant::C).expect("closeness is a valid matrix");
    if linked_components(c).len() == 1 {
        match proximity_weights(&p) {
            Ok(w) => {
                if w.residual > 1e-10 || w.weights.iter().any(|&x| x <= 0.0) || w.eigenvalue < 1.0 {
                    bad.push(format!("Perron vector off: {w:?}"));
                }
                let v = volume_weights(&a.volumes);
                let pt_ = renormalize(&p, &v).expect("positive volumes");
                match proximity_weights(&pt_) {
                    Ok(wt) => {
                        if (wt.eigenvalue - w.eigenvalue).abs() > 1e-10 {
                            bad.push("renormalized eigenvalue differs".into());
                        }
                        let r = renormalized_weights(&w.weights, &v).expect("weights");
                        if r.iter().zip(&wt.weights).any(|(x, y)| (x - y).abs() > 1e-8) {
                            bad.push("renormalized weights differ from the direct Perron vector".into());
                        }
                    }
                    Err(e) => bad.push(format!("renormalized matrix: {e}")),
                }
            }
            Err(e) => bad.push(format!("irreducible matrix rejected: {e}")),
        }
    } else if proximity_weights(&p).is_ok() {
        bad.push("reducible matrix accepted".into());
    }
    let g = skelink_core::proximity_graph::build_tiered_graph(&a.closeness, &a.significance, Variant::C);
    bad.extend(threshold_monotonicity(&g));
    bad
}

pub fn threshold_monotonicity(g: &TieredGraph) -> Vec<String> {
    let mut bad = Vec::new();
    let mut levels: Vec<f64> = g.edges.iter().map(|e| e.height).chain(g.vertex_heights.iter().copied()).collect();
    levels.push(0.0);
    levels.sort_by(f64::total_cmp);
    for w in levels.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let kept = |b: f64| g.edges.iter().filter(|e| e.height >= b).map(|e| (e.i, e.j)).collect::<Vec<_>>();
        if !kept(hi).iter().all(|e| kept(lo).contains(e)) {
            bad.push(format!("edge set at {hi} not inside edge set at {lo}"));
        }
        // fewer edges can only split components
        let (clo, chi) = (edge_threshold_subgraph(g, lo), edge_threshold_subgraph(g, hi));
        if chi.len() < clo.len() {
            bad.push(format!("raising b to {hi} merged components"));
        }
        let (vlo, vhi) = (vertex_threshold_subgraph(g, lo).vertices, vertex_threshold_subgraph(g, hi).vertices);
        if !vhi.iter().all(|v| vlo.contains(v)) {
            bad.push(format!("vertex set at {hi} not inside vertex set at {lo}"));
        }
    }
    bad
}

/// Largest change of any c or s between two analyses, relative to the
/// larger value with a floor of `floor`.
pub fn invariant_change(a: &Analysis, b: &Analysis, floor: f64) -> f64 {
    let d = |x: f64, y: f64| (x - y).abs() / x.abs().max(y.abs()).max(floor);
    let mut worst: f64 = 0.0;
    for (ra, rb) in a.closeness.directed.iter().zip(&b.closeness.directed) {
        for (x, y) in ra.iter().zip(rb) {
            worst = worst.max(d(*x, *y));
        }
    }
    for (ra, rb) in a.closeness.product.iter().zip(&b.closeness.product) {
        for (x, y) in ra.iter().zip(rb) {
            worst = worst.max(d(*x, *y));
        }
    }
    for (x, y) in a.significance.s.iter().zip(&b.significance.s) {
        worst = worst.max(d(*x, *y));
    }
    worst
}

pub fn shoelace(v: &[Point]) -> f64 {
    geom::signed_area(v).abs()
}
