//! Proximity matrix, Perron weights and the tiered linking graph.

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::VolumeTable;
use crate::invariants::{ClosenessTable, SignificanceVector};
use crate::linking::Target;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// c_{ij} = c_{i→j}·c_{j→i}.
    #[default]
    C,
    /// c^a_{ij}.
    Ca,
}

impl Variant {
    pub fn table(self, c: &ClosenessTable) -> &Vec<Vec<f64>> {
        match self {
            Variant::C => &c.product,
            Variant::Ca => &c.additive,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProximityMatrix {
    pub entries: Vec<Vec<f64>>,
    pub variant: Variant,
    /// v used for the renormalized form P̃ = (p_{ij}·v_i/v_j).
    pub weights: Option<Vec<f64>>,
}

impl ProximityMatrix {
    pub fn from_entries(entries: Vec<Vec<f64>>, variant: Variant) -> Result<ProximityMatrix> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(Error::Argument("proximity matrix must be square and nonempty".into()));
        }
        if entries.iter().flatten().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Argument("proximity matrix entries must be finite and nonnegative".into()));
        }
        Ok(ProximityMatrix { entries, variant, weights: None })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn check_weights(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Weights(format!("expected {n} entries, got {}", v.len())));
    }
    if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::Weights("entries must be positive".into()));
    }
    Ok(())
}

pub fn proximity_matrix(c: &ClosenessTable, variant: Variant, v: Option<&[f64]>) -> Result<ProximityMatrix> {
    let base = variant.table(c).clone();
    let mut p = ProximityMatrix::from_entries(base, variant)?;
    if let Some(v) = v {
        p = renormalize(&p, v)?;
    }
    Ok(p)
}

/// P̃ = (p_{ij}·v_i/v_j).
pub fn renormalize(p: &ProximityMatrix, v: &[f64]) -> Result<ProximityMatrix> {
    let n = p.len();
    check_weights(v, n)?;
    let entries = (0..n).map(|i| (0..n).map(|j| p.entries[i][j] * v[i] / v[j]).collect()).collect();
    Ok(ProximityMatrix { entries, variant: p.variant, weights: Some(v.to_vec()) })
}

fn normalized(v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

/// v_vol: relative object volumes.
pub fn volume_weights(v: &VolumeTable) -> Vec<f64> {
    normalized(v.object_volumes.clone())
}

/// v_lk: relative linked interior volumes Σ_j vol(Ω_{i→j}).
pub fn linked_weights(v: &VolumeTable) -> Vec<f64> {
    let n = v.objects;
    normalized(
        (0..n)
            .map(|i| (0..n).filter(|&j| j != i).map(|j| v.omega(i, Target::Object(j))).sum())
            .collect(),
    )
}

/// Connected components of the graph with an edge wherever an
/// off-diagonal entry is positive, each sorted, ordered by first member.
pub fn linked_components(m: &[Vec<f64>]) -> Vec<Vec<usize>> {
    let n = m.len();
    let mut uf = UnionFind::new(n);
    for i in 0..n {
        for j in 0..n {
            if i != j && (m[i][j] > 0.0 || m[j][i] > 0.0) {
                uf.union(i, j);
            }
        }
    }
    group(&mut uf, (0..n).collect())
}

fn group(uf: &mut UnionFind<usize>, vertices: Vec<usize>) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut roots: Vec<usize> = Vec::new();
    for v in vertices {
        let r = uf.find(v);
        match roots.iter().position(|&x| x == r) {
            Some(k) => out[k].push(v),
            None => {
                roots.push(r);
                out.push(vec![v]);
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProximityWeights {
    pub eigenvalue: f64,
    pub weights: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

pub const MAX_POWER_ITERATIONS: usize = 100_000;

/// Perron eigenvector by power iteration from the uniform vector.
pub fn proximity_weights(p: &ProximityMatrix) -> Result<ProximityWeights> {
    let n = p.len();
    let comps = linked_components(&p.entries);
    if comps.len() > 1 {
        return Err(Error::Reducible(comps));
    }
    let apply = |w: &[f64]| -> Vec<f64> {
        (0..n).map(|i| (0..n).map(|j| p.entries[i][j] * w[j]).sum()).collect()
    };
    let mut w = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_POWER_ITERATIONS {
        iterations += 1;
        let pw = apply(&w);
        let s: f64 = pw.iter().sum();
        let lambda = s / w.iter().sum::<f64>();
        residual = pw.iter().zip(&w).map(|(a, b)| (a - lambda * b).abs()).fold(0.0, f64::max);
        w = pw.into_iter().map(|x| x / s).collect();
        if residual < 1e-12 {
            break;
        }
    }
    // residual of the returned vector itself
    let pw = apply(&w);
    let lambda = pw.iter().sum::<f64>() / w.iter().sum::<f64>();
    residual = residual.min(pw.iter().zip(&w).map(|(a, b)| (a - lambda * b).abs()).fold(0.0, f64::max));
    Ok(ProximityWeights { eigenvalue: lambda, weights: w, residual, iterations })
}

/// w̃_i ∝ w_i·V_i, normalized to sum 1.
pub fn renormalized_weights(w: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    check_weights(v, w.len())?;
    Ok(normalized(w.iter().zip(v).map(|(a, b)| a * b).collect()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub i: usize,
    pub j: usize,
    pub height: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TieredGraph {
    pub vertex_heights: Vec<f64>,
    pub edges: Vec<GraphEdge>,
}

pub fn build_tiered_graph(c: &ClosenessTable, s: &SignificanceVector, variant: Variant) -> TieredGraph {
    tiered_graph_from(variant.table(c), &s.s)
}

/// Graph from a closeness matrix and vertex heights directly.
pub fn tiered_graph_from(m: &[Vec<f64>], heights: &[f64]) -> TieredGraph {
    let n = heights.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if m[i][j] > 0.0 {
                edges.push(GraphEdge { i, j, height: m[i][j] });
            }
        }
    }
    TieredGraph { vertex_heights: heights.to_vec(), edges }
}

/// Components of Γ_b: all vertices, edges with f ≥ b.
pub fn edge_threshold_subgraph(g: &TieredGraph, b: f64) -> Vec<Vec<usize>> {
    let n = g.vertex_heights.len();
    let mut uf = UnionFind::new(n);
    for e in g.edges.iter().filter(|e| e.height >= b) {
        uf.union(e.i, e.j);
    }
    group(&mut uf, (0..n).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subgraph {
    pub vertices: Vec<usize>,
    pub edges: Vec<GraphEdge>,
    pub components: Vec<Vec<usize>>,
}

/// Γ^a: vertices with f ≥ a and the edges between them.
pub fn vertex_threshold_subgraph(g: &TieredGraph, a: f64) -> Subgraph {
    let n = g.vertex_heights.len();
    let vertices: Vec<usize> = (0..n).filter(|&v| g.vertex_heights[v] >= a).collect();
    let keep = |v: usize| vertices.contains(&v);
    let edges: Vec<GraphEdge> = g.edges.iter().copied().filter(|e| keep(e.i) && keep(e.j)).collect();
    let mut uf = UnionFind::new(n);
    for e in &edges {
        uf.union(e.i, e.j);
    }
    let components = group(&mut uf, vertices.clone());
    Subgraph { vertices, edges, components }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub threshold: f64,
    /// Components joined at this threshold.
    pub merged: Vec<Vec<usize>>,
    pub result: Vec<usize>,
}

/// Single-linkage merges as the edge threshold sweeps downward.
pub fn merge_sequence(g: &TieredGraph) -> Vec<MergeEvent> {
    let n = g.vertex_heights.len();
    let mut edges = g.edges.clone();
    edges.sort_by(|a, b| b.height.total_cmp(&a.height).then(a.i.cmp(&b.i)).then(a.j.cmp(&b.j)));
    let mut uf = UnionFind::new(n);
    let mut out = Vec::new();
    let components = |uf: &mut UnionFind<usize>| group(uf, (0..n).collect());
    let mut k = 0;
    while k < edges.len() {
        let h = edges[k].height;
        let before = components(&mut uf);
        while k < edges.len() && edges[k].height == h {
            uf.union(edges[k].i, edges[k].j);
            k += 1;
        }
        for comp in components(&mut uf) {
            let parts: Vec<Vec<usize>> = before.iter().filter(|b| b.iter().all(|v| comp.contains(v))).cloned().collect();
            if parts.len() > 1 {
                out.push(MergeEvent { threshold: h, merged: parts, result: comp });
            }
        }
    }
    out
}

/// `{1,2} {3,4,5}` with one-based members.
pub fn format_components(c: &[Vec<usize>]) -> String {
    c.iter()
        .map(|g| format!("{{{}}}", g.iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join(",")))
        .collect::<Vec<_>>()
        .join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{FIVE_OBJECT_CLOSENESS, FIVE_OBJECT_SIGNIFICANCE};

    fn five() -> ProximityMatrix {
        ProximityMatrix::from_entries(FIVE_OBJECT_CLOSENESS.iter().map(|r| r.to_vec()).collect(), Variant::C).unwrap()
    }

    #[test]
    fn symmetric_pair_has_equal_weights() {
        for c in [0.01, 0.5, 1.0] {
            let p = ProximityMatrix::from_entries(vec![vec![1.0, c], vec![c, 1.0]], Variant::C).unwrap();
            let w = proximity_weights(&p).unwrap();
            assert!((w.weights[0] - 0.5).abs() < 1e-12);
            assert!((w.eigenvalue - (1.0 + c)).abs() < 1e-12);
        }
    }

    #[test]
    fn block_diagonal_is_reducible() {
        let p = ProximityMatrix::from_entries(
            vec![vec![1.0, 0.3, 0.0], vec![0.3, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
            Variant::C,
        )
        .unwrap();
        match proximity_weights(&p) {
            Err(Error::Reducible(c)) => assert_eq!(c, vec![vec![0, 1], vec![2]]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn five_object_graph() {
        let g = tiered_graph_from(&five().entries, &FIVE_OBJECT_SIGNIFICANCE);
        assert_eq!(g.edges.len(), 7);
        assert_eq!(format_components(&edge_threshold_subgraph(&g, 0.21)), "{1,2} {3,4,5}");
        assert_eq!(edge_threshold_subgraph(&g, 0.0).len(), 1);
        assert_eq!(edge_threshold_subgraph(&g, 0.5).len(), 5);
        let sub = vertex_threshold_subgraph(&g, 0.45);
        assert_eq!(sub.vertices, vec![0, 3, 4]);
        assert_eq!(sub.edges.len(), 1);
        assert_eq!(format_components(&sub.components), "{1} {4,5}");
        assert!(vertex_threshold_subgraph(&g, 0.6).vertices.is_empty());
        let m = merge_sequence(&g);
        assert_eq!(m[0].threshold, 0.487);
        assert_eq!(m[0].result, vec![2, 3]);
        assert_eq!(m.last().unwrap().result.len(), 5);
    }

    #[test]
    fn renormalized_form_is_conjugate() {
        let p = five();
        let v = [0.49, 0.11, 0.15, 0.10, 0.15];
        let pt = renormalize(&p, &v).unwrap();
        let a = proximity_weights(&p).unwrap();
        let b = proximity_weights(&pt).unwrap();
        assert!((a.eigenvalue - b.eigenvalue).abs() < 1e-10);
        let direct = renormalized_weights(&a.weights, &v).unwrap();
        for (x, y) in direct.iter().zip(&b.weights) {
            assert!((x - y).abs() < 1e-8);
        }
    }
}
