//! Report schema and its human-readable rendering.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::config_model::{BoundingSpec, ConfigDocument};
use crate::integrate::{steiner_volume, weyl_volume, Source, VolumeTable};
use crate::invariants::{ClosenessTable, SignificanceVector};
use crate::linking::{LinkingAssignment, LinkingAxis, Target};
use crate::pipeline::{Analysis, PipelineParams};
use crate::proximity_graph::{format_components, GraphEdge, MergeEvent, ProximityWeights, TieredGraph, Variant};
use crate::skeleton::{SkeletalStructure, StratumKind};

pub const TOOL: &str = "skelink";

/// Round to six significant digits so reports are stable across
/// platforms and easy to diff.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

fn sig6_all(v: &[f64]) -> Vec<f64> {
    v.iter().copied().map(sig6).collect()
}

fn sig6_matrix(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    m.iter().map(|r| sig6_all(r)).collect()
}

pub fn rounded_table(t: &VolumeTable) -> VolumeTable {
    let mut t = t.clone();
    for r in &mut t.rows {
        r.omega = sig6(r.omega);
        r.neighborhood = sig6(r.neighborhood);
        r.total = sig6(r.total);
    }
    t.object_volumes = sig6_all(&t.object_volumes);
    t
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

impl Default for ToolInfo {
    fn default() -> Self {
        ToolInfo { name: TOOL.into(), version: env!("CARGO_PKG_VERSION").into() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportParameters {
    pub pipeline: PipelineParams,
    pub bounding: BoundingSpec,
    pub variant: Variant,
    pub oracle_resolution: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkeletonStats {
    pub source: Source,
    pub object: usize,
    pub nodes: usize,
    pub side_strata: usize,
    pub fan_strata: usize,
    pub sampling_step: f64,
    pub max_blum_deviation: f64,
    pub medial_measure: f64,
    pub area: f64,
    pub neighborhood: f64,
}

impl SkeletonStats {
    pub fn of(s: &SkeletalStructure, assignment: &LinkingAssignment) -> SkeletonStats {
        let count = |k: StratumKind| s.strata.iter().filter(|st| st.kind == k).count();
        SkeletonStats {
            source: Source::Skeletal,
            object: s.object,
            nodes: s.nodes.len(),
            side_strata: count(StratumKind::Side),
            fan_strata: count(StratumKind::Fan),
            sampling_step: sig6(s.sampling_step),
            max_blum_deviation: sig6(s.max_blum_deviation()),
            medial_measure: sig6(s.total_medial_measure()),
            area: sig6(weyl_volume(s)),
            neighborhood: sig6(steiner_volume(s, assignment)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonsingularitySummary {
    pub source: Source,
    pub passes: bool,
    pub sides: usize,
    pub failures: usize,
    pub min_margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClosenessReport {
    pub source: Source,
    pub directed: Vec<Vec<f64>>,
    pub product: Vec<Vec<f64>>,
    pub additive: Vec<Vec<f64>>,
}

impl ClosenessReport {
    pub fn of(source: Source, c: &ClosenessTable) -> ClosenessReport {
        ClosenessReport {
            source,
            directed: sig6_matrix(&c.directed),
            product: sig6_matrix(&c.product),
            additive: sig6_matrix(&c.additive),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignificanceReport {
    pub source: Source,
    pub s: Vec<f64>,
    pub absolute: Vec<f64>,
    pub self_linked: Vec<bool>,
}

impl SignificanceReport {
    pub fn of(source: Source, s: &SignificanceVector) -> SignificanceReport {
        SignificanceReport { source, s: sig6_all(&s.s), absolute: sig6_all(&s.absolute), self_linked: s.self_linked.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightsReport {
    pub eigenvalue: f64,
    pub weights: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

impl WeightsReport {
    pub fn of(w: &ProximityWeights) -> WeightsReport {
        WeightsReport {
            eigenvalue: sig6(w.eigenvalue),
            weights: sig6_all(&w.weights),
            residual: sig6(w.residual),
            iterations: w.iterations,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProximityReport {
    pub source: Source,
    pub variant: Variant,
    pub matrix: Vec<Vec<f64>>,
    pub v_vol: Vec<f64>,
    pub v_lk: Vec<f64>,
    /// Absent when the matrix is reducible.
    pub plain: Option<WeightsReport>,
    pub vol_renormalized: Option<Vec<f64>>,
    pub lk_renormalized: Option<Vec<f64>>,
    pub reducible: Option<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphReport {
    pub source: Source,
    pub vertex_heights: Vec<f64>,
    pub edges: Vec<GraphEdge>,
    pub merges: Vec<MergeEvent>,
}

impl GraphReport {
    pub fn of(source: Source, g: &TieredGraph, merges: Vec<MergeEvent>) -> GraphReport {
        GraphReport {
            source,
            vertex_heights: sig6_all(&g.vertex_heights),
            edges: g.edges.iter().map(|e| GraphEdge { height: sig6(e.height), ..*e }).collect(),
            merges: merges.into_iter().map(|m| MergeEvent { threshold: sig6(m.threshold), ..m }).collect(),
        }
    }

    pub fn graph(&self) -> TieredGraph {
        TieredGraph { vertex_heights: self.vertex_heights.clone(), edges: self.edges.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub tool: ToolInfo,
    pub parameters: ReportParameters,
    pub configuration: ConfigDocument,
    pub skeletons: Vec<SkeletonStats>,
    pub nonsingularity: NonsingularitySummary,
    /// Skeletal table first, then the oracle table when requested.
    pub volumes: Vec<VolumeTable>,
    pub closeness: Vec<ClosenessReport>,
    pub significance: Vec<SignificanceReport>,
    pub proximity: ProximityReport,
    pub graph: GraphReport,
    /// Largest relative skeletal/oracle disagreement, when both exist.
    pub oracle_disagreement: Option<f64>,
}

impl AnalysisReport {
    pub fn volume_table(&self, source: Source) -> Option<&VolumeTable> {
        self.volumes.iter().find(|t| t.source == source)
    }
}

/// Everything `render` needs to redraw an analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SerializedStructure {
    pub tool: ToolInfo,
    pub configuration: ConfigDocument,
    pub bounding: BoundingSpec,
    pub skeletons: Vec<SkeletalStructure>,
    pub axis: LinkingAxis,
    pub assignment: LinkingAssignment,
}

impl SerializedStructure {
    pub fn of(doc: &ConfigDocument, bounding: BoundingSpec, a: &Analysis) -> SerializedStructure {
        SerializedStructure {
            tool: ToolInfo::default(),
            configuration: doc.clone(),
            bounding,
            skeletons: a.skeletons.clone(),
            axis: a.axis.clone(),
            assignment: a.assignment.clone(),
        }
    }
}

fn target_name(t: Target) -> String {
    match t {
        Target::Object(j) => format!("{}", j + 1),
        Target::SelfLink => "self".into(),
        Target::Unbounded => "inf".into(),
    }
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ")
}

fn source_name(s: Source) -> &'static str {
    match s {
        Source::Skeletal => "skeletal",
        Source::Oracle => "oracle",
        Source::AnalyticFixture => "analytic-fixture",
    }
}

/// Plain-text rendering of a report. Objects are numbered from 1.
pub fn render_text(r: &AnalysisReport) -> String {
    let mut o = String::new();
    let _ = writeln!(o, "{} {}", r.tool.name, r.tool.version);
    let _ = writeln!(o, "objects: {}", r.configuration.configuration.len());
    for s in &r.skeletons {
        let _ = writeln!(
            o,
            "  object {}: {} nodes, {} side / {} fan strata, area {}, neighborhood {}, blum dev {}",
            s.object + 1,
            s.nodes,
            s.side_strata,
            s.fan_strata,
            s.area,
            s.neighborhood,
            s.max_blum_deviation
        );
    }
    let ns = &r.nonsingularity;
    let _ = writeln!(o, "nonsingularity: {} ({} of {} sides fail)", if ns.passes { "pass" } else { "FAIL" }, ns.failures, ns.sides);
    for t in &r.volumes {
        let _ = writeln!(o, "volumes [{}]:", source_name(t.source));
        for row in &t.rows {
            let _ = writeln!(
                o,
                "  {} -> {:<4} omega {:<12} N {:<12} R {:<12}{}",
                row.object + 1,
                target_name(row.target),
                row.omega,
                row.neighborhood,
                row.total,
                if row.flagged { " (flagged)" } else { "" }
            );
        }
    }
    for c in &r.closeness {
        let _ = writeln!(o, "closeness c [{}]:", source_name(c.source));
        for row in &c.product {
            let _ = writeln!(o, "  {}", fmt_vec(row));
        }
    }
    for s in &r.significance {
        let _ = writeln!(o, "significance [{}]: {}", source_name(s.source), fmt_vec(&s.s));
    }
    let p = &r.proximity;
    match (&p.plain, &p.reducible) {
        (Some(w), _) => {
            let _ = writeln!(o, "proximity weights: lambda {:.5}, w = ({})", w.eigenvalue, fmt_vec(&w.weights));
            if let Some(v) = &p.vol_renormalized {
                let _ = writeln!(o, "  v_vol renormalized: ({})", fmt_vec(v));
            }
            if let Some(v) = &p.lk_renormalized {
                let _ = writeln!(o, "  v_lk renormalized: ({})", fmt_vec(v));
            }
        }
        (None, Some(c)) => {
            let _ = writeln!(o, "proximity matrix reducible: {}", format_components(c));
        }
        _ => {}
    }
    let _ = writeln!(o, "tiered graph: {} edges", r.graph.edges.len());
    for m in &r.graph.merges {
        let _ = writeln!(o, "  merge at {}: {}", m.threshold, format_components(&m.merged));
    }
    if let Some(d) = r.oracle_disagreement {
        let _ = writeln!(o, "oracle disagreement: {:.3}%", d * 100.0);
    }
    o
}
