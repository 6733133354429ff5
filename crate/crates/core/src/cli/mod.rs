//! Command implementations behind the `skelink` binary.
//!
//! Each command reads its inputs, runs the library and returns a value the
//! binary prints or writes; the binary only parses flags and maps errors to
//! exit codes. Commands run sequentially and leave parallelism to the
//! library internals.

pub mod report;
pub mod svg;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config_model::{
    build_bounding_region, parse_document, validate_configuration, BoundingRegion, BoundingSpec, ConfigDocument, Severity,
};
use crate::error::{Error, Result};
use crate::flow::level_set;
use crate::geom::{pt, Point};
use crate::integrate::{Source, VolumeTable};
use crate::invariants::{closeness, significance};
use crate::linking::{extract_regions, Target};
use crate::oracle::{self, OracleGrid, OracleParams, SampledVolumes};
use crate::pipeline::{analyze, Analysis, PipelineParams};
use crate::proximity_graph::{
    self, build_tiered_graph, edge_threshold_subgraph, format_components, linked_weights, merge_sequence,
    proximity_weights, renormalized_weights, vertex_threshold_subgraph, volume_weights, ProximityMatrix, Subgraph,
    TieredGraph, Variant,
};
use report::{
    rounded_table, sig6, AnalysisReport, ClosenessReport, GraphReport, NonsingularitySummary, ProximityReport,
    ReportParameters, SerializedStructure, SignificanceReport, SkeletonStats, ToolInfo, WeightsReport,
};
use svg::{colour, Canvas};

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.display().to_string(), source })?;
    }
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.display().to_string(), source })
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

fn parse_json(path: &Path) -> Result<Value> {
    serde_json::from_str(&read_file(path)?).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundingKind {
    Box,
    Hull,
    Threshold,
}

/// Bounding flags; anything unset falls back to the input document.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundingArgs {
    pub kind: Option<BoundingKind>,
    /// x0, y0, x1, y1.
    pub corners: Option<Vec<f64>>,
    pub margin: Option<f64>,
    pub tau: Option<f64>,
}

impl BoundingArgs {
    pub fn resolve(&self, doc: &ConfigDocument) -> Result<BoundingSpec> {
        let kind = match self.kind {
            Some(k) => k,
            None => return doc.bounding.ok_or_else(|| Error::Bounding("no bounding region in input or flags".into())),
        };
        Ok(match kind {
            BoundingKind::Box => {
                let c = self.corners.as_deref().ok_or_else(|| Error::Argument("--box x0,y0,x1,y1 is required".into()))?;
                if c.len() != 4 {
                    return Err(Error::Argument("--box takes four numbers".into()));
                }
                BoundingSpec::Box { corners: [pt(c[0], c[1]), pt(c[2], c[3])] }
            }
            BoundingKind::Hull => BoundingSpec::Hull { margin: self.margin.unwrap_or(0.0) },
            BoundingKind::Threshold => BoundingSpec::Threshold {
                tau: self.tau.ok_or_else(|| Error::Argument("--tau is required for threshold bounding".into()))?,
            },
        })
    }
}

fn load(path: &Path, bounding: &BoundingArgs) -> Result<(ConfigDocument, BoundingSpec, BoundingRegion)> {
    let doc = parse_document(&read_file(path)?)?;
    let spec = bounding.resolve(&doc)?;
    let region = build_bounding_region(&doc.configuration, &spec)?;
    Ok((doc, spec, region))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyzeArgs {
    pub config: PathBuf,
    pub bounding: BoundingArgs,
    pub pipeline: PipelineParams,
    pub variant: Variant,
    pub oracle_resolution: Option<usize>,
    pub output: Option<PathBuf>,
    pub text_output: Option<PathBuf>,
    pub structure: Option<PathBuf>,
}

impl AnalyzeArgs {
    pub fn new(config: impl Into<PathBuf>) -> AnalyzeArgs {
        AnalyzeArgs {
            config: config.into(),
            bounding: BoundingArgs::default(),
            pipeline: PipelineParams::default(),
            variant: Variant::C,
            oracle_resolution: None,
            output: None,
            text_output: None,
            structure: None,
        }
    }
}

pub struct AnalyzeOutcome {
    pub report: AnalysisReport,
    pub analysis: Analysis,
    /// Set when a mathematical hypothesis fails; the report is still written.
    pub hypothesis: Option<Error>,
    pub warnings: Vec<String>,
}

fn proximity_report(variant: Variant, a_vol: &VolumeTable, matrix: Vec<Vec<f64>>, source: Source) -> Result<ProximityReport> {
    let v_vol = volume_weights(a_vol);
    let v_lk = linked_weights(a_vol);
    let p = ProximityMatrix::from_entries(matrix.clone(), variant)?;
    let (plain, reducible, w) = match proximity_weights(&p) {
        Ok(w) => (Some(WeightsReport::of(&w)), None, Some(w.weights)),
        Err(Error::Reducible(c)) => (None, Some(c), None),
        Err(e) => return Err(e),
    };
    let renorm = |v: &[f64]| w.as_ref().and_then(|w| renormalized_weights(w, v).ok()).map(|x| x.into_iter().map(sig6).collect());
    Ok(ProximityReport {
        source,
        variant,
        matrix: matrix.iter().map(|r| r.iter().copied().map(sig6).collect()).collect(),
        vol_renormalized: renorm(&v_vol),
        lk_renormalized: renorm(&v_lk),
        v_vol: v_vol.into_iter().map(sig6).collect(),
        v_lk: v_lk.into_iter().map(sig6).collect(),
        plain,
        reducible,
    })
}

fn sampling_warnings(doc: &ConfigDocument, p: &PipelineParams) -> Vec<String> {
    let polys: Vec<Vec<Point>> = doc.configuration.objects.iter().map(|c| c.vertices().to_vec()).collect();
    let step = doc
        .configuration
        .objects
        .iter()
        .map(|c| c.perimeter() / p.skeleton.samples_per_boundary.max(1) as f64)
        .fold(f64::INFINITY, f64::min);
    validate_configuration(&polys, step)
        .into_iter()
        .filter(|d| d.severity != Severity::Info)
        .map(|d| match d.object {
            Some(i) => format!("object {}: {}", i + 1, d.message),
            None => d.message,
        })
        .collect()
}

/// Full pipeline on one input file.
pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<AnalyzeOutcome> {
    let (doc, spec, region) = load(&args.config, &args.bounding)?;
    let a = analyze(&doc.configuration, &region, &args.pipeline)?;
    let warnings = sampling_warnings(&doc, &args.pipeline);
    let mut volumes = vec![rounded_table(&a.volumes)];
    let mut closeness_r = vec![ClosenessReport::of(Source::Skeletal, &a.closeness)];
    let mut significance_r = vec![SignificanceReport::of(Source::Skeletal, &a.significance)];
    let mut oracle_disagreement = None;
    if let Some(res) = args.oracle_resolution {
        let params = OracleParams { theta_min: args.pipeline.skeleton.theta_min, parallelism: args.pipeline.parallelism, ..Default::default() };
        let grid = oracle::grid_labels(&doc.configuration, &region, res, &params)?;
        let t = oracle::oracle_volumes(&grid);
        oracle_disagreement = Some(sig6(oracle::max_relative_disagreement(&a.volumes, &t, 1e-9)));
        closeness_r.push(ClosenessReport::of(Source::Oracle, &closeness(&t)));
        significance_r.push(SignificanceReport::of(Source::Oracle, &significance(&t)));
        volumes.push(rounded_table(&t));
    }
    let proximity = proximity_report(args.variant, &a.volumes, args.variant.table(&a.closeness).clone(), Source::Skeletal)?;
    let g = build_tiered_graph(&a.closeness, &a.significance, args.variant);
    let graph = GraphReport::of(Source::Skeletal, &g, merge_sequence(&g));
    let ns = &a.nonsingularity;
    let report = AnalysisReport {
        tool: ToolInfo::default(),
        parameters: ReportParameters {
            pipeline: args.pipeline,
            bounding: spec,
            variant: args.variant,
            oracle_resolution: args.oracle_resolution,
        },
        configuration: doc.clone(),
        skeletons: a.skeletons.iter().map(|s| SkeletonStats::of(s, &a.assignment)).collect(),
        nonsingularity: NonsingularitySummary {
            source: Source::Skeletal,
            passes: ns.passes(),
            sides: ns.sides.len(),
            failures: ns.failures(),
            min_margin: ns.min_margin().map(sig6),
        },
        volumes,
        closeness: closeness_r,
        significance: significance_r,
        graph,
        oracle_disagreement,
        proximity,
    };
    let hypothesis = if !ns.passes() {
        Some(Error::Nonsingular(ns.failures()))
    } else {
        report.proximity.reducible.clone().map(Error::Reducible)
    };
    if let Some(p) = &args.output {
        write_file(p, &to_json(&report))?;
    }
    if let Some(p) = &args.text_output {
        write_file(p, &report::render_text(&report))?;
    }
    if let Some(p) = &args.structure {
        write_file(p, &to_json(&SerializedStructure::of(&doc, spec, &a)))?;
    }
    Ok(AnalyzeOutcome { report, analysis: a, hypothesis, warnings })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Renormalize {
    Vol,
    Lk,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightsArgs {
    pub input: PathBuf,
    /// Explicit object weights V.
    pub v: Option<Vec<f64>>,
    /// Use the v_vol or v_lk vector stored in the input.
    pub renormalize: Option<Renormalize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightsOutput {
    pub eigenvalue: f64,
    pub weights: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub v: Option<Vec<f64>>,
    pub renormalized: Option<Vec<f64>>,
}

impl WeightsOutput {
    pub fn text(&self) -> String {
        let f = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
        let mut o = format!(
            "lambda = {:.6}\nw = ({})\nresidual = {:.3e} after {} iterations\n",
            self.eigenvalue,
            f(&self.weights),
            self.residual,
            self.iterations
        );
        if let (Some(v), Some(r)) = (&self.v, &self.renormalized) {
            o += &format!("V = ({})\nw~ = ({})\n", f(v), f(r));
        }
        o
    }
}

fn numbers(v: &Value, what: &str) -> Result<Vec<f64>> {
    let a = v.as_array().ok_or_else(|| Error::Malformed(format!("{what} must be an array")))?;
    a.iter().map(|x| x.as_f64().ok_or_else(|| Error::Malformed(format!("{what} must hold numbers")))).collect()
}

fn matrix(v: &Value, what: &str) -> Result<Vec<Vec<f64>>> {
    let rows = v.as_array().ok_or_else(|| Error::Malformed(format!("{what} must be an array of rows")))?;
    rows.iter().map(|r| numbers(r, what)).collect()
}

/// Matrix and stored weight vectors from a bare array, a
/// `{"matrix", "v_vol", "v_lk"}` object or an analysis report.
fn weights_input(v: &Value) -> Result<(Vec<Vec<f64>>, Option<Vec<f64>>, Option<Vec<f64>>)> {
    if v.is_array() {
        return Ok((matrix(v, "matrix")?, None, None));
    }
    let src = v.get("proximity").unwrap_or(v);
    let m = src.get("matrix").ok_or_else(|| Error::Malformed("input has no matrix".into()))?;
    let vec_of = |k: &str| src.get(k).map(|x| numbers(x, k)).transpose();
    Ok((matrix(m, "matrix")?, vec_of("v_vol")?, vec_of("v_lk")?))
}

const SYMMETRY_TOLERANCE: f64 = 1e-9;

fn check_closeness_matrix(m: &[Vec<f64>]) -> Result<()> {
    let n = m.len();
    for (i, r) in m.iter().enumerate() {
        if r.len() != n {
            return Err(Error::Weights(format!("row {} has {} entries, expected {n}", i + 1, r.len())));
        }
        if (r[i] - 1.0).abs() > SYMMETRY_TOLERANCE {
            return Err(Error::Weights(format!("diagonal entry {} is {}, expected 1", i + 1, r[i])));
        }
        for j in 0..i {
            if (r[j] - m[j][i]).abs() > SYMMETRY_TOLERANCE {
                return Err(Error::Weights(format!("matrix is not symmetric at ({}, {})", i + 1, j + 1)));
            }
        }
    }
    Ok(())
}

/// Perron weights of a closeness matrix, optionally renormalized.
pub fn cmd_weights(args: &WeightsArgs) -> Result<WeightsOutput> {
    let (m, v_vol, v_lk) = weights_input(&parse_json(&args.input)?)?;
    check_closeness_matrix(&m)?;
    let p = ProximityMatrix::from_entries(m, Variant::C)?;
    let w = proximity_weights(&p)?;
    let v = match (&args.v, args.renormalize) {
        (Some(v), _) => Some(v.clone()),
        (None, Some(Renormalize::Vol)) => Some(v_vol.ok_or_else(|| Error::Argument("input has no v_vol".into()))?),
        (None, Some(Renormalize::Lk)) => Some(v_lk.ok_or_else(|| Error::Argument("input has no v_lk".into()))?),
        (None, None) => None,
    };
    let renormalized = v.as_ref().map(|v| renormalized_weights(&w.weights, v)).transpose()?;
    Ok(WeightsOutput { eigenvalue: w.eigenvalue, weights: w.weights, residual: w.residual, iterations: w.iterations, v, renormalized })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GraphArgs {
    pub input: PathBuf,
    pub edge_threshold: Option<f64>,
    pub vertex_threshold: Option<f64>,
    pub svg: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphOutput {
    pub graph: TieredGraph,
    pub edge_threshold: Option<f64>,
    pub vertex_threshold: Option<f64>,
    /// Components of the subgraph left by the thresholds given.
    pub subgraph: Subgraph,
}

impl GraphOutput {
    pub fn text(&self) -> String {
        let s = &self.subgraph;
        let mut o = String::new();
        if let Some(b) = self.edge_threshold {
            o += &format!("edge threshold {b}\n");
        }
        if let Some(a) = self.vertex_threshold {
            o += &format!("vertex threshold {a}\n");
        }
        o += &format!("components: {}\n", format_components(&s.components));
        let edges: Vec<String> = s.edges.iter().map(|e| format!("{}-{} ({:.3})", e.i + 1, e.j + 1, e.height)).collect();
        o += &format!("edges: {}\n", if edges.is_empty() { "none".to_string() } else { edges.join(", ") });
        o
    }
}

fn graph_input(v: &Value) -> Result<TieredGraph> {
    if v.get("graph").is_some() {
        let r: GraphReport = serde_json::from_value(v["graph"].clone()).map_err(|e| Error::Malformed(format!("graph: {e}")))?;
        return Ok(r.graph());
    }
    let m = v
        .get("closeness")
        .or_else(|| v.get("matrix"))
        .ok_or_else(|| Error::Malformed("input needs a graph, or a closeness matrix and significance".into()))?;
    let m = matrix(m, "closeness")?;
    let s = numbers(v.get("significance").ok_or_else(|| Error::Malformed("input has no significance".into()))?, "significance")?;
    let p = ProximityMatrix::from_entries(m, Variant::C)?;
    if s.len() != p.len() {
        return Err(Error::Malformed("significance length does not match the matrix".into()));
    }
    Ok(proximity_graph::tiered_graph_from(&p.entries, &s))
}

/// Threshold the tiered graph: edges need height at least `b`, vertices at
/// least `a`.
pub fn cmd_graph(args: &GraphArgs) -> Result<GraphOutput> {
    let g = graph_input(&parse_json(&args.input)?)?;
    let b = args.edge_threshold.unwrap_or(f64::NEG_INFINITY);
    let kept = TieredGraph { vertex_heights: g.vertex_heights.clone(), edges: g.edges.iter().copied().filter(|e| e.height >= b).collect() };
    let subgraph = vertex_threshold_subgraph(&kept, args.vertex_threshold.unwrap_or(f64::NEG_INFINITY));
    debug_assert!(args.vertex_threshold.is_some() || subgraph.components == edge_threshold_subgraph(&g, b));
    if let Some(p) = &args.svg {
        write_file(p, &graph_svg(&g, &subgraph))?;
    }
    Ok(GraphOutput { graph: g, edge_threshold: args.edge_threshold, vertex_threshold: args.vertex_threshold, subgraph })
}

/// Tiered graph with significance on the horizontal axis and each edge
/// drawn as a bar at its closeness height. Edges outside `kept` are faded.
pub fn graph_svg(g: &TieredGraph, kept: &Subgraph) -> String {
    let top = g.edges.iter().map(|e| e.height).fold(1.0f64, f64::max);
    let left = g.vertex_heights.iter().copied().fold(0.0f64, f64::min);
    let right = g.vertex_heights.iter().copied().fold(1.0f64, f64::max);
    let mut c = Canvas::new(pt(left - 0.05, -0.12), pt(right + 0.05, top + 0.05), 600.0);
    c.line(pt(left, 0.0), pt(right, 0.0), "#888", 1.0, "axis");
    for e in &g.edges {
        let on = kept.edges.iter().any(|k| (k.i, k.j) == (e.i, e.j));
        let (stroke, w) = if on { ("#d62728", 1.6) } else { ("#cccccc", 1.0) };
        let (xi, xj) = (g.vertex_heights[e.i], g.vertex_heights[e.j]);
        c.polyline(&[pt(xi, 0.0), pt(xi, e.height), pt(xj, e.height), pt(xj, 0.0)], stroke, w, "edge");
    }
    for (i, &s) in g.vertex_heights.iter().enumerate() {
        let fill = if kept.vertices.contains(&i) { colour(i) } else { "#cccccc" };
        c.dot(pt(s, 0.0), 4.0, fill);
        c.text(pt(s, -0.07), &format!("{}", i + 1), 12.0);
    }
    c.finish()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RenderArgs {
    pub input: PathBuf,
    pub out_dir: PathBuf,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RenderOutput {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

pub const LEVEL_TIMES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

struct Scene {
    doc: ConfigDocument,
    region: BoundingRegion,
    analysis: Option<Analysis>,
    graph: Option<TieredGraph>,
}

fn scene(v: &Value) -> Result<Option<Scene>> {
    if v.get("skeletons").and_then(|s| s.get(0)).and_then(|s| s.get("nodes")).is_some_and(Value::is_array) {
        let s: SerializedStructure = serde_json::from_value(v.clone()).map_err(|e| Error::Malformed(format!("structure: {e}")))?;
        let region = build_bounding_region(&s.configuration.configuration, &s.bounding)?;
        let a = Analysis::from_structure(s.skeletons, s.axis, s.assignment);
        return Ok(Some(Scene { doc: s.configuration, region, analysis: Some(a), graph: None }));
    }
    if v.get("configuration").is_some() && v.get("parameters").is_some() {
        let r: AnalysisReport = serde_json::from_value(v.clone()).map_err(|e| Error::Malformed(format!("report: {e}")))?;
        let region = build_bounding_region(&r.configuration.configuration, &r.parameters.bounding)?;
        // reports carry tables only; rebuild the geometry from the echoed input
        let a = analyze(&r.configuration.configuration, &region, &r.parameters.pipeline)?;
        return Ok(Some(Scene { doc: r.configuration, region, analysis: Some(a), graph: Some(r.graph.graph()) }));
    }
    Ok(None)
}

fn view(doc: &ConfigDocument, region: &BoundingRegion) -> (Point, Point) {
    let (lo, hi) = doc.configuration.bbox();
    let pad = 0.1 * (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
    let (mut lo, mut hi) = (lo - pt(pad, pad), hi + pt(pad, pad));
    if let Some(b) = &region.boundary {
        let (blo, bhi) = b.bbox();
        lo = pt(lo.x.min(blo.x), lo.y.min(blo.y));
        hi = pt(hi.x.max(bhi.x), hi.y.max(bhi.y));
    }
    (lo, hi)
}

fn base_canvas(doc: &ConfigDocument, region: &BoundingRegion, fill: f64) -> Canvas {
    let (lo, hi) = view(doc, region);
    let mut c = Canvas::new(lo, hi, 800.0);
    if let Some(b) = &region.boundary {
        c.polygon(b.vertices(), "none", 0.0, Some("#444"));
    }
    for obj in &doc.configuration.objects {
        c.polygon(obj.vertices(), "#999999", fill, Some("#222"));
    }
    c
}

fn closed(pts: &[Point]) -> Vec<Point> {
    let mut v = pts.to_vec();
    if let Some(&f) = pts.first() {
        v.push(f);
    }
    v
}

fn overlay_svg(s: &Scene, a: &Analysis) -> String {
    let mut c = base_canvas(&s.doc, &s.region, 0.25);
    for sk in &a.skeletons {
        for st in &sk.strata {
            let mut pts: Vec<Point> = Vec::with_capacity(st.elements.len() + 1);
            for &e in &st.elements {
                let el = &sk.elements[e];
                if pts.is_empty() {
                    pts.push(sk.nodes[el.a].position);
                }
                pts.push(sk.nodes[el.b].position);
            }
            c.polyline(&pts, "#1f77b4", 1.2, "skeleton");
        }
    }
    for st in &a.axis.strata {
        c.polyline(&st.points, "#d62728", 1.4, "linking-axis");
    }
    for &p in &a.axis.branch_points {
        c.dot(p, 3.0, "#d62728");
    }
    c.finish()
}

fn regions_svg(s: &Scene, a: &Analysis) -> String {
    let n = s.doc.configuration.len();
    let regions = extract_regions(&a.skeletons, &a.assignment);
    let mut c = base_canvas(&s.doc, &s.region, 0.0);
    // one hue per unordered pair, so both sides of a link match
    let hue = |i: usize, t: Target| match t {
        Target::Object(j) => colour(i.min(j) * n + i.max(j)),
        Target::SelfLink => colour(i * n + i),
        Target::Unbounded => "#dddddd",
    };
    for ((i, t), set) in &regions.regions {
        for q in &set.interior {
            c.polygon(q, hue(*i, *t), 0.75, None);
        }
        for q in &set.exterior {
            c.polygon(q, hue(*i, *t), 0.35, None);
        }
    }
    for obj in &s.doc.configuration.objects {
        c.polyline(&closed(obj.vertices()), "#222", 1.0, "object");
    }
    c.finish()
}

fn levels_svg(s: &Scene, a: &Analysis, warnings: &mut Vec<String>) -> String {
    let mut c = base_canvas(&s.doc, &s.region, 0.0);
    for (k, &t) in LEVEL_TIMES.iter().enumerate() {
        match level_set(&a.skeletons, &a.assignment, t) {
            Ok(ls) => {
                for curve in &ls.curves {
                    c.polyline(&closed(curve), colour(k), 1.0, &format!("level-{t}"));
                }
                if !ls.fold_overs.is_empty() {
                    warnings.push(format!("level set t = {t} has {} fold-overs", ls.fold_overs.len()));
                }
            }
            Err(e) => warnings.push(format!("level set t = {t}: {e}")),
        }
    }
    c.finish()
}

/// Draw overlay, region, level-set and graph figures into `out_dir`.
pub fn cmd_render(args: &RenderArgs) -> Result<RenderOutput> {
    let v = parse_json(&args.input)?;
    let mut out = RenderOutput::default();
    let emit = |name: &str, svg: String, out: &mut RenderOutput| -> Result<()> {
        let p = args.out_dir.join(name);
        write_file(&p, &svg)?;
        out.files.push(p);
        Ok(())
    };
    let Some(s) = scene(&v)? else {
        out.warnings.push("nothing to draw: input has no structure or configuration; writing an empty figure".into());
        emit("overlay.svg", Canvas::new(pt(0.0, 0.0), pt(1.0, 1.0), 200.0).finish(), &mut out)?;
        return Ok(out);
    };
    let a = s.analysis.as_ref().expect("scene carries an analysis");
    emit("overlay.svg", overlay_svg(&s, a), &mut out)?;
    emit("regions.svg", regions_svg(&s, a), &mut out)?;
    let mut warnings = Vec::new();
    emit("levels.svg", levels_svg(&s, a, &mut warnings), &mut out)?;
    let g = s.graph.clone().unwrap_or_else(|| build_tiered_graph(&a.closeness, &a.significance, Variant::C));
    let all = vertex_threshold_subgraph(&g, f64::NEG_INFINITY);
    emit("graph.svg", graph_svg(&g, &all), &mut out)?;
    out.warnings.extend(warnings);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleArgs {
    pub config: PathBuf,
    pub bounding: BoundingArgs,
    pub resolution: usize,
    pub params: OracleParams,
    pub raster: Option<PathBuf>,
    pub legend: Option<PathBuf>,
    pub output: Option<PathBuf>,
    /// Report to compare against.
    pub diff: Option<PathBuf>,
    /// Extra Monte-Carlo estimate with this many points.
    pub samples: Option<usize>,
    pub seed: u64,
}

impl OracleArgs {
    pub fn new(config: impl Into<PathBuf>, resolution: usize) -> OracleArgs {
        OracleArgs {
            config: config.into(),
            bounding: BoundingArgs::default(),
            resolution,
            params: OracleParams::default(),
            raster: None,
            legend: None,
            output: None,
            diff: None,
            samples: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffEntry {
    pub object: usize,
    pub target: Target,
    pub report_omega: f64,
    pub oracle_omega: f64,
    pub report_neighborhood: f64,
    pub oracle_neighborhood: f64,
    pub relative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleDiff {
    pub max_relative: f64,
    pub entries: Vec<DiffEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LegendEntry {
    pub code: u32,
    pub label: oracle::CellLabel,
    pub cells: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleOutput {
    pub tool: ToolInfo,
    pub resolution: usize,
    pub cell: f64,
    pub nx: usize,
    pub ny: usize,
    pub region_area: f64,
    pub volumes: VolumeTable,
    pub closeness: ClosenessReport,
    pub significance: SignificanceReport,
    pub sampled: Option<SampledVolumes>,
    pub diff: Option<OracleDiff>,
}

fn relative(a: f64, b: f64, floor: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m < floor {
        0.0
    } else {
        (a - b).abs() / m
    }
}

pub fn diff_tables(report: &VolumeTable, oracle: &VolumeTable) -> OracleDiff {
    let floor = 1e-9 * report.object_volumes.iter().chain(&oracle.object_volumes).fold(1.0f64, |m, &x| m.max(x));
    let mut keys: Vec<(usize, Target)> = report.rows.iter().chain(&oracle.rows).map(|r| (r.object, r.target)).collect();
    keys.sort();
    keys.dedup();
    let entries: Vec<DiffEntry> = keys
        .into_iter()
        .map(|(i, t)| {
            let (ro, oo) = (report.omega(i, t), oracle.omega(i, t));
            let (rn, on) = (report.neighborhood(i, t), oracle.neighborhood(i, t));
            DiffEntry {
                object: i,
                target: t,
                report_omega: ro,
                oracle_omega: oo,
                report_neighborhood: rn,
                oracle_neighborhood: on,
                relative: sig6(relative(ro, oo, floor).max(relative(rn, on, floor))),
            }
        })
        .collect();
    let max_relative = sig6(oracle::max_relative_disagreement(report, oracle, floor));
    OracleDiff { max_relative, entries }
}

pub fn legend(grid: &OracleGrid) -> Vec<LegendEntry> {
    let counts = grid.counts();
    grid.legend()
        .into_iter()
        .map(|(code, label)| LegendEntry {
            code,
            label,
            cells: counts.iter().find(|(l, _)| *l == label).map_or(0, |c| c.1),
        })
        .collect()
}

/// Grid oracle volumes, with optional raster, legend and report diff.
pub fn cmd_oracle(args: &OracleArgs) -> Result<(OracleOutput, OracleGrid)> {
    let (doc, _, region) = load(&args.config, &args.bounding)?;
    let grid = oracle::grid_labels(&doc.configuration, &region, args.resolution, &args.params)?;
    let table = oracle::oracle_volumes(&grid);
    let sampled = args
        .samples
        .map(|n| oracle::sampled_volumes(&doc.configuration, &region, n, args.seed, &args.params))
        .transpose()?;
    let diff = match &args.diff {
        Some(p) => {
            let v = parse_json(p)?;
            let r: AnalysisReport = serde_json::from_value(v).map_err(|e| Error::Malformed(format!("report: {e}")))?;
            let t = r.volume_table(Source::Skeletal).ok_or_else(|| Error::Malformed("report has no skeletal table".into()))?;
            Some(diff_tables(t, &table))
        }
        None => None,
    };
    if let Some(p) = &args.raster {
        grid.write_pgm(p)?;
    }
    if let Some(p) = &args.legend {
        write_file(p, &to_json(&legend(&grid)))?;
    }
    let out = OracleOutput {
        tool: ToolInfo::default(),
        resolution: grid.resolution,
        cell: grid.cell,
        nx: grid.nx,
        ny: grid.ny,
        region_area: sig6(oracle::oracle_region_area(&grid)),
        closeness: ClosenessReport::of(Source::Oracle, &closeness(&table)),
        significance: SignificanceReport::of(Source::Oracle, &significance(&table)),
        volumes: rounded_table(&table),
        sampled,
        diff,
    };
    if let Some(p) = &args.output {
        write_file(p, &to_json(&out))?;
    }
    Ok((out, grid))
}
