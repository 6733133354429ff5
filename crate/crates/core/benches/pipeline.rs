use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use skelink_core::config_model::build_bounding_region;
use skelink_core::fixtures;
use skelink_core::invariants::threshold_family;
use skelink_core::linking::compute_linking_axis;
use skelink_core::oracle::{grid_labels, OracleParams};
use skelink_core::par::Parallelism;
use skelink_core::pipeline::{compute_skeletons, PipelineParams};

const MODES: [(&str, Parallelism); 2] = [("sequential", Parallelism::Sequential), ("parallel", Parallelism::Auto)];

fn params(mode: Parallelism) -> PipelineParams {
    match mode {
        Parallelism::Sequential => PipelineParams::default().sequential(),
        Parallelism::Auto => PipelineParams::default(),
    }
}

fn oracle_grid(c: &mut Criterion) {
    let f = fixtures::three_objects();
    let region = build_bounding_region(&f.configuration, &f.bounding).unwrap();
    let mut g = c.benchmark_group("oracle_grid_1024");
    g.sample_size(10);
    for (name, mode) in MODES {
        let p = OracleParams { parallelism: mode, ..Default::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| grid_labels(&f.configuration, &region, 1024, &p).unwrap())
        });
    }
    g.finish();
}

fn per_node_linking(c: &mut Criterion) {
    let f = fixtures::three_objects();
    let region = build_bounding_region(&f.configuration, &f.bounding).unwrap();
    let skeletons = compute_skeletons(&f.configuration, &PipelineParams::with_samples(2048)).unwrap();
    let mut g = c.benchmark_group("linking_2048_samples");
    for (name, mode) in MODES {
        let lp = params(mode).linking();
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| compute_linking_axis(&f.configuration, &skeletons, &region, &lp).unwrap())
        });
    }
    g.finish();
}

fn thresholds(c: &mut Criterion) {
    let f = fixtures::two_squares();
    let region = build_bounding_region(&f.configuration, &f.bounding).unwrap();
    let taus: Vec<f64> = (1..=16).map(|k| 0.25 * k as f64).collect();
    let mut g = c.benchmark_group("threshold_family_16");
    g.sample_size(20);
    for (name, mode) in MODES {
        let p = params(mode);
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| threshold_family(&f.configuration, &region, &taus, &p).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, oracle_grid, per_node_linking, thresholds);
criterion_main!(benches);
