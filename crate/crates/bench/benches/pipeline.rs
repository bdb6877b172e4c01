use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use planogram_bench::{aisle_window, noisy_scene, zncc_for};
use planogram_core::builder::{build_observed, BuilderParams};
use planogram_core::iso::{solve, SolverParams};
use planogram_core::pipeline::{run_pipeline, PipelineParams};
use planogram_core::verify::OracleMatcher;
use planogram_core::ShelfGraph;
use std::hint::black_box;

fn isomorphism(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve");
    for cols in [4usize, 25, 50] {
        let (aisle, observed) = aisle_window(4, cols, 3, 0, 4);
        g.bench_with_input(BenchmarkId::new("12_vs_aisle", aisle.len()), &(aisle, observed), |b, (a, o)| {
            b.iter(|| solve(black_box(a), black_box(o), &SolverParams::default()).unwrap())
        });
    }
    let (aisle, observed) = aisle_window(4, 25, 3, 10, 4);
    g.bench_function("no_pruning_12_vs_100", |b| {
        let p = SolverParams { pruning: false, ..SolverParams::default() };
        b.iter(|| solve(&aisle, &observed, &p).unwrap())
    });
    g.finish();
}

fn stages(c: &mut Criterion) {
    let scene = noisy_scene();
    c.bench_function("build_observed", |b| {
        b.iter(|| build_observed(black_box(&scene.detections), &BuilderParams::default()).unwrap())
    });

    let refs = std::slice::from_ref(&scene.truth.planogram);
    let oracle = OracleMatcher::from_scene(&scene.truth);
    c.bench_function("pipeline_oracle", |b| b.iter(|| run_pipeline(refs, &scene.detections, &oracle, &PipelineParams::default()).unwrap()));

    let zncc = zncc_for(&scene);
    let mut g = c.benchmark_group("slow");
    g.sample_size(10);
    g.bench_function("pipeline_zncc", |b| b.iter(|| run_pipeline(refs, &scene.detections, &zncc, &PipelineParams::default()).unwrap()));
    g.finish();
}

criterion_group!(benches, isomorphism, stages);
criterion_main!(benches);
