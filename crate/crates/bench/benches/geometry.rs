//! Hot-path timings: jet evaluation, pointwise geometry assembly,
//! curvature, and the full diagnostic suite on small charts.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use igeo_core::{
    families, geometry_at, riemann, run_suite, sample_box, SamplePlan, ScalarField, SuiteConfig,
};

fn bench_jets(c: &mut Criterion) {
    let field = ScalarField::parse(
        "exp(t1) * sin(t2) + t3^3 / (2 + cos(t1 * t2)) + log(2 + t3)",
        3,
    )
    .unwrap();
    let p = [0.3, -0.7, 0.42];
    c.bench_function("jet2_transcendental_dim3", |b| {
        b.iter(|| field.eval_jet2(black_box(&p)).unwrap())
    });
}

fn bench_geometry(c: &mut Criterion) {
    let mut group = c.benchmark_group("geometry_at");
    for dim in [2usize, 3, 4] {
        let spec = families::random_spec(dim, 11, 2, 0.4);
        let p = sample_box(spec.domain(), SamplePlan::new(1, 0)).remove(0);
        group.bench_with_input(BenchmarkId::from_parameter(dim), &dim, |b, _| {
            b.iter(|| geometry_at(black_box(&spec), black_box(&p)).unwrap())
        });
    }
    group.finish();
}

fn bench_curvature(c: &mut Criterion) {
    let mut group = c.benchmark_group("riemann");
    for dim in [2usize, 3, 4] {
        let spec = families::random_spec(dim, 11, 2, 0.4);
        let p = sample_box(spec.domain(), SamplePlan::new(1, 0)).remove(0);
        let geo = geometry_at(&spec, &p).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(dim), &dim, |b, _| {
            b.iter(|| riemann(black_box(&geo), black_box(0.7)))
        });
    }
    group.finish();
}

fn bench_suite(c: &mut Criterion) {
    let sphere = families::sphere_chart();
    let cfg = SuiteConfig {
        points: 50,
        ..SuiteConfig::default()
    };
    c.bench_function("run_suite_sphere_50pts", |b| {
        b.iter(|| run_suite(black_box(&sphere), black_box(&cfg)).unwrap())
    });
}

criterion_group!(benches, bench_jets, bench_geometry, bench_curvature, bench_suite);
criterion_main!(benches);
