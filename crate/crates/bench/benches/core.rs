use std::hint::black_box;

use cmc_core::{
    admissible, classify, find_positive_roots, integrate_frame, integrate_profile, pick_frame,
    sweep, verify, ImmersionOptions, ImmersionSpec, IntegrationOptions, ProfileParams, SignCase,
    SpaceFormSpec, VerifyPlan,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn two_wells() -> ProfileParams {
    ProfileParams::new(4, -1, 1, 1, -0.9, -1.15).unwrap()
}

fn bench_roots(c: &mut Criterion) {
    let p = two_wells();
    c.bench_function("find_positive_roots", |b| {
        b.iter(|| find_positive_roots(black_box(&p)))
    });
    c.bench_function("classify", |b| b.iter(|| classify(black_box(&p))));
    c.bench_function("admissible", |b| {
        b.iter(|| admissible(SignCase::HypLike, 4, black_box(-0.9), black_box(-1.15)))
    });
}

fn bench_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    for side in [16usize, 64] {
        group.bench_with_input(BenchmarkId::from_parameter(side), &side, |b, &side| {
            b.iter(|| {
                sweep(
                    SignCase::DeSitterLike,
                    4,
                    (-3.0, 3.0),
                    (-2.0, 2.0),
                    (side, side),
                )
                .unwrap()
            })
        });
    }
    group.finish();
}

fn bench_integrate(c: &mut Criterion) {
    let p = two_wells();
    let opts = IntegrationOptions::default();
    c.bench_function("integrate_profile/t20", |b| {
        b.iter(|| integrate_profile(black_box(&p), 1.2, &opts).unwrap())
    });
    let sol = integrate_profile(&p, 1.2, &opts).unwrap();
    let space = SpaceFormSpec::new(4, 0, -1).unwrap();
    let vectors = pick_frame(&space, &p.signs()).unwrap();
    c.bench_function("integrate_frame/t20", |b| {
        b.iter(|| integrate_frame(&p, black_box(&sol), &vectors, &Default::default()).unwrap())
    });
}

fn bench_verify(c: &mut Criterion) {
    let p = two_wells();
    let spec = ImmersionSpec::build(&p, 1.2, &ImmersionOptions::default()).unwrap();
    let plan = VerifyPlan::spread(&spec, 4, 8, 1e-4);
    let mut group = c.benchmark_group("verify");
    group.sample_size(20);
    group.bench_function("4x8", |b| {
        b.iter(|| verify(black_box(&spec), &plan).unwrap())
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_roots,
    bench_sweep,
    bench_integrate,
    bench_verify
);
criterion_main!(benches);
