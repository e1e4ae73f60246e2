use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use homophily_bench::fixture;
use homophily_core::matrix::sherman_morrison;
use homophily_core::oracle::{enumerate_colorings, matching_tail};
use homophily_core::{covariance_structure, homophilic_counts, IndexOptions, IndexReport, MomentSummary, Profile};

fn analyze(c: &mut Criterion) {
    let mut group = c.benchmark_group("analyze");
    group.sample_size(20);
    for m in [50_000usize, 100_000, 200_000] {
        let (g, f) = fixture(20_000, m, 20, 7);
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, _| {
            b.iter(|| {
                let s = g.summarize();
                let ms = MomentSummary::compute(&s, f.profile());
                let cs = covariance_structure(&s, f.profile(), &ms);
                black_box(IndexReport::compute(&g, &f, &s, &ms, &cs, &IndexOptions::default()))
            })
        });
    }
    group.finish();
}

fn counts(c: &mut Criterion) {
    let (g, f) = fixture(200_000, 1_000_000, 20, 3);
    c.bench_function("homophilic_counts/1e6", |b| b.iter(|| black_box(homophilic_counts(&g, &f))));
}

fn moments(c: &mut Criterion) {
    let mut group = c.benchmark_group("moments");
    for classes in [5usize, 20, 50] {
        let (g, f) = fixture(40 * classes, 320 * classes, classes, 5);
        let s = g.summarize();
        let p = f.profile();
        group.bench_with_input(BenchmarkId::from_parameter(classes), &classes, |b, _| {
            b.iter(|| {
                let ms = MomentSummary::compute(&s, p);
                black_box(covariance_structure(&s, p, &ms))
            })
        });
    }
    group.finish();
}

fn rank_one_inverse(c: &mut Criterion) {
    let mut group = c.benchmark_group("sherman_morrison");
    for dim in [10usize, 50, 200] {
        let q: Vec<f64> = (0..dim).map(|i| 1.0 + i as f64 * 0.1).collect();
        let u: Vec<f64> = (0..dim).map(|i| 0.5 + (i % 7) as f64).collect();
        group.bench_with_input(BenchmarkId::from_parameter(dim), &dim, |b, _| {
            b.iter(|| black_box(sherman_morrison(&q, -1e-3, &u, 1e-12, 1e-12)))
        });
    }
    group.finish();
}

fn enumeration(c: &mut Criterion) {
    let (g, _) = fixture(10, 20, 2, 9);
    let p = Profile::new(vec![4, 3, 3]).unwrap();
    c.bench_function("enumerate_colorings/4200", |b| {
        b.iter(|| black_box(enumerate_colorings(&g, &p, 1_000_000).unwrap()))
    });
}

fn toy_tail(c: &mut Criterion) {
    c.bench_function("matching_tail/500", |b| b.iter(|| black_box(matching_tail(500, 110).unwrap())));
}

criterion_group!(benches, analyze, counts, moments, rank_one_inverse, enumeration, toy_tail);
criterion_main!(benches);
