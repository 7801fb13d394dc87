use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mwvar::estimators::analyze;
use mwvar::oracle::brute_estimators;
use mwvar::rank_core::rank_tables;
use mwvar::TwoSample;
use rand::{Rng, SeedableRng};
use rand::rngs::StdRng;

fn tied_sample(n: usize, seed: u64) -> TwoSample {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut group = |shift: u32| (0..n).map(|_| f64::from(rng.random_range(0..10u32) + shift)).collect();
    let g1 = group(0);
    let g2 = group(2);
    TwoSample::new(g1, g2).unwrap()
}

fn ranking(c: &mut Criterion) {
    let mut g = c.benchmark_group("rank_tables");
    for n in [10, 100, 1_000, 10_000] {
        let s = tied_sample(n, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &s, |b, s| b.iter(|| rank_tables(s)));
    }
    g.finish();
}

fn estimation(c: &mut Criterion) {
    let mut g = c.benchmark_group("analyze");
    for n in [10, 100, 1_000, 10_000, 100_000] {
        let s = tied_sample(n, 2);
        g.bench_with_input(BenchmarkId::from_parameter(n), &s, |b, s| b.iter(|| analyze(s).unwrap()));
    }
    g.finish();
}

fn rank_vs_brute(c: &mut Criterion) {
    let mut g = c.benchmark_group("rank_vs_brute");
    for n in [5, 10, 20] {
        let s = tied_sample(n, 3);
        g.bench_with_input(BenchmarkId::new("rank", n), &s, |b, s| b.iter(|| analyze(s).unwrap()));
        g.bench_with_input(BenchmarkId::new("brute", n), &s, |b, s| b.iter(|| brute_estimators(s).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, ranking, estimation, rank_vs_brute);
criterion_main!(benches);
