use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use rmf_core::chaos::{estimate_moment, SamplerConfig};
use rmf_core::dirichlet::DirichletGrid;
use rmf_core::moments::{energy_fast, fourth_moment_homog_identity, DEFAULT_PAIR_BUDGET};
use rmf_core::sathe::PhiEvaluator;
use rmf_core::sieve::FactorSieve;

fn sieve(c: &mut Criterion) {
    let mut g = c.benchmark_group("sieve");
    for n in [100_000usize, 1_000_000] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| FactorSieve::new(black_box(n)).unwrap())
        });
    }
    g.finish();
}

fn energy(c: &mut Criterion) {
    let s = FactorSieve::new(1 << 20).unwrap();
    let mut g = c.benchmark_group("energy_fast");
    for n in [1usize << 14, 1 << 20] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| energy_fast(black_box(n), &s).unwrap())
        });
    }
    g.finish();
}

fn homogeneous(c: &mut Criterion) {
    let t = FactorSieve::new(10_000).unwrap().count_table();
    c.bench_function("homog_identity/N=10000,m=3", |b| {
        b.iter(|| {
            fourth_moment_homog_identity(black_box(10_000), 3, &t, DEFAULT_PAIR_BUDGET).unwrap()
        })
    });
}

fn phi(c: &mut Criterion) {
    let ev = PhiEvaluator::new(1_000_000).unwrap();
    c.bench_function("phi/z=0.5", |b| b.iter(|| ev.phi(black_box(0.5)).unwrap()));
}

fn monte_carlo(c: &mut Criterion) {
    let s = FactorSieve::new(1000).unwrap();
    let cfg = SamplerConfig::steinhaus(1000, 1, 1000);
    c.bench_function("mc/N=1000,1000 samples", |b| {
        b.iter(|| estimate_moment(black_box(&cfg), &s, 1.0, None).unwrap())
    });
}

fn dirichlet(c: &mut Criterion) {
    let grid = DirichletGrid::new(100, 1e4).unwrap();
    c.bench_function("dirichlet/N=100,T=1e4", |b| {
        b.iter(|| black_box(&grid).time_average_moment(2.0).unwrap())
    });
}

criterion_group!(
    benches,
    sieve,
    energy,
    homogeneous,
    phi,
    monte_carlo,
    dirichlet
);
criterion_main!(benches);
