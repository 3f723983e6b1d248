use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use taskalloc::drd::{drd_step, initial_state, simulate, DrdConfig, InitStrategy};
use taskalloc::instances;
use taskalloc::lambda_solver::{breakpoints, solve_lambda};
use taskalloc::verify::{grid_min, kkt_check, monte_carlo_min, MULTIPLIER_TOL};
use taskalloc_bench::ring_instance;

fn bench_lambda(c: &mut Criterion) {
    let mut group = c.benchmark_group("solve_lambda");
    for n in [3usize, 100, 10_000] {
        for (name, exp) in [("quadratic", false), ("exponential", true)] {
            let p = ring_instance(n, exp);
            group.bench_with_input(BenchmarkId::new(name, n), &p, |b, p| {
                b.iter(|| solve_lambda(black_box(p)).unwrap())
            });
        }
    }
    group.finish();

    let p = ring_instance(1000, true);
    c.bench_function("breakpoints exponential 1000", |b| {
        b.iter(|| breakpoints(black_box(&p)).unwrap())
    });
    let w = solve_lambda(&p).unwrap().allocation;
    c.bench_function("kkt_check exponential 1000", |b| {
        b.iter(|| kkt_check(black_box(&p), black_box(&w), MULTIPLIER_TOL).unwrap())
    });
}

fn bench_drd(c: &mut Criterion) {
    let p = instances::fig2();
    let w = initial_state(&p, InitStrategy::Uniform);
    c.bench_function("drd_step fig2", |b| {
        b.iter(|| drd_step(black_box(&p), black_box(&w), 1e-4).unwrap())
    });

    let p = instances::fig3();
    let w0 = initial_state(&p, InitStrategy::Uniform);
    let cfg = DrdConfig {
        max_steps: 10_000,
        ..DrdConfig::with_step(1e-3)
    };
    c.bench_function("simulate fig3 10k steps", |b| {
        b.iter(|| simulate(black_box(&p), &w0, &cfg).unwrap())
    });
}

fn bench_oracles(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracles");
    group.sample_size(10);
    let tab1 = instances::tab1();
    group.bench_function("monte_carlo tab1 1e5", |b| {
        b.iter(|| monte_carlo_min(black_box(&tab1), 100_000, 1).unwrap())
    });
    let tab3 = instances::tab3();
    group.bench_function("grid tab3 0.5", |b| {
        b.iter(|| grid_min(black_box(&tab3), 0.5).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_lambda, bench_drd, bench_oracles);
criterion_main!(benches);
