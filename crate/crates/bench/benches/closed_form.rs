use std::f64::consts::TAU;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use netsense_bench::{gravimetry, phases};
use netsense_core::dynamics::evolve;
use netsense_core::entanglement::{linear_entropy_closed, linear_entropy_from_state};
use netsense_core::estimation::{qfim_analytic, qfim_inverse};

fn dynamics(c: &mut Criterion) {
    let mut group = c.benchmark_group("evolve");
    for n in [3, 10, 30] {
        let cfg = gravimetry(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &cfg, |b, cfg| b.iter(|| evolve(cfg, black_box(1.3))));
    }
    group.finish();
}

fn entropy(c: &mut Criterion) {
    let mut group = c.benchmark_group("linear_entropy");
    for n in [3, 10, 30] {
        let cfg = gravimetry(n);
        let state = evolve(&cfg, 2.0);
        group.bench_with_input(BenchmarkId::new("closed", n), &cfg, |b, cfg| {
            b.iter(|| linear_entropy_closed(cfg, black_box(2.0)))
        });
        group.bench_with_input(BenchmarkId::new("gram", n), &state, |b, s| b.iter(|| linear_entropy_from_state(s)));
    }
    group.finish();
    c.bench_function("linear_entropy/closed_at_2pi", |b| {
        let cfg = gravimetry(10);
        b.iter(|| linear_entropy_closed(&cfg, black_box(TAU)))
    });
}

fn fisher(c: &mut Criterion) {
    let mut group = c.benchmark_group("qfim");
    for n in [3, 20, 100] {
        let ph = phases(n);
        group.bench_with_input(BenchmarkId::new("analytic", n), &ph, |b, ph| b.iter(|| qfim_analytic(ph).unwrap()));
        group.bench_with_input(BenchmarkId::new("sherman_morrison", n), &ph, |b, ph| {
            b.iter(|| qfim_inverse(ph).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("cholesky", n), &qfim_analytic(&ph).unwrap(), |b, q| {
            b.iter(|| q.inverse().unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, dynamics, entropy, fisher);
criterion_main!(benches);
