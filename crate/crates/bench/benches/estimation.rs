use criterion::{criterion_group, criterion_main, Criterion};
use netsense_bench::{gravimetry, phases};
use netsense_core::measurement::{cfim, gram_schmidt_basis};
use netsense_core::sampler::{sample_outcomes, saturation_experiment, SaturationOptions};
use netsense_core::Case;

fn measurement(c: &mut Criterion) {
    let ph = phases(6);
    let refs: Vec<f64> = ph.phis().iter().map(|p| p + 0.1).collect();
    let basis = gram_schmidt_basis(6, ph.betas(), &refs).unwrap();
    c.bench_function("gram_schmidt/n6", |b| b.iter(|| gram_schmidt_basis(6, ph.betas(), &refs).unwrap()));
    c.bench_function("cfim/n6", |b| b.iter(|| cfim(&basis, &ph, 1e-5).unwrap()));
}

fn monte_carlo(c: &mut Criterion) {
    c.bench_function("multinomial/1e5_shots", |b| {
        b.iter(|| sample_outcomes(&[0.2, 0.3, 0.5], 100_000, 1).unwrap())
    });
    let mut group = c.benchmark_group("saturation");
    group.sample_size(10);
    let cfg = gravimetry(3);
    group.bench_function("n3_mu1e4_100_trials", |b| {
        b.iter(|| saturation_experiment(&cfg, Case::Case1, 10_000, 100, 7, SaturationOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, measurement, monte_carlo);
criterion_main!(benches);
