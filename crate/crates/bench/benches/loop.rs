use std::hint::black_box;

use aan_bench::{seeded_optimizer, warmed_simulation};
use aan_core::optimizer::{optimize_hyperparams, HyperBounds};
use aan_core::{run_episode, AoConfig, OscillatorState};
use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};

fn ao_step(c: &mut Criterion) {
    let cfg = AoConfig::default();
    let mut ao = OscillatorState::new(&cfg);
    let mut t = 0.0f64;
    c.bench_function("ao_step", |b| {
        b.iter(|| {
            t += cfg.dt;
            let theta = 20.0 * (5.7 * t).sin() + 4.0 * (11.4 * t).cos();
            black_box(ao.step(black_box(theta), &cfg).unwrap())
        })
    });
}

fn gp(c: &mut Criterion) {
    let mut group = c.benchmark_group("gp");
    for n in [5, 15, 30] {
        let bo = seeded_optimizer(n);
        group.bench_with_input(BenchmarkId::new("hyper_fit", n), &bo, |b, bo| {
            b.iter(|| black_box(optimize_hyperparams(&bo.model, &HyperBounds::default())))
        });
        group.bench_with_input(BenchmarkId::new("suggest", n), &bo, |b, bo| {
            b.iter_batched(|| bo.clone(), |mut bo| black_box(bo.suggest().unwrap()), BatchSize::SmallInput)
        });
    }
    group.finish();
}

fn episode(c: &mut Criterion) {
    let sim = warmed_simulation(7);
    let gains = sim.cfg.protocol.default_gains;
    let mut group = c.benchmark_group("closed_loop");
    group.sample_size(10);
    group.bench_function("episode", |b| {
        b.iter_batched(|| sim.clone(), |mut s| black_box(run_episode(&mut s, gains).unwrap()), BatchSize::LargeInput)
    });
    group.finish();
}

criterion_group!(benches, ao_step, gp, episode);
criterion_main!(benches);
