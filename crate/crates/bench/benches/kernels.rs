use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use crowdgame_core::ess::{is_ess, Mode};
use crowdgame_core::game::{FloatParams, Params};
use crowdgame_core::markov::{stationary_exact_small, FloatKernel, PairPayoffs};
use crowdgame_core::replicator::{integrate_counting, payoff_matrix, IntegratorConfig};
use crowdgame_core::strategy::{catalog, uncond_ca, StrategyIndex};

fn exact_stationary(c: &mut Criterion) {
    let (a, b) = (catalog(14).index(), catalog(16).index());
    c.bench_function("exact stationary solve (14 vs 16)", |bch| {
        bch.iter(|| stationary_exact_small(black_box(a), black_box(b)).unwrap())
    });
    c.bench_function("symbolic pair payoffs (14 vs 16)", |bch| {
        bch.iter(|| PairPayoffs::compute(black_box(a), black_box(b)).unwrap())
    });
}

fn float_stationary(c: &mut Criterion) {
    let kernel = FloatKernel::new(1e-3);
    let (a, b) = (
        catalog(12).index().strategy(),
        StrategyIndex::new(3001).unwrap().strategy(),
    );
    c.bench_function("float stationary solve", |bch| {
        bch.iter(|| kernel.stationary(black_box(&a), black_box(&b)).unwrap())
    });
}

fn single_ess_test(c: &mut Criterion) {
    let p = Params::ratio(3, 5, 3, 10).unwrap();
    let mut g = c.benchmark_group("ess test of strategy 13");
    g.sample_size(10);
    g.bench_function("screen", |bch| {
        bch.iter(|| is_ess(catalog(13).index(), black_box(&p), Mode::Screen).unwrap())
    });
    g.finish();
}

fn replicator(c: &mut Criterion) {
    let fp = FloatParams::new(0.4, 0.25, 1e-3).unwrap();
    let pi = payoff_matrix(
        &[uncond_ca(), catalog(12).index(), catalog(14).index()],
        &fp,
    )
    .unwrap();
    let cfg = IntegratorConfig::default();
    c.bench_function("trajectory to absorption", |bch| {
        bch.iter(|| integrate_counting(black_box(&[0.3, 0.3, 0.4]), &pi, &cfg).unwrap())
    });
}

criterion_group!(
    benches,
    exact_stationary,
    float_stationary,
    single_ess_test,
    replicator
);
criterion_main!(benches);
