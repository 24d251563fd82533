//! Sequential vs. thread-pool benchmarks for the data-parallel inner
//! loops: the approximation grid, extreme-equilibrium enumeration, and
//! the brute-force oracle.

use bilinear_games::fptas::fptas_absolute;
use bilinear_games::gen::{
    random_game, random_positive_rank_k, rng_from_seed, StrategySet,
};
use bilinear_games::lowrank::enumerate_extreme_equilibria;
use bilinear_games::oracle::brute_force_equilibria;
use bilinear_games::par::Parallelism;
use bilinear_games::rational::ratio;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

const MODES: [(&str, Parallelism); 2] = [
    ("sequential", Parallelism::Sequential),
    ("threads", Parallelism::Threads(None)),
];

fn bench_fptas_grid(c: &mut Criterion) {
    let g = random_positive_rank_k(&mut rng_from_seed(42), 3, 3, 2, 2);
    let eps = ratio(1, 2);
    let mut group = c.benchmark_group("fptas_absolute_3x3_rank2");
    for (name, par) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &par, |b, &par| {
            b.iter(|| fptas_absolute(&g, &eps, par).expect("solvable"));
        });
    }
    group.finish();
}

fn bench_enumeration(c: &mut Criterion) {
    let g = random_game(
        &mut rng_from_seed(7),
        4,
        4,
        5,
        StrategySet::Simplex,
        StrategySet::Simplex,
    );
    let mut group = c.benchmark_group("enumerate_extreme_4x4");
    for (name, par) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &par, |b, &par| {
            b.iter(|| enumerate_extreme_equilibria(&g, par).expect("enumerable"));
        });
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let g = random_game(
        &mut rng_from_seed(9),
        4,
        4,
        5,
        StrategySet::Simplex,
        StrategySet::Simplex,
    );
    let mut group = c.benchmark_group("oracle_4x4");
    for (name, par) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &par, |b, &par| {
            b.iter(|| brute_force_equilibria(&g, par).expect("small enough"));
        });
    }
    group.finish();
}

criterion_group! {
    name = solvers;
    config = Criterion::default().sample_size(10);
    targets = bench_fptas_grid, bench_enumeration, bench_oracle
}
criterion_main!(solvers);
