use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ezgames_core::equilibrium::{nash_environment, solve_nash_uncertified};
use ezgames_core::{
    deviation_scan, solve_bernoulli, solve_bernoulli_rk4, solve_mfge, solve_nash, AgentType,
    BernoulliProblem, DeviationGrid, Horizon, NPlayerGame, TypeDistribution,
};
use std::hint::black_box;

fn agent(i: usize) -> AgentType {
    let s = i as f64;
    AgentType {
        x0: 1.0 + 0.1 * s,
        mu: 0.05 + 0.005 * s,
        nu: 0.1,
        sigma: 0.2,
        eta: 0.1,
        gamma: 2.0 + 0.25 * s,
        delta: 1.5,
        epsilon: 1.0,
        theta: 0.5,
    }
}

fn bernoulli(c: &mut Criterion) {
    let mut group = c.benchmark_group("bernoulli");
    for grid_n in [1_000, 10_000] {
        let horizon = Horizon::new(5.0, grid_n).unwrap();
        let phi = horizon.sample(|t| -0.3 + 0.05 * t);
        let psi = horizon.sample(|t| 0.2 * (1.0 + t).ln());
        let p = BernoulliProblem::new(-0.5, phi, psi, horizon).unwrap();
        group.bench_with_input(BenchmarkId::new("closed_form", grid_n), &p, |b, p| {
            b.iter(|| solve_bernoulli(black_box(p)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("rk4", grid_n), &p, |b, p| {
            b.iter(|| solve_bernoulli_rk4(black_box(p)).unwrap())
        });
    }
    group.finish();
}

fn equilibria(c: &mut Criterion) {
    let horizon = Horizon::new(1.0, 1000).unwrap();
    let mut group = c.benchmark_group("equilibrium");
    for n in [2, 10, 100] {
        let game = NPlayerGame::new((0..n).map(|i| agent(i % 5)).collect(), horizon).unwrap();
        group.bench_with_input(BenchmarkId::new("nash", n), &game, |b, g| {
            b.iter(|| solve_nash(black_box(g)).unwrap())
        });
    }
    let dist = TypeDistribution::new((0..5).map(|i| (0.2, agent(i))).collect()).unwrap();
    group
        .bench_function("mean_field_5_atoms", |b| b.iter(|| solve_mfge(black_box(&dist), &horizon).unwrap()));
    group.finish();
}

fn deviations(c: &mut Criterion) {
    let horizon = Horizon::new(1.0, 400).unwrap();
    let game = NPlayerGame::new((0..3).map(agent).collect(), horizon).unwrap();
    let report = solve_nash_uncertified(&game).unwrap();
    let ctx = nash_environment(&game, &report, 0).unwrap();
    let grid = DeviationGrid::default();
    c.bench_function("deviation_scan_21x21", |b| {
        b.iter(|| deviation_scan(black_box(&ctx), &report.strategies[0], &grid).unwrap())
    });
}

criterion_group!(benches, bernoulli, equilibria, deviations);
criterion_main!(benches);
