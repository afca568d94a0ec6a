//! Parallel vs sequential kernel comparison.
//!
//! Benchmarks the right-hand-side evaluation and the exact-F edge
//! reconstruction through both execution paths, plus a short end-to-end
//! integration. Run with `cargo bench -p varwave`.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::rngs::StdRng;
use rand::SeedableRng;

use varwave::coefficients::{reconstruct_u, reconstruct_u_seq, Strategy};
use varwave::grid::Grid;
use varwave::initial::random_nonpositive_state;
use varwave::semidiscrete::{integrate, rhs, rhs_seq, IntegrateOptions};
use varwave::wavespeed::WaveSpeedModel;

fn bench_rhs(c: &mut Criterion) {
    let model = WaveSpeedModel::arctan();
    let mut group = c.benchmark_group("rhs");
    for n in [512usize, 4096, 32768] {
        let grid = Grid::new(-15.0, 15.0, n).unwrap();
        let mut rng = StdRng::seed_from_u64(1);
        let state = random_nonpositive_state(&mut rng, &grid, 2.0);
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, _| {
            b.iter(|| rhs(black_box(&state), &grid, &model, Strategy::ExactF).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, _| {
            b.iter(|| rhs_seq(black_box(&state), &grid, &model, Strategy::ExactF).unwrap())
        });
    }
    group.finish();
}

fn bench_reconstruct(c: &mut Criterion) {
    let model = WaveSpeedModel::arctan();
    let mut group = c.benchmark_group("reconstruct_exact_f");
    for n in [512usize, 4096, 32768] {
        let grid = Grid::new(-15.0, 15.0, n).unwrap();
        let mut rng = StdRng::seed_from_u64(2);
        let state = random_nonpositive_state(&mut rng, &grid, 2.0);
        group.bench_with_input(BenchmarkId::new("parallel", n), &n, |b, _| {
            b.iter(|| {
                reconstruct_u(Strategy::ExactF, &model, black_box(&state), &grid, 0.0).unwrap()
            })
        });
        group.bench_with_input(BenchmarkId::new("sequential", n), &n, |b, _| {
            b.iter(|| {
                reconstruct_u_seq(Strategy::ExactF, &model, black_box(&state), &grid, 0.0).unwrap()
            })
        });
    }
    group.finish();
}

fn bench_integrate(c: &mut Criterion) {
    let model = WaveSpeedModel::arctan();
    let grid = Grid::new(-15.0, 15.0, 1024).unwrap();
    let r = grid.project_cell_averages(|x: f64| -2.0 * (-(x - 5.0) * (x - 5.0)).exp());
    let s = grid.project_cell_averages(|x: f64| -2.0 * (-(x + 5.0) * (x + 5.0)).exp());
    let state = varwave::StateRS::new(0.0, r, s);
    c.bench_function("integrate_rk4_n1024_t0.1", |b| {
        b.iter(|| {
            integrate(
                black_box(&state),
                0.1,
                &grid,
                &model,
                &IntegrateOptions::default(),
            )
            .unwrap()
        })
    });
}

criterion_group!(benches, bench_rhs, bench_reconstruct, bench_integrate);
criterion_main!(benches);
