use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use photonq::{
    exp_coefficients, make_optimal_pulse, quadrature_coefficients, solve_coefficients,
    solve_hierarchy, uniform_grid, ExpParams, PhotonProfile, PhysParams, QubitState, SolverConfig,
    C64,
};

fn params() -> PhysParams {
    PhysParams::new(1.0, 1.0, 1.5).unwrap()
}

fn dynamics(c: &mut Criterion) {
    let p = params();
    let grid = uniform_grid(15.0, 1501);
    let cfg = SolverConfig::default();
    let exp = PhotonProfile::exponential(1.5, &p).unwrap();
    let rho0 = QubitState::new(0.5, C64::new(0.3, -0.1)).unwrap();

    c.bench_function("solve_coefficients exp", |b| {
        b.iter(|| solve_coefficients(black_box(&p), &exp, &grid, &cfg).unwrap())
    });
    c.bench_function("solve_hierarchy exp", |b| {
        b.iter(|| solve_hierarchy(black_box(&rho0), &p, &exp, &grid, &cfg).unwrap())
    });
    c.bench_function("quadrature_coefficients exp 301", |b| {
        let coarse = uniform_grid(15.0, 301);
        b.iter(|| quadrature_coefficients(black_box(&p), &exp, &coarse, 1e-10).unwrap())
    });
    c.bench_function("exp_coefficients 1501", |b| {
        let e = ExpParams::new(p, 1.5).unwrap();
        b.iter(|| {
            grid.iter()
                .map(|&t| exp_coefficients(black_box(t), &e).b)
                .sum::<f64>()
        })
    });

    let optimal = make_optimal_pulse(3.0, &p).unwrap();
    c.bench_function("solve_coefficients optimal", |b| {
        b.iter(|| solve_coefficients(black_box(&p), &optimal, &grid, &cfg).unwrap())
    });
}

criterion_group!(benches, dynamics);
criterion_main!(benches);
