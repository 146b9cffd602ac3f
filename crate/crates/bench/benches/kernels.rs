use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use quermass_bench::{grid, inverse_state, surface};
use quermass_core::{flows, geometry, harmonics, spheregrid, symfun};

fn symmetric_functions(c: &mut Criterion) {
    let lambda: Vec<f64> = (0..8).map(|i| 0.3 + 0.17 * i as f64).collect();
    c.bench_function("sigma_all n=8", |b| b.iter(|| symfun::sigma_all(black_box(&lambda))));
}

fn grid_kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("grid");
    for n_lat in [32, 64] {
        let gr = grid(n_lat);
        let m = surface(&gr);
        let lmax = harmonics::default_lmax(&gr);
        g.bench_with_input(BenchmarkId::new("analyze", n_lat), &m, |b, m| {
            b.iter(|| harmonics::analyze(m.u(), lmax).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("jet", n_lat), &m, |b, m| b.iter(|| spheregrid::jet(m.u()).unwrap()));
        g.bench_with_input(BenchmarkId::new("curvature_bundle", n_lat), &m, |b, m| {
            b.iter(|| geometry::curvature_bundle(m).unwrap())
        });
    }
    g.finish();
}

fn flow_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("flow");
    for n_lat in [32, 64] {
        let (cfg, state) = inverse_state(&grid(n_lat));
        g.bench_function(BenchmarkId::new("rk4_step", n_lat), |b| b.iter(|| flows::step(&state, &cfg).unwrap()));
    }
    g.finish();
}

fn asymmetry(c: &mut Criterion) {
    let m = surface(&grid(32));
    let mut g = c.benchmark_group("fraenkel");
    g.sample_size(10);
    g.bench_function("asymmetry 32x64", |b| b.iter(|| geometry::fraenkel_asymmetry(&m).unwrap()));
    g.finish();
}

criterion_group!(benches, symmetric_functions, grid_kernels, flow_step, asymmetry);
criterion_main!(benches);
