use aircomp_core::optimizer::p1_roots;
use aircomp_core::{
    estimate_mse, mse_ml, snr_from_db, solve_map, solve_ml, solve_ndim, threshold_xi1, DecoderKind, GridSpacing,
    SystemConfig,
};
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn solvers(c: &mut Criterion) {
    let small = SystemConfig::gaussian(4, 4, 2, snr_from_db(15.0)).unwrap();
    let large = SystemConfig::gaussian(6, 4, 20, snr_from_db(15.0)).unwrap();
    c.bench_function("solve_ml K=2", |b| b.iter(|| solve_ml(black_box(&small)).unwrap()));
    c.bench_function("solve_ml K=20", |b| b.iter(|| solve_ml(black_box(&large)).unwrap()));
    c.bench_function("solve_map K=20", |b| b.iter(|| solve_map(black_box(&large)).unwrap()));
    let grid = large.grid().unwrap();
    c.bench_function("threshold_xi1 K=20", |b| b.iter(|| threshold_xi1(black_box(&grid)).unwrap()));
    c.bench_function("p1_roots N=101", |b| b.iter(|| p1_roots(black_box(101))));
    let sigma = (1.0 / snr_from_db(10.0)).sqrt();
    c.bench_function("solve_ndim N=3", |b| b.iter(|| solve_ndim(3, 4, 10, 1.0, black_box(&[sigma; 3])).unwrap()));
}

fn evaluation(c: &mut Criterion) {
    let cfg = SystemConfig::gaussian(4, 4, 10, snr_from_db(15.0)).unwrap();
    let sp = GridSpacing::equal_distance(&cfg);
    c.bench_function("mse_ml K=10", |b| b.iter(|| mse_ml(black_box(&sp), &cfg).unwrap()));
    c.bench_function("estimate_mse 1e4 trials", |b| {
        b.iter(|| estimate_mse(&cfg, black_box(&sp), DecoderKind::Ml, 10_000, 1).unwrap())
    });
}

criterion_group!(benches, solvers, evaluation);
criterion_main!(benches);
