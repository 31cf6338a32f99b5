use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polarfit_bench::{gradient_case, polar_star, star_target};
use polarfit_core::{grad_regression_loss, polygon_iou, resample_triangle, resample_vector, Point};

fn resampling(c: &mut Criterion) {
    let mut group = c.benchmark_group("resample");
    for k in [12, 36] {
        let polar = polar_star(k);
        let cart = star_target(k);
        group.bench_with_input(BenchmarkId::new("triangle", k), &k, |b, _| {
            b.iter(|| resample_triangle(black_box(&polar), 360, 0.0).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("vector", k), &k, |b, _| {
            b.iter(|| resample_vector(black_box(&cart), Point::new(0.0, 0.0), 360, 0.0).unwrap())
        });
    }
    group.finish();
}

fn gradient(c: &mut Criterion) {
    let mut group = c.benchmark_group("loss_and_gradient");
    for (k, m) in [(12, 90), (24, 360)] {
        let case = gradient_case(k, m);
        group.bench_function(BenchmarkId::from_parameter(format!("k{k}_m{m}")), |b| {
            b.iter(|| grad_regression_loss(black_box(&case.f), &case.cell, &case.cfg, &case.gt, &case.weights).unwrap())
        });
    }
    group.finish();
}

fn rasterized_iou(c: &mut Criterion) {
    let a = star_target(24);
    let b = a.translated(0.3, -0.2);
    let mut group = c.benchmark_group("polygon_iou");
    for grid in [64, 512] {
        group.bench_with_input(BenchmarkId::from_parameter(grid), &grid, |bench, &g| {
            bench.iter(|| polygon_iou(black_box(&a), black_box(&b), g).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, resampling, gradient, rasterized_iou);
criterion_main!(benches);
