use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gaugecalc_bench::{graded_gauge, quintic, zigzag};
use gaugecalc_core::checkers::counterexample_verify;
use gaugecalc_core::derivates::lr_derivative;
use gaugecalc_core::gauges::{cousin_partition, riemann_lr_sum};
use gaugecalc_core::quadrature::lr_mean_deviation;
use gaugecalc_core::{FunctionModel, HGrid, Interval, LrParams, Side};
use std::hint::black_box;

fn quadrature(c: &mut Criterion) {
    let mut g = c.benchmark_group("mean_deviation");
    let pwl = zigzag(200);
    let poly = quintic();
    let cx = FunctionModel::counterexample();
    for r in [1.0, 1.5, 2.0] {
        let p = LrParams::new(r, Side::TwoSided, gaugecalc_core::Part::Abs).unwrap();
        g.bench_with_input(BenchmarkId::new("pwl", r), &p, |b, p| {
            b.iter(|| lr_mean_deviation(&pwl, black_box(0.43), 0.3, 0.2, *p).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("poly", r), &p, |b, p| {
            b.iter(|| lr_mean_deviation(&poly, black_box(0.43), 0.3, 0.2, *p).unwrap())
        });
        let right = p.with_side(Side::Right);
        g.bench_with_input(BenchmarkId::new("counterexample", r), &right, |b, p| {
            b.iter(|| lr_mean_deviation(&cx, black_box(0.0), 0.0, 5.0 / 24.0, *p).unwrap())
        });
    }
    g.finish();
}

fn derivative(c: &mut Criterion) {
    let poly = quintic();
    let grid = HGrid::geometric(0.05, 0.5, 12).unwrap();
    c.bench_function("lr_derivative/quintic", |b| {
        b.iter(|| lr_derivative(&poly, black_box(0.37), 2.0, &grid).unwrap())
    });
}

fn partitions(c: &mut Criterion) {
    let unit = Interval::new(0.0, 1.0).unwrap();
    let gauge = graded_gauge(16);
    c.bench_function("cousin/graded", |b| b.iter(|| cousin_partition(unit, black_box(&gauge), 40).unwrap()));
    let p = cousin_partition(unit, &gauge, 40).unwrap();
    let big_f = FunctionModel::polynomial(&[0.0, 0.0, 0.5], 0.0, 1.0).unwrap();
    let f = FunctionModel::polynomial(&[0.0, 1.0], 0.0, 1.0).unwrap();
    c.bench_function("riemann_sum/graded", |b| b.iter(|| riemann_lr_sum(&p, &big_f, &f, 2.0).unwrap()));
}

fn sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("counterexample_verify");
    g.sample_size(10);
    g.bench_function("levels_1_12", |b| b.iter(|| counterexample_verify(1..=12, &[1.0, 2.0], 1e-6, 60).unwrap()));
    g.finish();
}

criterion_group!(benches, quadrature, derivative, partitions, sweep);
criterion_main!(benches);
