//! Fixed inputs shared by the benchmarks.

use gaugecalc_core::{FunctionModel, Gauge};

/// Piecewise-linear zigzag on [0, 1] with `nodes` breakpoints.
pub fn zigzag(nodes: usize) -> FunctionModel {
    let n = nodes.max(2);
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let x = i as f64 / (n - 1) as f64;
            (x, (7.3 * x).sin() + 0.25 * (41.0 * x).cos())
        })
        .collect();
    FunctionModel::piecewise_linear(&pts).expect("increasing nodes")
}

pub fn quintic() -> FunctionModel {
    FunctionModel::polynomial(&[0.3, -1.2, 0.8, 2.0, -0.7, 0.1], 0.0, 1.0).expect("finite coefficients")
}

/// Gauge that shrinks toward the left end of [0, 1].
pub fn graded_gauge(pieces: usize) -> Gauge {
    let breakpoints: Vec<f64> = (1..pieces).map(|i| i as f64 / pieces as f64).collect();
    let values: Vec<f64> = (0..pieces).map(|i| 1e-3 * (1.0 + 20.0 * i as f64 / pieces as f64)).collect();
    Gauge::piecewise_constant(breakpoints, values).expect("sorted breakpoints")
}
