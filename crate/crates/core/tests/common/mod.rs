//! Reference computations shared by integration tests and the acceptance run.
#![allow(dead_code)]

use gaugecalc_core::quadrature::Part;
use rand::Rng;

/// Random piecewise-linear data on [0, 1] with `nodes` breakpoints.
pub fn random_pwl<R: Rng>(rng: &mut R, nodes: usize) -> Vec<(f64, f64)> {
    let mut xs: Vec<f64> = (0..nodes.saturating_sub(2)).map(|_| rng.gen_range(0.01..0.99)).collect();
    xs.push(0.0);
    xs.push(1.0);
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
    xs.into_iter().map(|x| (x, rng.gen_range(-2.0..2.0))).collect()
}

fn interp(points: &[(f64, f64)], x: f64) -> f64 {
    let i = points.partition_point(|p| p.0 <= x).clamp(1, points.len() - 1);
    let (x0, y0) = points[i - 1];
    let (x1, y1) = points[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

fn bracket(s: f64, part: Part) -> f64 {
    match part {
        Part::Abs => s.abs(),
        Part::Pos => s.max(0.0),
        Part::Neg => (-s).max(0.0),
    }
}

/// `∫` of `bracket(g)^r` for `g` linear from `ga` to `gb` over a length `len`,
/// with `g` of one sign.
fn one_sign(ga: f64, gb: f64, len: f64, r: f64, part: Part) -> f64 {
    let (ba, bb) = (bracket(ga, part), bracket(gb, part));
    if ba == 0.0 && bb == 0.0 {
        return 0.0;
    }
    let delta = bb - ba;
    let mid = 0.5 * (ba + bb);
    if delta.abs() < 1e-3 * mid {
        // midpoint series of the power mean
        let t = delta / mid;
        let c2 = r * (r - 1.0) / 24.0;
        let c4 = r * (r - 1.0) * (r - 2.0) * (r - 3.0) / 1920.0;
        return len * mid.powf(r) * (1.0 + c2 * t * t + c4 * t.powi(4));
    }
    len * (bb.powf(r + 1.0) - ba.powf(r + 1.0)) / ((r + 1.0) * delta)
}

/// `∫_lo^hi bracket(F(y) - F(x) - alpha (y - x))^r dy` for linear
/// interpolation through `points`, segment by segment from antiderivatives.
pub fn pwl_oracle(points: &[(f64, f64)], x: f64, alpha: f64, r: f64, part: Part, lo: f64, hi: f64) -> f64 {
    let fx = interp(points, x);
    let g = |y: f64| interp(points, y) - fx - alpha * (y - x);
    let mut cuts = vec![lo];
    cuts.extend(points.iter().map(|p| p.0).filter(|&t| t > lo && t < hi));
    cuts.push(hi);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ga, gb) = (g(a), g(b));
        if ga * gb < 0.0 {
            let root = a + (b - a) * ga / (ga - gb);
            total += one_sign(ga, 0.0, root - a, r, part) + one_sign(0.0, gb, b - root, r, part);
        } else {
            total += one_sign(ga, gb, b - a, r, part);
        }
    }
    total
}
