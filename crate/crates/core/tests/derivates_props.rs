mod common;

use gaugecalc_core::derivates::{lr_derivative, one_sided_derivate, Which};
use gaugecalc_core::quadrature::{lr_mean_deviation, LrParams, Part, Side};
use gaugecalc_core::{FunctionModel, HGrid};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn side() -> impl Strategy<Value = Side> {
    prop_oneof![Just(Side::Left), Just(Side::Right), Just(Side::TwoSided)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// The mean deviation is an L^r norm of an affine family in the slope.
    #[test]
    fn mean_deviation_is_midpoint_convex_in_slope(
        seed in any::<u64>(),
        nodes in 2usize..12,
        x in 0.3f64..0.7,
        h in 0.01f64..0.25,
        a in -5.0f64..5.0,
        b in -5.0f64..5.0,
        r in 1.0f64..4.0,
        side in side(),
    ) {
        let pts = common::random_pwl(&mut ChaCha8Rng::seed_from_u64(seed), nodes);
        let f = FunctionModel::piecewise_linear(&pts).unwrap();
        let p = LrParams::new(r, side, Part::Abs).unwrap();
        let phi = |alpha: f64| lr_mean_deviation(&f, x, alpha, h, p).unwrap().value;
        let (pa, pb, pm) = (phi(a), phi(b), phi(0.5 * (a + b)));
        prop_assert!(pm <= 0.5 * (pa + pb) + 1e-10 * (1.0 + pa + pb), "{} > mean of {} {}", pm, pa, pb);
    }

    #[test]
    fn positive_and_negative_parts_bound_the_whole(
        seed in any::<u64>(),
        nodes in 2usize..12,
        x in 0.3f64..0.7,
        h in 0.01f64..0.25,
        alpha in -5.0f64..5.0,
        r in 1.0f64..4.0,
    ) {
        let pts = common::random_pwl(&mut ChaCha8Rng::seed_from_u64(seed), nodes);
        let f = FunctionModel::piecewise_linear(&pts).unwrap();
        let at = |part| lr_mean_deviation(&f, x, alpha, h, LrParams::new(r, Side::Right, part).unwrap()).unwrap().value;
        let (whole, pos, neg) = (at(Part::Abs), at(Part::Pos), at(Part::Neg));
        // the integrands of the parts add up to the whole
        let sum = pos.powf(r) + neg.powf(r);
        prop_assert!((sum - whole.powf(r)).abs() <= 1e-9 * (1.0 + whole.powf(r)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn smooth_derivative_matches_and_flips_under_reflection(
        coeffs in prop::collection::vec(-2.0f64..2.0, 2..5),
        x in 0.2f64..0.8,
        r in 1.0f64..3.0,
    ) {
        let f = FunctionModel::polynomial(&coeffs, 0.0, 1.0).unwrap();
        let slope: f64 = coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c * x.powi(k as i32 - 1)).sum();
        let grid = HGrid::geometric(0.05, 0.5, 12).unwrap();
        let d = lr_derivative(&f, x, r, &grid).unwrap();
        prop_assert!((d.value - slope).abs() < 1e-4 * (1.0 + slope.abs()), "{} vs {}", d.value, slope);
        let g = f.clone().reflected();
        let e = lr_derivative(&g, -x, r, &grid).unwrap();
        prop_assert!((e.value + d.value).abs() < 1e-9 * (1.0 + slope.abs()), "{} vs {}", e.value, d.value);
    }
}

#[test]
fn kink_derivates_follow_negation_and_reflection() {
    let f = FunctionModel::piecewise_linear(&[(0.0, 0.4), (0.4, 0.0), (1.0, 1.2)]).unwrap();
    let grid = HGrid::geometric(0.1, 0.5, 8).unwrap();
    let value = |f: &FunctionModel, x: f64, which| {
        one_sided_derivate(f, x, 1.5, which, &grid, 1e-6).unwrap().value.finite().unwrap()
    };
    let expected = [
        (Which::UpperRight, 2.0),
        (Which::LowerRight, 2.0),
        (Which::UpperLeft, -1.0),
        (Which::LowerLeft, -1.0),
    ];
    for (which, slope) in expected {
        assert!((value(&f, 0.4, which) - slope).abs() < 1e-5, "{which:?}");
    }
    let neg = f.clone().negated();
    let refl = f.reflected();
    let pairs = [
        (Which::UpperRight, Which::LowerRight, Which::LowerLeft),
        (Which::LowerRight, Which::UpperRight, Which::UpperLeft),
        (Which::UpperLeft, Which::LowerLeft, Which::LowerRight),
        (Which::LowerLeft, Which::UpperLeft, Which::UpperRight),
    ];
    for (which, negated_match, reflected_match) in pairs {
        let base = expected.iter().find(|e| e.0 == negated_match).unwrap().1;
        assert!((value(&neg, 0.4, which) + base).abs() < 1e-5, "negated {which:?}");
        let base = expected.iter().find(|e| e.0 == reflected_match).unwrap().1;
        assert!((value(&refl, -0.4, which) + base).abs() < 1e-5, "reflected {which:?}");
    }
}
