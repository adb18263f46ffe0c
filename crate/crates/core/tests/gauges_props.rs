use gaugecalc_core::gauges::{
    ac_sum, cousin_partition, is_fine, riemann_lr_sum, Gauge, TaggedInterval, TaggedPartition,
};
use gaugecalc_core::{FunctionModel, Interval};
use proptest::prelude::*;

fn gauge() -> impl Strategy<Value = Gauge> {
    let constant = (-3.0f64..0.0).prop_map(|e| Gauge::constant(10f64.powf(e)).unwrap());
    let piecewise = prop::collection::vec((0.0f64..1.0, -3.0f64..0.0), 1..8).prop_map(|raw| {
        let mut bps: Vec<f64> = raw.iter().map(|p| p.0).collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        let mut values: Vec<f64> = raw.iter().map(|p| 10f64.powf(p.1)).collect();
        values.truncate(bps.len());
        values.push(0.5);
        Gauge::piecewise_constant(bps, values).unwrap()
    });
    prop_oneof![constant, piecewise]
}

/// Random tagged partition of [0, 1] from cut points and tag positions.
fn partition() -> impl Strategy<Value = TaggedPartition> {
    prop::collection::vec((0.0f64..1.0, 0.0f64..=1.0), 1..12).prop_map(|raw| {
        let mut cuts: Vec<f64> = raw.iter().map(|p| p.0).collect();
        cuts.push(0.0);
        cuts.push(1.0);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let items = cuts
            .windows(2)
            .zip(raw.iter().map(|p| p.1).cycle())
            .map(|(w, s)| TaggedInterval::from_bounds(w[0], w[1], w[0] + s * (w[1] - w[0])).unwrap())
            .collect();
        TaggedPartition::new(items).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn cousin_output_is_fine_and_tiles(g in gauge(), lo in -1.0f64..0.5, len in 0.01f64..2.0) {
        let domain = Interval::new(lo, lo + len).unwrap();
        let p = cousin_partition(domain, &g, 40).unwrap();
        prop_assert!(is_fine(&p, &g).unwrap());
        prop_assert!(p.tiles(domain));
        let again = TaggedPartition::from_json(&p.to_json()).unwrap();
        prop_assert_eq!(again, p);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn sums_are_additive_and_order_free(
        p in partition(),
        split in 0usize..12,
        coeffs in prop::collection::vec(-2.0f64..2.0, 1..5),
        r in 1.0f64..3.0,
    ) {
        let big_f = FunctionModel::polynomial(&coeffs, 0.0, 1.0).unwrap();
        let f = FunctionModel::polynomial(&[0.3, -1.0], 0.0, 1.0).unwrap();
        let items = p.items().to_vec();
        let k = split.min(items.len());
        let (a, b) = items.split_at(k);
        let left = TaggedPartition::new(a.to_vec()).unwrap();
        let right = TaggedPartition::new(b.to_vec()).unwrap();
        let mut reversed = items.clone();
        reversed.reverse();
        let shuffled = TaggedPartition::new(reversed).unwrap();
        for sum in [
            |p: &TaggedPartition, big_f: &FunctionModel, f: &FunctionModel, r: f64| riemann_lr_sum(p, big_f, f, r).unwrap(),
            |p: &TaggedPartition, big_f: &FunctionModel, _: &FunctionModel, r: f64| ac_sum(p, big_f, r).unwrap(),
        ] {
            let whole = sum(&p, &big_f, &f, r);
            let parts = sum(&left, &big_f, &f, r) + sum(&right, &big_f, &f, r);
            prop_assert!((whole - parts).abs() <= 1e-12 * whole.abs().max(1e-300));
            prop_assert_eq!(sum(&shuffled, &big_f, &f, r), whole);
        }
    }

    #[test]
    fn lipschitz_functions_obey_the_length_bound(
        p in partition(),
        slope in -3.0f64..3.0,
        r in 1.0f64..5.0,
    ) {
        let big_f = FunctionModel::polynomial(&[0.1, slope], 0.0, 1.0).unwrap();
        let s = ac_sum(&p, &big_f, r).unwrap();
        prop_assert!(s <= slope.abs() * p.total_length() * (1.0 + 1e-12));
    }

    #[test]
    fn riemann_sum_scales_with_the_pair(
        p in partition(),
        coeffs in prop::collection::vec(-2.0f64..2.0, 1..4),
        c in -4.0f64..4.0,
        r in 1.0f64..3.0,
    ) {
        // piecewise-linear data keeps every term on the closed-form path
        let nodes: Vec<(f64, f64)> = (0..=8)
            .map(|i| {
                let x = i as f64 / 8.0;
                (x, coeffs.iter().rev().fold(0.0, |acc, k| acc * x + k))
            })
            .collect();
        let scaled: Vec<(f64, f64)> = nodes.iter().map(|&(x, y)| (x, c * y)).collect();
        let big_f = FunctionModel::piecewise_linear(&nodes).unwrap();
        let big_cf = FunctionModel::piecewise_linear(&scaled).unwrap();
        let f = FunctionModel::polynomial(&[1.5], 0.0, 1.0).unwrap();
        let cf = FunctionModel::polynomial(&[1.5 * c], 0.0, 1.0).unwrap();
        let base = riemann_lr_sum(&p, &big_f, &f, r).unwrap();
        let got = riemann_lr_sum(&p, &big_cf, &cf, r).unwrap();
        prop_assert!((got - c.abs() * base).abs() <= 1e-12 * (1.0 + c.abs() * base), "{} vs {}", got, c.abs() * base);
    }
}
