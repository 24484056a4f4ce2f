use proptest::prelude::*;
use riskbound::transform::{fixed_point, flat, sharp, sharp_q, GeometricGrid};
use riskbound::{Curve, Curve32, Grid};

fn power(c: f64, gamma: f64) -> Curve {
    Curve::strictly_concave(gamma, move |d: f64| c * d.powf(gamma)).unwrap()
}

fn steps(raw: &[(f64, f64)]) -> Curve {
    let mut breaks: Vec<f64> = raw.iter().map(|r| r.0).collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let mut level = 0.0;
    let table = breaks
        .into_iter()
        .zip(raw)
        .map(|(b, r)| {
            level += r.1;
            (b, level)
        })
        .collect();
    Curve::steps(table).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sharp_is_sandwiched(c in 0.01f64..0.9, gamma in 0.1f64..0.9, eps in 0.05f64..20.0, q in 1.2f64..4.0) {
        let curve = power(c, gamma);
        let grid = Grid::new(q, 0, 120).unwrap();
        let s = sharp(&curve, eps).unwrap();
        let lower = sharp_q(&curve, eps, &grid, true).unwrap();
        let upper = sharp_q(&curve, eps / q, &grid, true).unwrap();
        prop_assert!(lower <= s * (1.0 + 1e-9), "{lower} > {s}");
        prop_assert!(s <= upper * (1.0 + 1e-9), "{s} > {upper}");
    }

    #[test]
    fn step_sandwich(raw in prop::collection::vec((1e-6f64..1.0, 0.0f64..0.3), 1..8), eps in 0.01f64..50.0) {
        let curve = steps(&raw);
        let grid = Grid::new(2.0, 0, 40).unwrap();
        let s = sharp(&curve, eps).unwrap();
        prop_assert!(s <= sharp_q(&curve, eps / 2.0, &grid, true).unwrap());
        prop_assert!(sharp_q(&curve, eps, &grid, true).unwrap() <= s);
    }

    #[test]
    fn sharp_is_nonincreasing(c in 0.01f64..0.9, gamma in 0.1f64..0.9, e1 in 0.05f64..20.0, e2 in 0.05f64..20.0) {
        let curve = power(c, gamma);
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        prop_assert!(sharp(&curve, hi).unwrap() <= sharp(&curve, lo).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn flat_is_nonincreasing(raw in prop::collection::vec((1e-6f64..1.0, 0.0f64..0.3), 1..8), d1 in 1e-6f64..1.0, d2 in 1e-6f64..1.0) {
        let curve = steps(&raw);
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        prop_assert!(flat(&curve, hi).unwrap() <= flat(&curve, lo).unwrap());
    }

    #[test]
    fn scaling_moves_the_level(c in 0.01f64..0.5, gamma in 0.1f64..0.9, eps in 0.1f64..10.0, k in 0.2f64..1.5) {
        let curve = power(c, gamma);
        let scaled = curve.scaled(k);
        let a = sharp(&scaled, eps).unwrap();
        let b = sharp(&curve, eps / k).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b), "{a} vs {b}");
    }

    #[test]
    fn sharp_at_one_is_the_fixed_point(c in 0.01f64..0.95, gamma in 0.1f64..0.9) {
        let curve = power(c, gamma);
        let fp = fixed_point(&curve, 500).unwrap();
        let s = sharp(&curve, 1.0).unwrap();
        prop_assert!((fp.delta_bar - s).abs() <= 1e-9 * (1.0 + s));
        prop_assert!((curve.eval(fp.delta_bar) - fp.delta_bar).abs() <= 1e-12);
    }

    #[test]
    fn single_precision_agrees(c in 0.05f64..0.9, gamma in 0.2f64..0.8, eps in 0.2f64..5.0) {
        let (c32, g32) = (c as f32, gamma as f32);
        let curve32 = Curve32::strictly_concave(g32, move |d: f32| c32 * d.powf(g32)).unwrap();
        let s32 = sharp(&curve32, eps as f32).unwrap() as f64;
        let s64 = sharp(&power(c32 as f64, g32 as f64), eps as f32 as f64).unwrap();
        prop_assert!((s32 - s64).abs() <= 1e-4 * (1.0 + s64), "{s32} vs {s64}");
    }
}

#[test]
fn grid_points_descend_from_one() {
    let grid = GeometricGrid::new(2.0, 0, 5).unwrap();
    assert_eq!(grid.points(), vec![1.0, 0.5, 0.25, 0.125, 0.0625, 0.03125]);
}
