//! Flat and sharp transforms of complexity curves.
//!
//! For a nondecreasing `psi: (0, inf) -> [0, inf)`:
//!
//! ```text
//! psi_flat(delta)  = sup_{sigma >= delta} psi(sigma) / sigma
//! psi_sharp(eps)   = inf { delta > 0 : psi_flat(delta) <= eps }
//! ```
//!
//! The discretized versions replace the supremum by one over the geometric
//! grid `delta_j = q^{-j}`, and satisfy
//! `sharp_q(eps) <= sharp(eps) <= sharp_q(eps / q)`.

mod curve;
mod fixed_point;
mod grid;
mod sharp;

pub use curve::{ComplexityCurve, Shape};
pub use fixed_point::{fixed_point, geometric_tail_sum, tail_constant, FixedPoint};
pub use grid::{GeometricGrid, GridTable};
pub use sharp::{flat, flat_q, flat_with, sharp, sharp_q, sharp_q_table, sharp_with, TransformSettings};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    fn power(alpha: f64) -> ComplexityCurve<f64> {
        ComplexityCurve::strictly_concave(alpha, move |d: f64| d.powf(alpha)).unwrap().unbounded()
    }

    #[test]
    fn flat_of_root_and_constant() {
        assert!((flat(&power(0.5), 0.25).unwrap() - 2.0).abs() < 1e-12);
        assert!((flat(&ComplexityCurve::constant(2.0_f64), 0.5).unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn flat_of_piecewise_curve() {
        let c = ComplexityCurve::piecewise_linear(Shape::Arbitrary, vec![(0.1_f64, 0.05), (0.5, 0.1), (1.0, 0.1)]).unwrap();
        assert!((flat(&c, 0.1).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sharp_examples() {
        assert!((sharp(&power(0.5), 0.5).unwrap() - 4.0).abs() < 1e-9);
        assert_eq!(sharp(&power(0.5).with_cap(1.0), 0.5).unwrap(), 1.0);
        assert!((sharp(&ComplexityCurve::constant(2.0_f64).unbounded(), 4.0).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(sharp(&ComplexityCurve::constant(0.0), 0.3).unwrap(), 0.0);
    }

    #[test]
    fn sharp_of_identity_is_unbounded() {
        let id = ComplexityCurve::concave(|d: f64| d).unbounded();
        assert!(sharp(&id, 0.5).unwrap().is_infinite());
    }

    #[test]
    fn sharp_q_examples() {
        let grid = GeometricGrid::new(2.0, -1, 10).unwrap();
        let one = ComplexityCurve::constant(1.0_f64).unbounded();
        assert_eq!(sharp_q(&one, 1.0, &grid, false).unwrap(), 0.5);
        assert_eq!(sharp_q(&one, 0.5, &grid, false).unwrap(), 1.0);
        assert_eq!(sharp_q(&one, 0.1, &grid, true).unwrap(), 1.0);
        assert_eq!(sharp_q(&ComplexityCurve::constant(0.0), 0.1, &grid, true).unwrap(), 0.0);
    }

    #[test]
    fn restricted_sharp_needs_unit_point() {
        let grid = GeometricGrid::new(2.0, 1, 4).unwrap();
        let r = sharp_q(&ComplexityCurve::constant(1.0_f64), 1.0, &grid, true);
        assert!(matches!(r, Err(Error::EmptyGrid(_))));
    }

    #[test]
    fn non_monotone_curve_rejected() {
        let c = ComplexityCurve::arbitrary(|d: f64| (1.0 - d).max(0.0));
        assert!(matches!(flat(&c, 0.1), Err(Error::NonMonotoneCurve { .. })));
    }

    #[test]
    fn fixed_point_examples() {
        let half_root = ComplexityCurve::strictly_concave(0.5, |d: f64| 0.5 * d.sqrt()).unwrap();
        assert!((fixed_point(&half_root, 200).unwrap().delta_bar - 0.25).abs() < 1e-12);
        let c = ComplexityCurve::strictly_concave(0.5, |d: f64| 0.3 * d.sqrt()).unwrap();
        assert!((fixed_point(&c, 200).unwrap().delta_bar - 0.09).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_rejects_linear_curve() {
        let id = ComplexityCurve::strictly_concave(0.5, |d: f64| d).unwrap();
        assert!(matches!(fixed_point(&id, 10), Err(Error::ShapeViolation { .. })));
        let id = ComplexityCurve::concave(|d: f64| d);
        assert!(matches!(fixed_point(&id, 10), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn tail_sum_of_root() {
        let grid = GeometricGrid::new(2.0, 0, 2).unwrap();
        let s = geometric_tail_sum(&power(0.5), 0.25, &grid).unwrap();
        let oracle = 1.0 + 0.5_f64.sqrt() / 0.5 + 0.5 / 0.25;
        assert!((s - oracle).abs() < 1e-12);
        assert!(s <= tail_constant(0.5, 2.0) * 2.0);
        assert!(matches!(geometric_tail_sum(&power(0.5), 0.3, &grid), Err(Error::OffGrid(_))));
    }

    #[test]
    fn single_precision_path() {
        let c = ComplexityCurve::<f32>::constant(2.0).unbounded();
        assert!((sharp(&c, 4.0_f32).unwrap() - 0.5).abs() < 1e-6);
        let grid = GeometricGrid::<f32>::for_sample(2.0, 100, 2.0).unwrap();
        assert_eq!(grid.j_max(), 8);
    }
}
