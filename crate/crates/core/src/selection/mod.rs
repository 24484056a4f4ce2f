//! Model selection over a family of classes: penalized empirical risk
//! minimization, the comparison method, specialized penalties and loss
//! classes built from a base class and a convex loss.

mod family;
mod link;
mod loss;
mod penalties;
mod select;

pub use family::ModelFamily;
pub use link::{legendre_numeric, ConvexLink, LEGENDRE_POINTS};
pub use loss::{loss_class, pi_n, w_bar_curve, ConvexityModulus, Labeled, LossClassMeta};
pub use penalties::{
    dimension_penalty, kernel_penalty, massart_penalty, penalty_v1, penalty_v2, rademacher_penalty,
    shattering_penalty, MassartConstants, MassartPenalty, PenaltyV2,
};
pub use select::{
    comparison_index, cumulative_max, k_star, select_comparison, select_penalized, ComparisonConstants,
    ComparisonOracle, Diagnostics, Method, ModelSummary, SelectionResult,
};

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_conjugate_numeric_matches_analytic() {
        for d in [1.0, 2.0, 4.0] {
            let link = ConvexLink::quadratic(d).unwrap();
            for i in 0..=20 {
                let v = 2.0 * i as f64 / 20.0;
                assert!((link.numeric_conjugate(v) - d * v * v / 4.0).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn fenchel_young_and_submultiplicativity() {
        let link = ConvexLink::numeric(|u: f64| u * u * u / 3.0, 20.0).unwrap();
        for u in [0.0, 0.3, 1.0, 2.5] {
            for v in [0.0, 0.5, 1.0, 3.0] {
                assert!(link.fenchel_young_gap(u, v) >= -1e-12);
            }
        }
        assert!(ConvexLink::quadratic(1.0).unwrap().is_submultiplicative());
        assert!(!ConvexLink::quadratic(4.0).unwrap().is_submultiplicative());
        assert!(ConvexLink::numeric(|u: f64| u.sqrt(), 4.0).is_err());
    }
}
