//! Excess-risk bounds built from localized complexities.
//!
//! With `phi_n(delta)` the expected supremum of `|(P_n - P)(f - g)|` over the
//! `delta`-minimal set and `D(delta)` its diameter,
//!
//! ```text
//! U_n(delta; t) = phi_n + sqrt(2 (t/n) (D^2 + 2 phi_n)) + t / (2n)
//! delta_n(t)    = U_n^{sharp, q}(1 / (2q))
//! ```
//!
//! bounds the excess risk of empirical risk minimization with probability
//! at least `1 - log_q(q n / t) e^{-t}`. The family `U_bar`, `U_hat`,
//! `U_tilde` replaces `U_n` by linear combinations whose transforms are
//! ordered with high probability.

mod estimate;
mod formulas;

pub use estimate::{bound_report, geometric_bound, BoundReport, GeometricBound, TrueComplexity};
pub use formulas::{
    delta_family, delta_hat, delta_n, linear_bound_value, u_check_concave, u_n, u_n_value, v_n, BoundConstants, FamilyBounds,
    FamilyInputs,
};
