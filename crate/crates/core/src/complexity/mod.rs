//! Rademacher complexities, shattering numbers, Mendelson curves and
//! analytic bound curves.
//!
//! For a class evaluated on a sample, `R_n(f) = n^{-1} sum_i eps_i f(X_i)`
//! with i.i.d. signs `eps_i`. Expectations over signs are computed
//! exhaustively for small samples and by Monte Carlo otherwise.

mod curves;
mod kernel;
mod rademacher;
mod shattering;

pub use curves::{bound_curve, BoundCurveParams};
pub use kernel::{mendelson_curve, mendelson_curves, KernelSpec, MendelsonCurves, EIGEN_FLOOR};
pub use rademacher::{
    modulus_curve, omega_bar_curve, rademacher_averages, rademacher_modulus, rademacher_sup, theta_n_curve,
    ModulusMetric, RademacherDraw, SignSet, DEFAULT_SIGN_DRAWS, EXHAUSTIVE_LOG2_CAP,
};
pub use shattering::shattering_number;
