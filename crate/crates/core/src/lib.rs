//! Excess-risk bounds for empirical risk minimization built from localized
//! Rademacher complexities, and complexity-penalized model selection.
//!
//! The numeric core ([`transform`], [`bounds`], the penalty formulas in
//! [`selection`]) is generic over [`Real`]; the sampling side works in `f64`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod class;
pub mod complexity;
pub mod error;
pub mod rng;
pub mod scalar;
pub mod scenarios;
pub mod selection;
pub mod stats;
pub mod transform;

pub use error::{Error, Result};
pub use scalar::Real;

/// Complexity curve over `f64`.
pub type Curve = transform::ComplexityCurve<f64>;
/// Complexity curve over `f32`.
pub type Curve32 = transform::ComplexityCurve<f32>;
pub type Grid = transform::GeometricGrid<f64>;
pub type Constants = bounds::BoundConstants<f64>;
pub type Link = selection::ConvexLink<f64>;
