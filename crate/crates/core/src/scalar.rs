//! Scalar abstraction shared by the transform calculus, the bound formulas and
//! the penalty formulas.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by the generic parts of the crate.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts a literal, panicking only if the value is unrepresentable.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Converts a count.
    fn count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    /// Relative tolerance for shape audits: `1e-9`, widened to a few ulps for
    /// low-precision types.
    fn audit_tol() -> Self {
        let floor = Self::lit(1e-9);
        let ulps = Self::epsilon() * Self::lit(64.0);
        if ulps > floor {
            ulps
        } else {
            floor
        }
    }

    /// Lossy view as `f64`.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
