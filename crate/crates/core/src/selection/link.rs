use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Grid size of the numeric Legendre transform.
pub const LEGENDRE_POINTS: usize = 10_000;

type Scalar1<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// `phi*(v) = sup_{0 <= u <= u_max} (u v - phi(u))`, maximized on a uniform
/// grid of [`LEGENDRE_POINTS`] points and refined by golden-section search
/// around the best grid point. Never exceeds the exact conjugate.
pub fn legendre_numeric<T: Real>(phi: &dyn Fn(T) -> T, v: T, u_max: T) -> T {
    let obj = |u: T| u * v - phi(u);
    let h = u_max / T::count(LEGENDRE_POINTS - 1);
    let (mut best_i, mut best) = (0usize, obj(T::zero()));
    for i in 1..LEGENDRE_POINTS {
        let val = obj(h * T::count(i));
        if val > best {
            best = val;
            best_i = i;
        }
    }
    let mut a = h * T::count(best_i.saturating_sub(1));
    let mut b = (h * T::count(best_i + 1)).min(u_max);
    let ratio = T::lit(0.618_033_988_749_894_9);
    for _ in 0..100 {
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        if obj(c) >= obj(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.max(obj((a + b) / T::lit(2.0)))
}

/// Convex nondecreasing link `phi` with `phi(0) = 0` and its conjugate.
#[derive(Clone)]
pub struct ConvexLink<T> {
    phi: Scalar1<T>,
    conjugate: Option<Scalar1<T>>,
    u_max: T,
    submultiplicative: bool,
}

impl<T: Real> std::fmt::Debug for ConvexLink<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConvexLink")
            .field("analytic_conjugate", &self.conjugate.is_some())
            .field("u_max", &self.u_max)
            .field("submultiplicative", &self.submultiplicative)
            .finish()
    }
}

fn lattice<T: Real>() -> Vec<T> {
    (0..=40).map(|k| T::lit(0.05) * T::lit(1.2_f64.powi(k))).filter(|u| *u <= T::lit(20.0)).collect()
}

impl<T: Real> ConvexLink<T> {
    /// Link with a numerically computed conjugate searched over `[0, u_max]`.
    pub fn numeric(phi: impl Fn(T) -> T + Send + Sync + 'static, u_max: T) -> Result<Self> {
        Self::build(Arc::new(phi), None, u_max)
    }

    /// Link with an analytic conjugate.
    pub fn analytic(
        phi: impl Fn(T) -> T + Send + Sync + 'static,
        conjugate: impl Fn(T) -> T + Send + Sync + 'static,
        u_max: T,
    ) -> Result<Self> {
        Self::build(Arc::new(phi), Some(Arc::new(conjugate)), u_max)
    }

    /// `phi(u) = u^2 / d` with `phi*(v) = d v^2 / 4`.
    pub fn quadratic(d: T) -> Result<Self> {
        if !(d > T::zero()) {
            return Err(Error::BadParams(format!("d = {d} must be positive")));
        }
        let four = T::lit(4.0);
        Self::analytic(move |u: T| u * u / d, move |v: T| d * v * v / four, T::lit(64.0) * d)
    }

    fn build(phi: Scalar1<T>, conjugate: Option<Scalar1<T>>, u_max: T) -> Result<Self> {
        if !(u_max > T::zero()) {
            return Err(Error::BadParams("u_max must be positive".into()));
        }
        if phi(T::zero()).abs() > T::audit_tol() {
            return Err(Error::BadParams("link must vanish at 0".into()));
        }
        let grid: Vec<T> = (0..=64).map(|k| u_max * T::count(k) / T::lit(64.0)).collect();
        let tol = T::audit_tol();
        for w in grid.windows(3) {
            let (a, b, c) = (phi(w[0]), phi(w[1]), phi(w[2]));
            if b < a - tol * a.abs() {
                return Err(Error::BadParams("link must be nondecreasing".into()));
            }
            if a + c - b - b < -tol * (a.abs() + c.abs() + T::one()) {
                return Err(Error::BadParams("link must be convex".into()));
            }
        }
        let pts = lattice::<T>();
        let submultiplicative = pts
            .iter()
            .all(|&u| pts.iter().all(|&v| phi(u * v) <= phi(u) * phi(v) * (T::one() + tol) + tol));
        Ok(Self { phi, conjugate, u_max, submultiplicative })
    }

    pub fn phi(&self, u: T) -> T {
        (self.phi)(u)
    }

    /// Analytic conjugate when available, numeric otherwise.
    pub fn conjugate(&self, v: T) -> T {
        match &self.conjugate {
            Some(c) => c(v),
            None => self.numeric_conjugate(v),
        }
    }

    pub fn numeric_conjugate(&self, v: T) -> T {
        legendre_numeric(self.phi.as_ref(), v, self.u_max)
    }

    /// `phi(u v) <= phi(u) phi(v)` on the audit lattice.
    pub fn is_submultiplicative(&self) -> bool {
        self.submultiplicative
    }

    /// `phi(u) + phi*(v) - u v`, nonnegative by Fenchel-Young.
    pub fn fenchel_young_gap(&self, u: T, v: T) -> T {
        self.phi(u) + self.conjugate(v) - u * v
    }

    /// `phi_self(u) >= phi_next(u)` on the audit lattice.
    pub fn dominates(&self, next: &Self) -> bool {
        let tol = T::audit_tol();
        lattice::<T>().iter().all(|&u| self.phi(u) >= next.phi(u) * (T::one() - tol) - tol)
    }
}
