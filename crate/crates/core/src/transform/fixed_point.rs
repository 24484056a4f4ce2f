use crate::error::{Error, Result};
use crate::scalar::Real;

use super::curve::{ComplexityCurve, Shape};
use super::grid::GeometricGrid;

/// Solution of `psi(delta) = delta` together with the iteration
/// `delta_0 = 1`, `delta_{k+1} = psi(delta_k) ∧ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPoint<T> {
    pub delta_bar: T,
    pub gamma: T,
    pub iterates: Vec<T>,
}

impl<T: Real> FixedPoint<T> {
    /// `delta_bar^{1 - gamma^k} (1 - delta_bar)^{gamma^k}`, the guaranteed
    /// gap after `k` steps.
    pub fn error_bound(&self, k: usize) -> T {
        let g = self.gamma.powi(k as i32);
        self.delta_bar.powf(T::one() - g) * (T::one() - self.delta_bar).powf(g)
    }
}

/// Fixed point of a strictly-concave-type curve, capped at 1.
pub fn fixed_point<T: Real>(curve: &ComplexityCurve<T>, max_iter: usize) -> Result<FixedPoint<T>> {
    let Shape::StrictlyConcaveType { gamma } = curve.shape() else {
        return Err(Error::ShapeMismatch { required: "strictly-concave-type" });
    };
    let probe: Vec<T> = (0..=96).rev().map(|k| T::lit(2.0).powf(T::lit(-0.5 * k as f64))).collect();
    let values: Vec<T> = probe.iter().map(|&x| curve.eval(x)).collect();
    curve.audit(&probe, &values)?;

    let one = T::one();
    let delta_bar = if curve.eval(one) >= one {
        one
    } else {
        let (mut a, mut b) = (T::zero(), one);
        for _ in 0..200 {
            let mid = (a + b) / T::lit(2.0);
            if !(mid > a && mid < b) {
                break;
            }
            if curve.eval(mid) >= mid {
                a = mid;
            } else {
                b = mid;
            }
        }
        if curve.eval(b) == T::zero() {
            T::zero()
        } else {
            a
        }
    };

    let mut iterates = vec![one];
    let tol = T::audit_tol();
    for step in 1..=max_iter {
        let prev = *iterates.last().expect("nonempty");
        let next = curve.eval(prev).min(one);
        if next > prev + tol * prev {
            return Err(Error::NotContractive { step });
        }
        iterates.push(next);
        if prev - next <= T::epsilon() * prev {
            break;
        }
    }
    Ok(FixedPoint { delta_bar, gamma, iterates })
}

/// `c_{gamma,q} = 1 / (1 - q^{-(1 - gamma)})`.
pub fn tail_constant<T: Real>(gamma: T, q: T) -> T {
    T::one() / (T::one() - q.powf(-(T::one() - gamma)))
}

/// `sum_{delta_j >= delta} psi(delta_j) / delta_j` over the grid points.
pub fn geometric_tail_sum<T: Real>(curve: &ComplexityCurve<T>, delta: T, grid: &GeometricGrid<T>) -> Result<T> {
    let idx = grid.index_of(delta).ok_or_else(|| Error::OffGrid(delta.as_f64()))?;
    Ok(grid.points()[..=idx].iter().map(|&d| curve.eval(d) / d).fold(T::zero(), |a, b| a + b))
}
