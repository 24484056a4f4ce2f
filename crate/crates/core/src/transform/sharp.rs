use crate::error::{Error, Result};
use crate::scalar::Real;

use super::curve::ComplexityCurve;
use super::grid::{GeometricGrid, GridTable};

/// Evaluation grid used by the continuous transforms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformSettings<T> {
    /// Smallest abscissa examined.
    pub lo: T,
    /// Largest abscissa examined when the curve has no cap.
    pub hi: T,
    /// Resolution of the dyadic evaluation grid.
    pub points_per_octave: u32,
}

impl<T: Real> Default for TransformSettings<T> {
    fn default() -> Self {
        Self { lo: T::lit(1e-12), hi: T::lit(1e12), points_per_octave: 64 }
    }
}

const BISECTION_STEPS: usize = 200;

impl<T: Real> TransformSettings<T> {
    /// Sorted abscissae in `[from, upper]`: dyadic points `2^{k/m}`, the
    /// endpoints and any curve breakpoints in range.
    fn abscissae(&self, curve: &ComplexityCurve<T>, from: T) -> Vec<T> {
        let upper = curve.cap().unwrap_or(self.hi);
        if !(upper > from) {
            return vec![from];
        }
        let m = self.points_per_octave.max(1) as i64;
        let two = T::lit(2.0);
        let k0 = (from.log2() * T::count(m as usize)).ceil().to_i64().unwrap_or(0);
        let k1 = (upper.log2() * T::count(m as usize)).floor().to_i64().unwrap_or(0);
        let mut xs = Vec::with_capacity((k1 - k0 + 3).max(2) as usize);
        xs.push(from);
        for k in k0..=k1 {
            let (whole, frac) = (k.div_euclid(m), k.rem_euclid(m));
            let x = two.powi(whole as i32) * (T::count(frac as usize) / T::count(m as usize)).exp2();
            if x > from && x < upper {
                xs.push(x);
            }
        }
        xs.push(upper);
        xs.extend(curve.breakpoints().iter().copied().filter(|b| *b > from && *b < upper));
        xs.sort_by(|a, b| a.partial_cmp(b).expect("finite abscissae"));
        xs.dedup();
        xs
    }
}

/// `psi_flat(delta) = sup_{sigma >= delta} psi(sigma) / sigma`.
///
/// The supremum runs over the evaluation grid; for concave-type curves it is
/// exactly `psi(delta) / delta`. The declared shape is audited on the grid.
pub fn flat<T: Real>(curve: &ComplexityCurve<T>, delta: T) -> Result<T> {
    flat_with(curve, delta, &TransformSettings::default())
}

pub fn flat_with<T: Real>(curve: &ComplexityCurve<T>, delta: T, settings: &TransformSettings<T>) -> Result<T> {
    if !(delta > T::zero()) {
        return Err(Error::BadParams(format!("flat transform needs delta > 0, got {delta}")));
    }
    let xs = settings.abscissae(curve, delta);
    let vs: Vec<T> = xs.iter().map(|&x| curve.eval(x)).collect();
    curve.audit(&xs, &vs)?;
    if curve.shape().is_concave() {
        return Ok(vs[0] / xs[0]);
    }
    Ok(xs.iter().zip(&vs).map(|(x, v)| *v / *x).fold(T::zero(), T::max))
}

/// `psi_sharp(eps) = inf { delta > 0 : psi_flat(delta) <= eps }`.
///
/// For concave-type curves the crossing is refined by bisection; otherwise the
/// smallest qualifying evaluation point is returned. When nothing qualifies
/// the result is the domain cap, or `+inf` for an uncapped curve.
pub fn sharp<T: Real>(curve: &ComplexityCurve<T>, eps: T) -> Result<T> {
    sharp_with(curve, eps, &TransformSettings::default())
}

pub fn sharp_with<T: Real>(curve: &ComplexityCurve<T>, eps: T, settings: &TransformSettings<T>) -> Result<T> {
    if !(eps > T::zero()) {
        return Err(Error::BadParams(format!("sharp transform needs eps > 0, got {eps}")));
    }
    let xs = settings.abscissae(curve, settings.lo);
    let vs: Vec<T> = xs.iter().map(|&x| curve.eval(x)).collect();
    curve.audit(&xs, &vs)?;

    let mut suffix = vec![T::zero(); xs.len()];
    let mut running = T::zero();
    for i in (0..xs.len()).rev() {
        running = running.max(vs[i] / xs[i]);
        suffix[i] = running;
    }
    let i = suffix.partition_point(|m| *m > eps);
    if i == xs.len() {
        return Ok(curve.cap().unwrap_or_else(T::infinity));
    }
    if vs[i] == T::zero() && i == 0 {
        return Ok(T::zero());
    }
    if !curve.shape().is_concave() {
        return Ok(xs[i]);
    }
    let (mut a, mut b) = if i == 0 { (T::zero(), xs[0]) } else { (xs[i - 1], xs[i]) };
    let qualifies = |d: T| curve.eval(d) / d <= eps;
    for _ in 0..BISECTION_STEPS {
        let mid = (a + b) / T::lit(2.0);
        if !(mid > a && mid < b) {
            break;
        }
        if qualifies(mid) {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(b)
}

/// Discretized flat transform on a grid: entry `j` is
/// `max_{i <= j} psi(delta_i) / delta_i`.
pub fn flat_q<T: Real>(table: &GridTable<T>) -> GridTable<T> {
    let mut running = T::zero();
    let values = table
        .points()
        .iter()
        .zip(&table.values)
        .map(|(d, v)| {
            running = running.max(*v / *d);
            running
        })
        .collect();
    GridTable { grid: table.grid.clone(), values }
}

/// Discretized sharp transform of a curve on `grid`.
///
/// With `restrict_unit` the supremum only runs over grid points in `(0, 1]`
/// and the result is 1 when no such point qualifies.
pub fn sharp_q<T: Real>(curve: &ComplexityCurve<T>, eps: T, grid: &GeometricGrid<T>, restrict_unit: bool) -> Result<T> {
    let table = GridTable::tabulate(grid, |d| curve.eval(d));
    let mut xs = table.points();
    let mut vs = table.values.clone();
    xs.reverse();
    vs.reverse();
    curve.audit(&xs, &vs)?;
    sharp_q_table(&table, eps, restrict_unit)
}

/// Discretized sharp transform of tabulated values.
///
/// Returns the infimum of the qualifying set, which is the grid point just
/// below the last qualifying cell, or 0 when every cell qualifies.
pub fn sharp_q_table<T: Real>(table: &GridTable<T>, eps: T, restrict_unit: bool) -> Result<T> {
    if !(eps > T::zero()) {
        return Err(Error::BadParams(format!("sharp transform needs eps > 0, got {eps}")));
    }
    let grid = &table.grid;
    if restrict_unit && !grid.contains_unit() {
        return Err(Error::EmptyGrid("restricted transform needs the unit point".into()));
    }
    let start = if restrict_unit { (-grid.j_min()) as usize } else { 0 };
    let points = grid.points();
    let mut running = T::zero();
    let mut first_bad = points.len();
    for (i, (v, d)) in table.values.iter().zip(&points).enumerate().skip(start) {
        running = running.max(*v / *d);
        if running > eps {
            first_bad = i;
            break;
        }
    }
    if first_bad == start {
        return Ok(if restrict_unit { T::one() } else { T::infinity() });
    }
    if first_bad == points.len() {
        return Ok(T::zero());
    }
    Ok(points[first_bad])
}
