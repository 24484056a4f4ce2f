use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Geometric grid `delta_j = q^{-j}` for `j_min <= j <= j_max`.
///
/// Points are stored from the largest (`j_min`) to the smallest (`j_max`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometricGrid<T> {
    q: T,
    j_min: i32,
    j_max: i32,
}

impl<T: Real> GeometricGrid<T> {
    pub fn new(q: T, j_min: i32, j_max: i32) -> Result<Self> {
        if !(q > T::one()) || !q.is_finite() {
            return Err(Error::EmptyGrid(format!("ratio q = {q} must exceed 1")));
        }
        if j_min > j_max {
            return Err(Error::EmptyGrid(format!("j_min = {j_min} > j_max = {j_max}")));
        }
        Ok(Self { q, j_min, j_max })
    }

    /// Default grid for sample size `n` and confidence level `t`:
    /// `j` from `-1` to `ceil(log_q(n / t)) + 2`.
    pub fn for_sample(q: T, n: usize, t: T) -> Result<Self> {
        if n == 0 || !(t > T::zero()) {
            return Err(Error::BadParams(format!("need n > 0 and t > 0, got n = {n}, t = {t}")));
        }
        if !(q > T::one()) {
            return Err(Error::EmptyGrid(format!("ratio q = {q} must exceed 1")));
        }
        let top = ((T::count(n) / t).ln() / q.ln()).ceil().to_i32().unwrap_or(0) + 2;
        Self::new(q, -1, top.max(0))
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn len(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `q^{-j}`.
    pub fn point(&self, j: i32) -> T {
        self.q.powi(-j)
    }

    /// Points in storage order, largest first.
    pub fn points(&self) -> Vec<T> {
        (self.j_min..=self.j_max).map(|j| self.point(j)).collect()
    }

    pub fn contains_unit(&self) -> bool {
        self.j_min <= 0 && 0 <= self.j_max
    }

    /// Storage index of the grid point equal to `delta` (relative tolerance
    /// `1e-9`), if any.
    pub fn index_of(&self, delta: T) -> Option<usize> {
        if !(delta > T::zero()) {
            return None;
        }
        let j = (-(delta.ln() / self.q.ln())).round().to_i32()?;
        if j < self.j_min || j > self.j_max {
            return None;
        }
        let p = self.point(j);
        ((p - delta).abs() <= T::lit(1e-9) * p).then(|| (j - self.j_min) as usize)
    }
}

/// Values indexed by a geometric grid, in the grid's storage order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridTable<T> {
    pub grid: GeometricGrid<T>,
    pub values: Vec<T>,
}

impl<T: Real> GridTable<T> {
    pub fn new(grid: GeometricGrid<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, values })
    }

    /// Tabulates `f` at every grid point.
    pub fn tabulate(grid: &GeometricGrid<T>, f: impl Fn(T) -> T) -> Self {
        let values = grid.points().into_iter().map(f).collect();
        Self { grid: grid.clone(), values }
    }

    pub fn points(&self) -> Vec<T> {
        self.grid.points()
    }

    /// Value at the grid point equal to `delta`.
    pub fn at(&self, delta: T) -> Result<T> {
        self.grid
            .index_of(delta)
            .map(|i| self.values[i])
            .ok_or_else(|| Error::OffGrid(delta.as_f64()))
    }
}
