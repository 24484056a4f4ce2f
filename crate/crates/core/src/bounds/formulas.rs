use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::transform::{flat_q, sharp, sharp_q_table, ComplexityCurve, GeometricGrid, GridTable, Shape};

/// Constants of the bound family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants<T> {
    /// Grid ratio `q > 1`.
    pub q: T,
    /// Multiplier of the distribution-dependent bound `U_bar`.
    pub k_bar: T,
    /// Multiplier of the data-dependent bound `U_hat`.
    pub k_hat: T,
    /// Argument dilation inside `U_hat`.
    pub c_hat: T,
    /// Multiplier of the reference bound `U_tilde`.
    pub k_tilde: T,
    /// Argument dilation inside `U_tilde`.
    pub c_tilde: T,
    /// Multiplier of the envelope bound `U_check`.
    pub k_check: T,
    /// Level at which `U_bar`, `U_hat`, `U_tilde` are inverted; `None` means
    /// `1 / (2 q^3)`.
    pub kappa_w: Option<T>,
}

impl<T: Real> Default for BoundConstants<T> {
    fn default() -> Self {
        Self {
            q: T::lit(2.0),
            k_bar: T::lit(2.0),
            k_hat: T::lit(2.0),
            c_hat: T::lit(1.5),
            k_tilde: T::lit(8.0),
            c_tilde: T::lit(3.0),
            k_check: T::lit(4.0),
            kappa_w: None,
        }
    }
}

impl<T: Real> BoundConstants<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::BadParams(msg));
        if !(self.q > T::one()) {
            return bad(format!("q = {} must exceed 1", self.q));
        }
        if !(self.k_hat >= T::lit(2.0) && self.k_tilde >= self.k_hat) {
            return bad(format!("need 2 <= K_hat <= K_tilde, got {} and {}", self.k_hat, self.k_tilde));
        }
        if !(self.c_hat >= T::one() && self.c_tilde >= T::one()) {
            return bad(format!("dilations must be >= 1, got {} and {}", self.c_hat, self.c_tilde));
        }
        if !(self.k_bar > T::zero() && self.k_check > T::zero()) {
            return bad("K_bar and K_check must be positive".into());
        }
        if let Some(k) = self.kappa_w {
            if !(k > T::zero()) {
                return bad(format!("kappa_w = {k} must be positive"));
            }
        }
        Ok(())
    }

    /// Inversion level of the bound family.
    pub fn family_level(&self) -> T {
        self.kappa_w.unwrap_or_else(|| T::one() / (T::lit(2.0) * self.q.powi(3)))
    }
}

/// `phi + sqrt(2 (t/n) (D^2 + 2 phi)) + t / (2n)`.
pub fn u_n_value<T: Real>(phi: T, d: T, t: T, n: usize) -> T {
    let r = t / T::count(n);
    let two = T::lit(2.0);
    phi + (two * r * (d * d + two * phi)).sqrt() + r / two
}

/// `k (phi + D sqrt(t/n) + t/n)`.
pub fn linear_bound_value<T: Real>(k: T, phi: T, d: T, t: T, n: usize) -> T {
    let r = t / T::count(n);
    k * (phi + d * r.sqrt() + r)
}

fn check_inputs<T: Real>(t: T, n: usize) -> Result<()> {
    if n == 0 || !(t > T::zero()) {
        return Err(Error::BadParams(format!("need n > 0 and t > 0, got n = {n}, t = {t}")));
    }
    Ok(())
}

/// `U_n(delta; t)` tabulated from `phi_n` and `D` tables on the same grid.
pub fn u_n<T: Real>(phi: &GridTable<T>, d: &GridTable<T>, t: T, n: usize) -> Result<GridTable<T>> {
    check_inputs(t, n)?;
    if phi.grid != d.grid {
        return Err(Error::GridMismatch);
    }
    let values = phi.values.iter().zip(&d.values).map(|(p, dd)| u_n_value(*p, *dd, t, n)).collect();
    GridTable::new(phi.grid.clone(), values)
}

/// `V_n = U_n^{flat, q}`.
pub fn v_n<T: Real>(u: &GridTable<T>) -> GridTable<T> {
    flat_q(u)
}

/// `delta_n(t) = U_n^{sharp, q}(1 / (2q))` restricted to `(0, 1]`.
pub fn delta_n<T: Real>(u: &GridTable<T>) -> Result<T> {
    let q = u.grid.q();
    sharp_q_table(u, T::one() / (T::lit(2.0) * q), true)
}

/// Localized complexities feeding the bound family, as functions of `delta`.
pub struct FamilyInputs<'a, T> {
    pub phi: &'a dyn Fn(T) -> T,
    pub diam: &'a dyn Fn(T) -> T,
    pub phi_hat: Option<&'a dyn Fn(T) -> T>,
    pub diam_hat: Option<&'a dyn Fn(T) -> T>,
}

/// Tables and transforms of `U_bar`, `U_hat` and `U_tilde`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyBounds<T> {
    pub u_bar: GridTable<T>,
    pub u_hat: Option<GridTable<T>>,
    pub u_tilde: GridTable<T>,
    pub delta_bar: T,
    pub delta_hat: Option<T>,
    pub delta_tilde: T,
}

pub fn delta_family<T: Real>(
    inputs: &FamilyInputs<'_, T>,
    grid: &GeometricGrid<T>,
    consts: &BoundConstants<T>,
    t: T,
    n: usize,
) -> Result<FamilyBounds<T>> {
    consts.validate()?;
    check_inputs(t, n)?;
    let level = consts.family_level();
    let u_bar = GridTable::tabulate(grid, |d| linear_bound_value(consts.k_bar, (inputs.phi)(d), (inputs.diam)(d), t, n));
    let u_tilde = GridTable::tabulate(grid, |d| {
        let s = consts.c_tilde * d;
        linear_bound_value(consts.k_tilde, (inputs.phi)(s), (inputs.diam)(s), t, n)
    });
    let u_hat = match (inputs.phi_hat, inputs.diam_hat) {
        (Some(ph), Some(dh)) => Some(GridTable::tabulate(grid, |d| {
            let s = consts.c_hat * d;
            linear_bound_value(consts.k_hat, ph(s), dh(s), t, n)
        })),
        (None, None) => None,
        _ => return Err(Error::BadParams("phi_hat and D_hat must be supplied together".into())),
    };
    let delta_bar = sharp_q_table(&u_bar, level, true)?;
    let delta_tilde = sharp_q_table(&u_tilde, level, true)?;
    let delta_hat = u_hat.as_ref().map(|u| sharp_q_table(u, level, true)).transpose()?;
    Ok(FamilyBounds { u_bar, u_hat, u_tilde, delta_bar, delta_hat, delta_tilde })
}

/// `delta_hat_n(t)` alone, from empirical profiles.
pub fn delta_hat<T: Real>(
    phi_hat: &dyn Fn(T) -> T,
    diam_hat: &dyn Fn(T) -> T,
    grid: &GeometricGrid<T>,
    consts: &BoundConstants<T>,
    t: T,
    n: usize,
) -> Result<T> {
    consts.validate()?;
    check_inputs(t, n)?;
    let u_hat = GridTable::tabulate(grid, |d| {
        let s = consts.c_hat * d;
        linear_bound_value(consts.k_hat, phi_hat(s), diam_hat(s), t, n)
    });
    sharp_q_table(&u_hat, consts.family_level(), true)
}

/// `U_check = K_check (phi_env + D_env sqrt(t/n) + t/n)` and its continuous
/// sharp transform at `1/q`.
///
/// `phi_env` must be strictly concave type and `d_env` concave type; when
/// raw tables are supplied the envelopes must dominate them on their grid.
pub fn u_check_concave<T: Real>(
    phi_env: &ComplexityCurve<T>,
    d_env: &ComplexityCurve<T>,
    consts: &BoundConstants<T>,
    t: T,
    n: usize,
    raw: Option<(&GridTable<T>, &GridTable<T>)>,
) -> Result<(ComplexityCurve<T>, T)> {
    consts.validate()?;
    check_inputs(t, n)?;
    if !matches!(phi_env.shape(), Shape::StrictlyConcaveType { .. }) {
        return Err(Error::ShapeMismatch { required: "strictly-concave-type" });
    }
    if !d_env.shape().is_concave() {
        return Err(Error::ShapeMismatch { required: "concave-type" });
    }
    if let Some((phi_raw, d_raw)) = raw {
        let tol = T::audit_tol();
        for (env, tab) in [(phi_env, phi_raw), (d_env, d_raw)] {
            for (x, v) in tab.points().iter().zip(&tab.values) {
                if env.eval(*x) < *v - tol * v.abs() {
                    return Err(Error::EnvelopeViolated { at: x.as_f64() });
                }
            }
        }
    }
    let (p, d, k) = (phi_env.clone(), d_env.clone(), consts.k_check);
    let curve = ComplexityCurve::concave(move |x: T| linear_bound_value(k, p.eval(x), d.eval(x), t, n)).unbounded();
    let delta = sharp(&curve, T::one() / consts.q)?;
    Ok((curve, delta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_n_example() {
        let v = u_n_value(0.1, 0.2, 2.0, 100);
        let oracle = 0.1 + (2.0_f64 * 0.02 * (0.04 + 0.2)).sqrt() + 0.01;
        assert!((v - oracle).abs() < 1e-15);
        assert!((v - 0.207980).abs() < 1e-6);
    }

    #[test]
    fn zero_complexity_gives_floor() {
        let (n, t) = (1000, 2.0);
        let grid = GeometricGrid::for_sample(2.0, n, t).unwrap();
        let zero = GridTable::tabulate(&grid, |_| 0.0);
        let u = u_n(&zero, &zero, t, n).unwrap();
        let d = delta_n(&u).unwrap();
        assert!(d >= t / n as f64);
        assert!(d <= 2.0 * 2.0 * t / n as f64);
    }

    #[test]
    fn grid_mismatch_rejected() {
        let a = GridTable::tabulate(&GeometricGrid::new(2.0, -1, 5).unwrap(), |_| 0.0);
        let b = GridTable::tabulate(&GeometricGrid::new(2.0, -1, 6).unwrap(), |_| 0.0);
        assert_eq!(u_n(&a, &b, 1.0, 10), Err(Error::GridMismatch));
    }

    #[test]
    fn u_check_of_zero_envelopes() {
        let consts = BoundConstants::<f64>::default();
        let zero = ComplexityCurve::strictly_concave(0.5, |_| 0.0).unwrap();
        let (_, d) = u_check_concave(&zero, &ComplexityCurve::constant(0.0), &consts, 1.0, 300, None).unwrap();
        assert!((d - 4.0 * 2.0 / 300.0).abs() < 1e-12);
    }

    #[test]
    fn u_check_of_root_envelopes() {
        let consts = BoundConstants::<f64>::default();
        let (t, n) = (1.0, 300);
        let phi = ComplexityCurve::strictly_concave(0.5, |d: f64| (3.0 * d / 300.0).sqrt()).unwrap();
        let dd = ComplexityCurve::strictly_concave(0.5, |d: f64| 2.0 * d.sqrt()).unwrap();
        let (_, got) = u_check_concave(&phi, &dd, &consts, t, n, None).unwrap();
        let g = |d: f64| 4.0 * ((3.0 * d / 300.0).sqrt() + 2.0 * d.sqrt() * (t / 300.0).sqrt() + t / 300.0) / d - 0.5;
        let (mut a, mut b) = (1e-9, 1e3);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if g(m) > 0.0 {
                a = m
            } else {
                b = m
            }
        }
        assert!((got - b).abs() < 1e-9 * b);
    }

    #[test]
    fn envelope_must_dominate() {
        let consts = BoundConstants::<f64>::default();
        let grid = GeometricGrid::new(2.0, 0, 4).unwrap();
        let raw = GridTable::tabulate(&grid, |_| 1.0);
        let zero = ComplexityCurve::strictly_concave(0.5, |_| 0.0).unwrap();
        let r = u_check_concave(&zero, &ComplexityCurve::constant(0.0), &consts, 1.0, 10, Some((&raw, &raw)));
        assert!(matches!(r, Err(Error::EnvelopeViolated { .. })));
    }

    #[test]
    fn delta_hat_matches_family() {
        let consts = BoundConstants::<f64>::default();
        let (t, n) = (2.0, 400);
        let grid = GeometricGrid::for_sample(2.0, n, t).unwrap();
        let phi = |d: f64| (d / 400.0).sqrt();
        let diam = |d: f64| d.sqrt();
        let inputs = FamilyInputs { phi: &phi, diam: &diam, phi_hat: Some(&phi), diam_hat: Some(&diam) };
        let family = delta_family(&inputs, &grid, &consts, t, n).unwrap();
        assert_eq!(Some(delta_hat(&phi, &diam, &grid, &consts, t, n).unwrap()), family.delta_hat);
    }

    #[test]
    fn constants_validated() {
        let c = BoundConstants::<f64> { k_hat: 1.0, ..Default::default() };
        assert!(c.validate().is_err());
        assert!((BoundConstants::<f64>::default().family_level() - 1.0 / 16.0).abs() < 1e-15);
    }
}
