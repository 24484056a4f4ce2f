use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::transform::ComplexityCurve;

/// Analytic upper bounds on `E ||R_n||` over a localized class, as functions
/// of `delta = sigma^2`.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundCurveParams<T> {
    /// Linear span of dimension `d`: `sqrt(delta d / n)`.
    FiniteDim { d: T },
    /// Covering numbers `(A ||F|| / eps)^V`, envelope bounded by `u`.
    VcType { v: T, a: T, u: T, f_norm: T },
    /// Entropy `(A ||F|| / eps)^{2 rho}`.
    Entropy { rho: T, a: T, u: T, f_norm: T },
    /// Convex hull of a VC-type class; entropy exponent `rho = V / (V + 2)`.
    ConvexHull { v: T, a: T, u: T, f_norm: T },
    /// `sqrt(delta E log Delta / n) + E log Delta / n` for binary classes.
    Shattering { expected_log_delta: T },
    /// Mendelson's bound from operator eigenvalues.
    Mendelson { eigenvalues: Vec<T> },
}

fn positive<T: Real>(name: &str, x: T) -> Result<()> {
    if x > T::zero() && x.is_finite() {
        Ok(())
    } else {
        Err(Error::BadParams(format!("{name} = {x} must be positive and finite")))
    }
}

fn entropy_curve<T: Real>(rho: T, a: T, u: T, f_norm: T, n: T, k: T) -> Result<ComplexityCurve<T>> {
    if !(rho > T::zero() && rho < T::one()) {
        return Err(Error::BadParams(format!("rho = {rho} must lie in (0, 1)")));
    }
    positive("A", a)?;
    positive("U", u)?;
    positive("||F||", f_norm)?;
    let one = T::one();
    let lead = (a * f_norm).powf(rho) / n.sqrt();
    let floor = (a * f_norm).powf(T::lit(2.0) * rho / (rho + one)) * u.powf((one - rho) / (one + rho))
        / n.powf(one / (one + rho));
    let exponent = (one - rho) / T::lit(2.0);
    Ok(ComplexityCurve::concave(move |d: T| k * (lead * d.powf(exponent)).max(floor)).unbounded())
}

/// Builds the curve for `params` at sample size `n` with leading constant `k`.
///
/// The VC-type bound is not monotone as written (its second term decreases
/// in `delta`), so its running maximum over `delta >= 1/n` is used instead;
/// the result is tagged as an envelope.
pub fn bound_curve<T: Real>(params: &BoundCurveParams<T>, n: usize, k: T) -> Result<ComplexityCurve<T>> {
    if n == 0 {
        return Err(Error::BadParams("n must be positive".into()));
    }
    positive("K", k)?;
    let nn = T::count(n);
    match params.clone() {
        BoundCurveParams::FiniteDim { d } => {
            if !(d >= T::zero()) {
                return Err(Error::BadParams(format!("d = {d} must be nonnegative")));
            }
            ComplexityCurve::strictly_concave(T::lit(0.5), move |delta: T| k * (delta * d / nn).sqrt())
                .map(ComplexityCurve::unbounded)
        }
        BoundCurveParams::VcType { v, a, u, f_norm } => {
            positive("V", v)?;
            positive("A", a)?;
            positive("U", u)?;
            positive("||F||", f_norm)?;
            let half = T::lit(0.5);
            let af = a * f_norm;
            let log_term = move |s: T| (af.ln() - half * s.ln()).max(T::zero());
            let f1 = move |s: T| (v * s / nn).sqrt() * log_term(s).sqrt();
            let f2 = move |s: T| v * u / nn * log_term(s);
            let s0 = T::one() / nn;
            let peak = (af * af * (-T::one()).exp()).max(s0);
            let base = f2(s0).max(f1(s0));
            Ok(ComplexityCurve::concave(move |d: T| k * base.max(f1(d.max(s0).min(peak)))).unbounded().mark_envelope())
        }
        BoundCurveParams::Entropy { rho, a, u, f_norm } => entropy_curve(rho, a, u, f_norm, nn, k),
        BoundCurveParams::ConvexHull { v, a, u, f_norm } => {
            positive("V", v)?;
            entropy_curve(v / (v + T::lit(2.0)), a, u, f_norm, nn, k)
        }
        BoundCurveParams::Shattering { expected_log_delta: e } => {
            if !(e >= T::zero()) {
                return Err(Error::BadParams(format!("E log Delta = {e} must be nonnegative")));
            }
            ComplexityCurve::strictly_concave(T::lit(0.5), move |d: T| k * ((d * e / nn).sqrt() + e / nn))
                .map(ComplexityCurve::unbounded)
        }
        BoundCurveParams::Mendelson { eigenvalues } => {
            if eigenvalues.iter().any(|l| !(*l >= T::zero()) || !l.is_finite()) {
                return Err(Error::BadParams("eigenvalues must be finite and nonnegative".into()));
            }
            ComplexityCurve::strictly_concave(T::lit(0.5), move |d: T| {
                k * (eigenvalues.iter().fold(T::zero(), |acc, l| acc + l.min(d)) / nn).sqrt()
            })
            .map(ComplexityCurve::unbounded)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::{flat, sharp};

    #[test]
    fn finite_dim_value() {
        let c = bound_curve(&BoundCurveParams::FiniteDim { d: 3.0 }, 100, 1.0).unwrap();
        assert!((c.eval(0.12_f64) - 0.06).abs() < 1e-12);
    }

    #[test]
    fn entropy_value() {
        let p = BoundCurveParams::Entropy { rho: 0.5, a: 1.0, u: 1.0, f_norm: 1.0 };
        let c = bound_curve(&p, 100, 1.0).unwrap();
        let oracle = (0.2_f64.sqrt() / 10.0).max(100f64.powf(-2.0 / 3.0));
        assert!((c.eval(0.04) - oracle).abs() < 1e-12);
        assert!((c.eval(0.04) - 0.046416).abs() < 1e-6);
    }

    #[test]
    fn convex_hull_uses_derived_exponent() {
        let hull = bound_curve(&BoundCurveParams::ConvexHull { v: 2.0, a: 1.0, u: 1.0, f_norm: 1.0 }, 50, 1.0).unwrap();
        let ent = bound_curve(&BoundCurveParams::Entropy { rho: 0.5, a: 1.0, u: 1.0, f_norm: 1.0 }, 50, 1.0).unwrap();
        for d in [0.01, 0.2, 0.9_f64] {
            assert_eq!(hull.eval(d), ent.eval(d));
        }
    }

    #[test]
    fn vc_envelope_is_concave_type() {
        let p = BoundCurveParams::VcType { v: 2.0, a: 1.0, u: 1.0, f_norm: 1.0 };
        let c = bound_curve(&p, 200, 1.0_f64).unwrap();
        assert!(c.is_envelope());
        assert!(flat(&c, 1e-3).is_ok());
        assert!(sharp(&c, 0.5).unwrap().is_finite());
    }

    #[test]
    fn finite_dim_sharp_inverts() {
        let c = bound_curve(&BoundCurveParams::FiniteDim { d: 3.0 }, 300, 1.0).unwrap();
        let eps = 0.03125_f64;
        assert!((sharp(&c, eps).unwrap() - 3.0 / (300.0 * eps * eps)).abs() < 1e-9);
    }

    #[test]
    fn invalid_parameters() {
        let p = BoundCurveParams::Entropy { rho: 1.5, a: 1.0, u: 1.0, f_norm: 1.0 };
        assert!(matches!(bound_curve(&p, 10, 1.0), Err(Error::BadParams(_))));
        assert!(bound_curve(&BoundCurveParams::FiniteDim { d: 1.0 }, 0, 1.0).is_err());
    }
}
