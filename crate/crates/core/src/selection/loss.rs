use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::class::{FunctionClass, Member};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::transform::{ComplexityCurve, Shape};

/// Design point paired with a response.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Labeled<X> {
    pub x: X,
    pub y: f64,
}

/// Lower bound on the midpoint convexity gap of the loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ConvexityModulus {
    /// Gap `>= lambda |u - v|^2`.
    Quadratic { lambda: f64 },
    /// Gap `>= psi(|u - v|^r)` with linear `psi(x) = lambda x`, `r` in `(0, 2]`.
    Power { lambda: f64, r: f64 },
}

impl ConvexityModulus {
    pub fn lambda(self) -> f64 {
        match self {
            ConvexityModulus::Quadratic { lambda } | ConvexityModulus::Power { lambda, .. } => lambda,
        }
    }

    pub fn r(self) -> f64 {
        match self {
            ConvexityModulus::Quadratic { .. } => 2.0,
            ConvexityModulus::Power { r, .. } => r,
        }
    }

    /// Required gap at distance `d`.
    pub fn gap(self, d: f64) -> f64 {
        self.lambda() * d.powf(self.r())
    }

    /// `psi^{-1}(delta / 2)`.
    pub fn psi_inv_half(self, delta: f64) -> f64 {
        delta / (2.0 * self.lambda())
    }
}

type Loss = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Audited description of a loss `l(y, u)`.
#[derive(Clone)]
pub struct LossClassMeta {
    loss: Loss,
    /// Lipschitz constant in `u`.
    pub lipschitz: f64,
    pub modulus: ConvexityModulus,
    /// Range of admissible predictions `u`.
    pub u_range: (f64, f64),
    /// Responses examined by the audit.
    pub y_values: Vec<f64>,
    /// Upper bound on the loss; values are divided by it to land in `[0, 1]`.
    pub bound: f64,
    /// Base-class VC parameter when the class is a convex hull.
    pub vc: Option<f64>,
}

impl std::fmt::Debug for LossClassMeta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LossClassMeta")
            .field("lipschitz", &self.lipschitz)
            .field("modulus", &self.modulus)
            .field("u_range", &self.u_range)
            .field("bound", &self.bound)
            .field("vc", &self.vc)
            .finish()
    }
}

const AUDIT_POINTS: usize = 33;

impl LossClassMeta {
    /// Builds and audits a loss on the `(y, u, v)` lattice.
    pub fn new(
        loss: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        lipschitz: f64,
        modulus: ConvexityModulus,
        u_range: (f64, f64),
        y_values: Vec<f64>,
        bound: f64,
    ) -> Result<Self> {
        let (lo, hi) = u_range;
        if !(lo < hi) || !(lipschitz > 0.0) || !(bound > 0.0) || y_values.is_empty() {
            return Err(Error::BadParams("need lo < hi, L > 0, bound > 0 and some responses".into()));
        }
        let (lambda, r) = (modulus.lambda(), modulus.r());
        if !(lambda > 0.0) || !(r > 0.0 && r <= 2.0) {
            return Err(Error::BadParams(format!("need lambda > 0 and r in (0, 2], got {lambda}, {r}")));
        }
        let meta = Self { loss: Arc::new(loss), lipschitz, modulus, u_range, y_values, bound, vc: None };
        meta.audit()?;
        Ok(meta)
    }

    /// `l(y, u) = (y - u)^2` on `[0, 1]` with `L = 2`, `Lambda = 1/4`.
    pub fn squared() -> Self {
        let ys = (0..=16).map(|i| i as f64 / 16.0).collect();
        Self::new(|y, u| (y - u) * (y - u), 2.0, ConvexityModulus::Quadratic { lambda: 0.25 }, (0.0, 1.0), ys, 1.0)
            .expect("squared loss passes its audit")
    }

    pub fn with_vc(mut self, v: f64) -> Self {
        self.vc = Some(v);
        self
    }

    pub fn loss(&self, y: f64, u: f64) -> f64 {
        (self.loss)(y, u)
    }

    /// Width `M` of the prediction range.
    pub fn m(&self) -> f64 {
        self.u_range.1 - self.u_range.0
    }

    fn audit(&self) -> Result<()> {
        let (lo, hi) = self.u_range;
        let us: Vec<f64> = (0..AUDIT_POINTS).map(|i| lo + (hi - lo) * i as f64 / (AUDIT_POINTS - 1) as f64).collect();
        let slack = |x: f64| 1e-9 * (1.0 + x.abs());
        for &y in &self.y_values {
            for &u in &us {
                let lu = self.loss(y, u);
                if !(lu >= -slack(0.0) && lu <= self.bound + slack(self.bound)) {
                    return Err(Error::BadParams(format!("loss({y}, {u}) = {lu} outside [0, {}]", self.bound)));
                }
                for &v in &us {
                    let lv = self.loss(y, v);
                    let d = (u - v).abs();
                    if (lu - lv).abs() > self.lipschitz * d + slack(lu) {
                        return Err(Error::LipschitzViolated { y, u, v });
                    }
                    let gap = 0.5 * (lu + lv) - self.loss(y, 0.5 * (u + v));
                    if gap < self.modulus.gap(d) - slack(lu + lv) {
                        return Err(Error::ConvexityViolated { y, u, v });
                    }
                }
            }
        }
        Ok(())
    }
}

/// Loss class `{(x, y) -> l(y, g(x)) / bound : g in G}`, keeping labels and
/// parameters of the base members.
pub fn loss_class<X: 'static>(meta: &LossClassMeta, base: &FunctionClass<X>) -> Result<FunctionClass<Labeled<X>>> {
    let members = (0..base.len())
        .map(|i| {
            let g = base.shared(i);
            let (loss, scale) = (meta.loss.clone(), 1.0 / meta.bound);
            let member = Member::new(g.label().to_owned(), move |p: &Labeled<X>| loss(p.y, g.eval(&p.x)) * scale);
            match base.member(i).params() {
                Some(ps) => member.with_params(ps.to_vec()),
                None => member,
            }
        })
        .collect();
    FunctionClass::new(members)
}

/// `W_bar(delta) = C [L theta(s) + L sqrt(s (t + 1) / n) + t / n]` with
/// `s = M^{2-r} psi^{-1}(delta / 2)`, an upper bound on `U_bar` of the loss
/// class built from the modulus `theta` of the base class.
pub fn w_bar_curve(
    meta: &LossClassMeta,
    theta: &ComplexityCurve<f64>,
    c: f64,
    t: f64,
    n: usize,
) -> Result<ComplexityCurve<f64>> {
    if n == 0 || !(t >= 0.0) || !(c > 0.0) {
        return Err(Error::BadParams("need n > 0, t >= 0 and C > 0".into()));
    }
    let (l, modulus) = (meta.lipschitz, meta.modulus);
    let scale = meta.m().powf(2.0 - modulus.r());
    let nf = n as f64;
    let theta = theta.clone();
    let shape = if theta.shape().is_concave() { Shape::ConcaveType } else { Shape::Arbitrary };
    Ok(ComplexityCurve::new(shape, move |delta: f64| {
        let s = scale * modulus.psi_inv_half(delta);
        c * (l * theta.eval(s) + l * (s * (t + 1.0) / nf).sqrt() + t / nf)
    }))
}

/// `pi_n(M, L, Lambda; t) =
/// C [Lambda M^{V/(V+1)} (L/Lambda v 1)^{(V+2)/(V+1)} n^{-(V+2)/(2(V+1))} + (L^2 t + 1) / (Lambda n)]`.
pub fn pi_n<T: Real>(m: T, l: T, lambda: T, v: T, t: T, c: T, n: usize) -> Result<T> {
    if n == 0 || !(m > T::zero() && l > T::zero() && lambda > T::zero() && v > T::zero() && c > T::zero()) {
        return Err(Error::BadParams("pi_n needs positive M, L, Lambda, V, C and n".into()));
    }
    let one = T::one();
    let nn = T::count(n);
    let rate = lambda
        * m.powf(v / (v + one))
        * (l / lambda).max(one).powf((v + T::lit(2.0)) / (v + one))
        * nn.powf(-(v + T::lit(2.0)) / (T::lit(2.0) * (v + one)));
    Ok(c * (rate + (l * l * t + one) / (lambda * nn)))
}
