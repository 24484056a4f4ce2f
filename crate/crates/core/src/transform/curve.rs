use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Shape class declared for a complexity curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape<T> {
    /// Only monotonicity is assumed.
    Arbitrary,
    /// Nondecreasing with `psi(u) / u` nonincreasing.
    ConcaveType,
    /// Nondecreasing with `psi(u) / u^gamma` nonincreasing, `gamma` in `(0, 1)`.
    StrictlyConcaveType { gamma: T },
}

impl<T: Real> Shape<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Arbitrary => "arbitrary",
            Shape::ConcaveType => "concave-type",
            Shape::StrictlyConcaveType { .. } => "strictly-concave-type",
        }
    }

    /// Concave type in the weak sense (strictly concave type included).
    pub fn is_concave(&self) -> bool {
        !matches!(self, Shape::Arbitrary)
    }
}

type Eval<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// A nondecreasing nonnegative function on `(0, cap]` bounding a localized
/// complexity.
#[derive(Clone)]
pub struct ComplexityCurve<T> {
    eval: Eval<T>,
    shape: Shape<T>,
    cap: Option<T>,
    breakpoints: Vec<T>,
    envelope: bool,
}

impl<T: Real> fmt::Debug for ComplexityCurve<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ComplexityCurve")
            .field("shape", &self.shape)
            .field("cap", &self.cap)
            .field("breakpoints", &self.breakpoints.len())
            .field("envelope", &self.envelope)
            .finish()
    }
}

impl<T: Real> ComplexityCurve<T> {
    /// Curve with the given shape and the default domain cap of 1.
    pub fn new(shape: Shape<T>, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self {
            eval: Arc::new(f),
            shape,
            cap: Some(T::one()),
            breakpoints: Vec::new(),
            envelope: false,
        }
    }

    pub fn arbitrary(f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self::new(Shape::Arbitrary, f)
    }

    pub fn concave(f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self::new(Shape::ConcaveType, f)
    }

    pub fn strictly_concave(gamma: T, f: impl Fn(T) -> T + Send + Sync + 'static) -> Result<Self> {
        if !(gamma > T::zero() && gamma < T::one()) {
            return Err(Error::BadParams(format!("gamma = {gamma} must lie in (0, 1)")));
        }
        Ok(Self::new(Shape::StrictlyConcaveType { gamma }, f))
    }

    /// Constant curve `psi = c`.
    pub fn constant(c: T) -> Self {
        Self::concave(move |_| c)
    }

    /// Right-continuous step function: value `v_k` on `[b_k, b_{k+1})` and
    /// zero below the first breakpoint. Steps must be sorted by breakpoint.
    pub fn steps(steps: Vec<(T, T)>) -> Result<Self> {
        if steps.windows(2).any(|w| !(w[0].0 < w[1].0)) {
            return Err(Error::BadParams("step breakpoints must increase".into()));
        }
        let breakpoints: Vec<T> = steps.iter().map(|s| s.0).collect();
        let table = steps;
        let curve = Self::arbitrary(move |d| {
            let k = table.partition_point(|s| s.0 <= d);
            if k == 0 {
                T::zero()
            } else {
                table[k - 1].1
            }
        });
        Ok(curve.with_breakpoints(breakpoints))
    }

    /// Piecewise-linear interpolation through `(delta, value)` knots,
    /// proportional to `delta` below the first knot and constant past the last.
    pub fn piecewise_linear(shape: Shape<T>, knots: Vec<(T, T)>) -> Result<Self> {
        if knots.is_empty() || knots.windows(2).any(|w| !(w[0].0 < w[1].0)) || !(knots[0].0 > T::zero())
        {
            return Err(Error::BadParams("knots must be nonempty, positive and increasing".into()));
        }
        let breakpoints: Vec<T> = knots.iter().map(|k| k.0).collect();
        let table = knots;
        let curve = Self::new(shape, move |d| {
            let k = table.partition_point(|s| s.0 <= d);
            if k == 0 {
                table[0].1 * d / table[0].0
            } else if k == table.len() {
                table[k - 1].1
            } else {
                let (x0, y0) = table[k - 1];
                let (x1, y1) = table[k];
                y0 + (y1 - y0) * (d - x0) / (x1 - x0)
            }
        });
        Ok(curve.with_breakpoints(breakpoints))
    }

    pub fn with_cap(mut self, cap: T) -> Self {
        self.cap = Some(cap);
        self
    }

    /// Removes the domain cap.
    pub fn unbounded(mut self) -> Self {
        self.cap = None;
        self
    }

    /// Extra abscissae the transforms always evaluate at.
    pub fn with_breakpoints(mut self, mut points: Vec<T>) -> Self {
        points.retain(|p| *p > T::zero() && p.is_finite());
        self.breakpoints.extend(points);
        self.breakpoints.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
        self.breakpoints.dedup();
        self
    }

    /// Marks the curve as a monotone envelope of a raw bound.
    pub fn mark_envelope(mut self) -> Self {
        self.envelope = true;
        self
    }

    pub fn eval(&self, delta: T) -> T {
        (self.eval)(delta)
    }

    pub fn shape(&self) -> Shape<T> {
        self.shape
    }

    pub fn cap(&self) -> Option<T> {
        self.cap
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn is_envelope(&self) -> bool {
        self.envelope
    }

    /// `c * psi`, same shape and domain.
    pub fn scaled(&self, c: T) -> Self {
        let inner = self.eval.clone();
        Self { eval: Arc::new(move |d| c * inner(d)), ..self.clone() }
    }

    /// `delta -> psi(c * delta)`, same shape, domain rescaled.
    pub fn rescaled_argument(&self, c: T) -> Self {
        let inner = self.eval.clone();
        Self {
            eval: Arc::new(move |d| inner(c * d)),
            cap: self.cap.map(|cap| cap / c),
            breakpoints: self.breakpoints.iter().map(|b| *b / c).collect(),
            ..self.clone()
        }
    }

    /// Checks monotonicity and the declared shape at the sorted abscissae
    /// `xs` with precomputed values `vs`.
    pub fn audit(&self, xs: &[T], vs: &[T]) -> Result<()> {
        let tol = T::audit_tol();
        let tiny = T::min_positive_value();
        for (x, v) in xs.iter().zip(vs) {
            if !v.is_finite() || *v < T::zero() {
                return Err(Error::ShapeViolation { shape: "nonnegative-finite", at: x.as_f64() });
            }
        }
        for i in 1..xs.len() {
            let (a, b) = (vs[i - 1], vs[i]);
            if b < a - tol * a.abs() - tiny {
                return Err(Error::NonMonotoneCurve { at: xs[i].as_f64() });
            }
            let exponent = match self.shape {
                Shape::Arbitrary => continue,
                Shape::ConcaveType => T::one(),
                Shape::StrictlyConcaveType { gamma } => gamma,
            };
            let ra = a / xs[i - 1].powf(exponent);
            let rb = b / xs[i].powf(exponent);
            if rb > ra + tol * ra.abs() + tiny {
                return Err(Error::ShapeViolation { shape: self.shape.name(), at: xs[i].as_f64() });
            }
        }
        Ok(())
    }
}
