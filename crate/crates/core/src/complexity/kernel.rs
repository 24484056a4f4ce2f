use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::transform::ComplexityCurve;

/// Eigenvalues below this are treated as zero.
pub const EIGEN_FLOOR: f64 = 1e-12;

type KernelFn<X> = Arc<dyn Fn(&X, &X) -> f64 + Send + Sync>;

/// A symmetric nonnegative-definite kernel, optionally with the eigenvalues
/// of its integral operator under the sampling distribution.
#[derive(Clone)]
pub struct KernelSpec<X> {
    kernel: KernelFn<X>,
    eigenvalues: Option<Vec<f64>>,
}

impl<X> KernelSpec<X> {
    pub fn new(kernel: impl Fn(&X, &X) -> f64 + Send + Sync + 'static) -> Self {
        Self { kernel: Arc::new(kernel), eigenvalues: None }
    }

    pub fn with_eigenvalues(mut self, eigenvalues: Vec<f64>) -> Self {
        self.eigenvalues = Some(eigenvalues);
        self
    }

    pub fn eval(&self, x: &X, y: &X) -> f64 {
        (self.kernel)(x, y)
    }

    pub fn eigenvalues(&self) -> Option<&[f64]> {
        self.eigenvalues.as_deref()
    }

    /// Eigenvalues of `(n^{-1} K(X_i, X_j))`, sorted decreasingly, with
    /// values below [`EIGEN_FLOOR`] clamped to zero.
    pub fn gram_spectrum(&self, xs: &[X]) -> Result<Vec<f64>> {
        let n = xs.len();
        if n == 0 {
            return Err(Error::BadParams("empty sample".into()));
        }
        let gram = DMatrix::from_fn(n, n, |i, j| self.eval(&xs[i], &xs[j]) / n as f64);
        if gram.iter().any(|v| !v.is_finite()) {
            return Err(Error::EigenFailure("non-finite Gram entry".into()));
        }
        let scale = gram.amax().max(1.0);
        if (0..n).any(|i| (0..i).any(|j| (gram[(i, j)] - gram[(j, i)]).abs() > 1e-12 * scale)) {
            return Err(Error::BadParams("kernel is not symmetric".into()));
        }
        let eig = gram
            .try_symmetric_eigen(1e-14, 10_000)
            .ok_or_else(|| Error::EigenFailure("symmetric eigensolver did not converge".into()))?;
        let mut values: Vec<f64> =
            eig.eigenvalues.iter().map(|&l| if l < EIGEN_FLOOR { 0.0 } else { l }).collect();
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(values)
    }
}

/// `(n^{-1} sum_j min(lambda_j, delta))^{1/2}` as a strictly-concave-type
/// curve with exponent 1/2 and no domain cap.
pub fn mendelson_curve(eigenvalues: &[f64], n: usize) -> Result<ComplexityCurve<f64>> {
    if n == 0 || eigenvalues.iter().any(|l| !l.is_finite() || *l < 0.0) {
        return Err(Error::BadParams("eigenvalues must be finite and nonnegative, n > 0".into()));
    }
    let lambda = eigenvalues.to_vec();
    let n = n as f64;
    Ok(ComplexityCurve::strictly_concave(0.5, move |d: f64| {
        (lambda.iter().map(|l| l.min(d)).sum::<f64>() / n).sqrt()
    })?
    .unbounded())
}

/// Empirical and (when the spectrum is known) true Mendelson curves.
#[derive(Debug, Clone)]
pub struct MendelsonCurves {
    pub empirical: ComplexityCurve<f64>,
    pub truth: Option<ComplexityCurve<f64>>,
    pub gram_eigenvalues: Vec<f64>,
}

pub fn mendelson_curves<X>(kernel: &KernelSpec<X>, xs: &[X]) -> Result<MendelsonCurves> {
    let gram_eigenvalues = kernel.gram_spectrum(xs)?;
    let empirical = mendelson_curve(&gram_eigenvalues, xs.len())?;
    let truth = kernel.eigenvalues().map(|l| mendelson_curve(l, xs.len())).transpose()?;
    Ok(MendelsonCurves { empirical, truth, gram_eigenvalues })
}
