use std::sync::Arc;

use super::regression::{squared_loss_class, CosineRegression, Features, NOISE_VARIANCE};
use super::{Scenario, Truth};
use crate::complexity::KernelSpec;
use crate::error::{Error, Result};
use crate::selection::{Labeled, ModelFamily};

/// `lambda_j proportional to (j + 1)^{-2}`, normalized so that
/// `K(x, x) = sum_j lambda_j phi_j(x)^2 <= lambda_0 + 2 sum_{j >= 1} lambda_j = 1`.
pub fn sobolev_eigenvalues(count: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..count).map(|j| 1.0 / ((j + 1) * (j + 1)) as f64).collect();
    let z = raw.first().copied().unwrap_or(0.0) + 2.0 * raw.iter().skip(1).sum::<f64>();
    raw.into_iter().map(|l| l / z).collect()
}

/// Truncated kernel `sum_{j < m} lambda_j phi_j(x) phi_j(y)` on the features.
fn truncated_kernel(lambda: &[f64], m: usize) -> KernelSpec<Labeled<Features>> {
    let l = lambda[..m].to_vec();
    KernelSpec::new(move |a: &Labeled<Features>, b: &Labeled<Features>| {
        l.iter().enumerate().map(|(j, lj)| lj * a.x[j] * b.x[j]).sum()
    })
    .with_eigenvalues(lambda[..m].to_vec())
}

/// Cosine coefficient of the ball coordinate `a`.
fn coefficient(a: f64, lambda: f64) -> f64 {
    0.25 * a * lambda.sqrt()
}

/// Kernel ridge-type regression in the ball of the Sobolev-like RKHS with
/// eigenvalues [`sobolev_eigenvalues`]: members `g = 1/2 + (1/4) sum_j a_j
/// sqrt(lambda_j) phi_j` with `a_j` on the grid `0.25 {-2, ..., 2}`, so
/// `|g - 1/2| <= 1/4`. Model `k` varies `a_0, ..., a_{m_k - 1}` where
/// `m_k = dims[k]`; the regression function has `a* = (0, 1/2, 1/4, 0, ...)`.
pub fn kernel_regression(dims: &[usize], t: f64) -> Result<Scenario<Labeled<Features>>> {
    if dims.is_empty() || dims[0] == 0 || dims.windows(2).any(|w| w[0] >= w[1]) || *dims.last().unwrap() > 4 {
        return Err(Error::BadParams("dims must be strictly increasing within 1..=4".into()));
    }
    let total = *dims.last().unwrap();
    let lambda = sobolev_eigenvalues(total);
    let a_star: Vec<f64> = (0..total).map(|j| [0.0, 0.5, 0.25, 0.0][j]).collect();
    let mut target: Vec<f64> = a_star.iter().zip(&lambda).map(|(a, l)| coefficient(*a, *l)).collect();
    target[0] += 0.5;
    let oracle = CosineRegression::new(target)?;
    let levels: Vec<f64> = (-2..=2).map(|s| 0.25 * s as f64).collect();
    let classes = dims
        .iter()
        .map(|&m| {
            let count = levels.len().pow(m as u32);
            let coeffs = (0..count)
                .map(|mut idx| {
                    let mut c = vec![0.0; total];
                    for (j, cj) in c.iter_mut().enumerate().take(m) {
                        *cj = coefficient(levels[idx % levels.len()], lambda[j]);
                        idx /= levels.len();
                    }
                    c[0] += 0.5;
                    c
                })
                .collect();
            squared_loss_class(coeffs)
        })
        .collect::<Result<Vec<_>>>()?;
    let family = ModelFamily::uniform(classes, t)?;
    let truth = Truth {
        bayes_risk: Some(NOISE_VARIANCE),
        eigenvalues: Some(lambda.clone()),
        dims: Some(dims.to_vec()),
        variance_constants: Some(vec![4.0; dims.len()]),
        ..Truth::named("kernel_regression")
    };
    let kernels = dims.iter().map(|&m| truncated_kernel(&lambda, m)).collect();
    Ok(Scenario {
        name: "kernel_regression".into(),
        oracle: Arc::new(oracle),
        family,
        truth,
        kernels: Some(kernels),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigenvalues_normalized() {
        let l = sobolev_eigenvalues(5);
        let diag = l[0] + 2.0 * l[1..].iter().sum::<f64>();
        assert!((diag - 1.0).abs() < 1e-15);
        assert!(l.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn nested_and_best_in_last_model() {
        let s = kernel_regression(&[1, 2, 3], 2.0).unwrap();
        assert!(s.family.is_nested());
        let sizes: Vec<usize> = s.family.classes().iter().map(|c| c.len()).collect();
        assert_eq!(sizes, vec![5, 25, 125]);
        let mins: Vec<f64> = s
            .family
            .classes()
            .iter()
            .map(|c| s.oracle.risks(c).unwrap().into_iter().fold(f64::INFINITY, f64::min))
            .collect();
        assert!((mins[2] - NOISE_VARIANCE).abs() < 1e-15);
        assert!(mins[0] > mins[1] && mins[1] > mins[2]);
        let k = &s.kernels.as_ref().unwrap()[1];
        assert_eq!(k.eigenvalues().unwrap().len(), 2);
    }
}
