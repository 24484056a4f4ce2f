use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Scenario, Truth};
use crate::class::{ClassMoments, FunctionClass, Member, OracleDistribution};
use crate::error::{Error, Result};
use crate::selection::{loss_class, Labeled, LossClassMeta, ModelFamily};

/// Half-width of the uniform regression noise.
pub const NOISE_HALF_WIDTH: f64 = 0.25;

/// `E U^2` for the uniform noise.
pub const NOISE_VARIANCE: f64 = NOISE_HALF_WIDTH * NOISE_HALF_WIDTH / 3.0;

const NOISE_FOURTH: f64 = NOISE_HALF_WIDTH * NOISE_HALF_WIDTH * NOISE_HALF_WIDTH * NOISE_HALF_WIDTH / 5.0;

/// Values of the orthonormal cosine basis of `L_2[0, 1]` at one point.
pub type Features = Vec<f64>;

/// `phi_0 = 1`, `phi_k(x) = sqrt 2 cos(pi k x)`.
pub fn cosine_features(x: f64, dim: usize) -> Features {
    (0..dim).map(|k| if k == 0 { 1.0 } else { SQRT_2 * (PI * k as f64 * x).cos() }).collect()
}

/// `sum_k c_k phi_k`.
pub fn linear_value(coeffs: &[f64], features: &[f64]) -> f64 {
    coeffs.iter().zip(features).map(|(c, f)| c * f).sum()
}

/// Upper bound on `sup_x |g(x) - c_0|`.
pub fn oscillation_bound(coeffs: &[f64]) -> f64 {
    SQRT_2 * coeffs.iter().skip(1).map(|c| c.abs()).sum::<f64>()
}

fn label(coeffs: &[f64]) -> String {
    let parts: Vec<String> = coeffs.iter().map(|c| format!("{:.9}", c + 0.0)).collect();
    format!("g[{}]", parts.join(","))
}

/// Base member `g = sum_k c_k phi_k`, which must map into `[0, 1]`.
pub fn linear_member(coeffs: Vec<f64>) -> Result<Member<Features>> {
    let (c0, osc) = (coeffs[0], oscillation_bound(&coeffs));
    if c0 - osc < -1e-12 || c0 + osc > 1.0 + 1e-12 {
        return Err(Error::RangeViolation(format!("{} may leave [0, 1]", label(&coeffs))));
    }
    let c = coeffs.clone();
    Ok(Member::new(label(&coeffs), move |f: &Features| linear_value(&c, f).clamp(0.0, 1.0)).with_params(coeffs))
}

/// Product grid `center_k + pitch * {-levels, ..., levels}` over the first
/// `active` coordinates; the remaining coordinates are zero.
pub fn coefficient_net(center: &[f64], pitch: f64, levels: usize, active: usize) -> Vec<Vec<f64>> {
    let side = 2 * levels + 1;
    let total = side.pow(active as u32);
    (0..total)
        .map(|mut idx| {
            let mut c = vec![0.0; center.len()];
            for (k, ck) in c.iter_mut().enumerate().take(active) {
                let step = (idx % side) as f64 - levels as f64;
                idx /= side;
                *ck = center[k] + pitch * step;
            }
            c
        })
        .collect()
}

/// Design distribution: `X` uniform on `[0, 1]`, observed through its basis
/// features. Exact moments for members carrying coefficient parameters.
#[derive(Debug, Clone, Copy)]
pub struct CosineDesign {
    pub dim: usize,
}

fn coefficients<P>(class: &FunctionClass<P>, dim: usize) -> Result<Vec<&[f64]>> {
    class
        .members()
        .map(|m| match m.params() {
            Some(p) if p.len() == dim => Ok(p),
            _ => Err(Error::OracleUnavailable(format!("member {} has no coefficient vector", m.label()))),
        })
        .collect()
}

impl OracleDistribution<Features> for CosineDesign {
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<Features> {
        (0..n).map(|_| cosine_features(rng.random::<f64>(), self.dim)).collect()
    }

    fn moments(&self, class: &FunctionClass<Features>) -> Result<ClassMoments> {
        let cs = coefficients(class, self.dim)?;
        let risks = cs.iter().map(|c| c[0]).collect();
        let m = cs.len();
        let cross = Array2::from_shape_fn((m, m), |(i, j)| cs[i].iter().zip(cs[j]).map(|(a, b)| a * b).sum());
        Ok(ClassMoments { risks, cross, accuracy: 0.0 })
    }
}

/// `Y = g*(X) + U` with `U` uniform on `[-1/4, 1/4]` and `g*` valued in
/// `[1/4, 3/4]`, so the response stays in `[0, 1]`.
///
/// Members must be squared-loss compositions `(y - g(x))^2` whose parameters
/// are the coefficients of `g`; their moments are then exact, using midpoint
/// quadrature that integrates the relevant trigonometric polynomials exactly.
#[derive(Debug, Clone)]
pub struct CosineRegression {
    target: Vec<f64>,
    nodes: Vec<Features>,
}

impl CosineRegression {
    pub fn new(target: Vec<f64>) -> Result<Self> {
        let (c0, osc) = (target[0], oscillation_bound(&target));
        if c0 - osc < 0.25 - 1e-12 || c0 + osc > 0.75 + 1e-12 {
            return Err(Error::BadParams("regression function must stay in [1/4, 3/4]".into()));
        }
        let dim = target.len();
        let count = (4 * dim + 8).max(64);
        let nodes = (0..count).map(|i| cosine_features((i as f64 + 0.5) / count as f64, dim)).collect();
        Ok(Self { target, nodes })
    }

    pub fn dim(&self) -> usize {
        self.target.len()
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    /// `||g - g*||^2` from coefficients.
    pub fn distance2(&self, coeffs: &[f64]) -> f64 {
        coeffs.iter().zip(&self.target).map(|(a, b)| (a - b) * (a - b)).sum()
    }

    /// Design distribution of the same dimension.
    pub fn design(&self) -> CosineDesign {
        CosineDesign { dim: self.dim() }
    }
}

impl OracleDistribution<Labeled<Features>> for CosineRegression {
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<Labeled<Features>> {
        (0..n)
            .map(|_| {
                let x = cosine_features(rng.random::<f64>(), self.dim());
                let u = NOISE_HALF_WIDTH * (2.0 * rng.random::<f64>() - 1.0);
                let y = (linear_value(&self.target, &x) + u).clamp(0.0, 1.0);
                Labeled { x, y }
            })
            .collect()
    }

    fn risks(&self, class: &FunctionClass<Labeled<Features>>) -> Result<Vec<f64>> {
        Ok(coefficients(class, self.dim())?.iter().map(|c| self.distance2(c) + NOISE_VARIANCE).collect())
    }

    fn moments(&self, class: &FunctionClass<Labeled<Features>>) -> Result<ClassMoments> {
        let cs = coefficients(class, self.dim())?;
        let m = cs.len();
        let k = self.nodes.len() as f64;
        let gaps: Vec<Vec<f64>> = cs
            .iter()
            .map(|c| self.nodes.iter().map(|f| linear_value(&self.target, f) - linear_value(c, f)).collect())
            .collect();
        let sq: Vec<f64> = gaps.iter().map(|a| a.iter().map(|v| v * v).sum::<f64>() / k).collect();
        let mut cross = Array2::zeros((m, m));
        for i in 0..m {
            for j in i..m {
                let (mut a2b2, mut ab) = (0.0, 0.0);
                for (x, y) in gaps[i].iter().zip(&gaps[j]) {
                    let p = x * y;
                    a2b2 += p * p;
                    ab += p;
                }
                let v = a2b2 / k + NOISE_VARIANCE * (sq[i] + sq[j] + 4.0 * ab / k) + NOISE_FOURTH;
                cross[[i, j]] = v;
                cross[[j, i]] = v;
            }
        }
        Ok(ClassMoments { risks: self.risks(class)?, cross, accuracy: 0.0 })
    }
}

/// Default regression coefficients `(1/2, 0.08, 0.04, ...)` of length `d`.
pub fn default_target(d: usize) -> Vec<f64> {
    (0..d).map(|k| if k == 0 { 0.5 } else { 0.08 * 0.5_f64.powi(k as i32 - 1) }).collect()
}

/// Grid net around the regression function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetSpec {
    pub pitch: f64,
    /// Grid points on each side of the center, per coordinate.
    pub levels: usize,
}

impl NetSpec {
    /// Pitch `0.6 sigma / sqrt n` with six levels per side, so the net
    /// resolves the estimation error at every sample size.
    pub fn adaptive(n: usize) -> Self {
        Self { pitch: 0.6 * NOISE_VARIANCE.sqrt() / (n as f64).sqrt(), levels: 6 }
    }
}

/// Squared-loss class of a coefficient net.
pub fn squared_loss_class(coeffs: Vec<Vec<f64>>) -> Result<FunctionClass<Labeled<Features>>> {
    let base = FunctionClass::new(coeffs.into_iter().map(linear_member).collect::<Result<_>>()?)?;
    loss_class(&LossClassMeta::squared(), &base)
}

/// Regression on a `d`-dimensional cosine span with the squared loss over a
/// net centered at the regression function.
pub fn finite_dim_regression(d: usize, net: NetSpec) -> Result<Scenario<Labeled<Features>>> {
    if d == 0 || !(net.pitch > 0.0) {
        return Err(Error::BadParams("need d >= 1 and a positive pitch".into()));
    }
    let oracle = CosineRegression::new(default_target(d))?;
    let class = squared_loss_class(coefficient_net(oracle.target(), net.pitch, net.levels, d))?;
    let truth = Truth {
        bayes_risk: Some(NOISE_VARIANCE),
        rate_exponent: Some(1.0),
        dims: Some(vec![d]),
        variance_constants: Some(vec![4.0]),
        ..Truth::named("finite_dim_regression")
    };
    Ok(Scenario {
        name: "finite_dim_regression".into(),
        oracle: Arc::new(oracle),
        family: ModelFamily::uniform(vec![class], 1.0)?,
        truth,
        kernels: None,
    })
}

/// Nested family over dimensions `1..=dims`: model `k` varies the first
/// `k + 1` coefficients on a `2 levels + 1` grid around `target` and fixes
/// the rest at zero. Nesting requires every target coefficient beyond the
/// first to be a multiple of `pitch` within `levels` steps of zero.
pub fn nested_regression(target: Vec<f64>, pitch: f64, levels: usize, t: f64) -> Result<Scenario<Labeled<Features>>> {
    let dims = target.len();
    let oracle = CosineRegression::new(target.clone())?;
    let classes = (1..=dims)
        .map(|k| squared_loss_class(coefficient_net(&target, pitch, levels, k)))
        .collect::<Result<Vec<_>>>()?;
    let family = ModelFamily::uniform(classes, t)?;
    if !family.is_nested() {
        return Err(Error::NotNested);
    }
    let truth = Truth {
        bayes_risk: Some(NOISE_VARIANCE),
        rate_exponent: Some(1.0),
        dims: Some((1..=dims).collect()),
        variance_constants: Some(vec![4.0; dims]),
        ..Truth::named("nested_regression")
    };
    Ok(Scenario { name: "nested_regression".into(), oracle: Arc::new(oracle), family, truth, kernels: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::monte_carlo_moments;

    #[test]
    fn one_dimensional_net_excess() {
        let oracle = CosineRegression::new(vec![0.5]).unwrap();
        let class = squared_loss_class(vec![vec![0.0], vec![0.5], vec![1.0]]).unwrap();
        let m = oracle.moments(&class).unwrap();
        let ex = m.excess();
        assert!((ex[0] - 0.25).abs() < 1e-15 && ex[1] == 0.0 && (ex[2] - 0.25).abs() < 1e-15);
        assert!((m.risks[1] - 1.0 / 48.0).abs() < 1e-15);
    }

    #[test]
    fn quadrature_matches_coefficients() {
        let oracle = CosineRegression::new(default_target(3)).unwrap();
        let class = squared_loss_class(coefficient_net(oracle.target(), 0.03, 1, 3)).unwrap();
        let m = oracle.moments(&class).unwrap();
        let k = oracle.nodes.len() as f64;
        for (i, c) in class.members().enumerate() {
            let a2: f64 = oracle
                .nodes
                .iter()
                .map(|f| (linear_value(oracle.target(), f) - linear_value(c.params().unwrap(), f)).powi(2))
                .sum::<f64>()
                / k;
            assert!((a2 + NOISE_VARIANCE - m.risks[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn monte_carlo_agrees() {
        let oracle = CosineRegression::new(default_target(2)).unwrap();
        let class = squared_loss_class(coefficient_net(oracle.target(), 0.1, 1, 2)).unwrap();
        let exact = oracle.moments(&class).unwrap();
        let mc = monte_carlo_moments(&oracle, &class, 100_000, 3).unwrap();
        for i in 0..class.len() {
            assert!((exact.risks[i] - mc.moments.risks[i]).abs() <= 4.0 * mc.risk_stderr[i] + 1e-12);
            for j in 0..class.len() {
                assert!((exact.cross[[i, j]] - mc.moments.cross[[i, j]]).abs() <= 4.0 * mc.cross_stderr[[i, j]] + 1e-12);
            }
        }
    }

    #[test]
    fn nested_family_builds() {
        let s = nested_regression(vec![0.5, 0.06, 0.0, 0.0], 0.03, 2, 2.0).unwrap();
        let sizes: Vec<usize> = s.family.classes().iter().map(FunctionClass::len).collect();
        assert_eq!(sizes, vec![5, 25, 125, 625]);
        assert!(s.family.is_nested());
    }
}
