use ndarray::Array2;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{FunctionClass, Sample};
use crate::error::{Error, Result};
use crate::rng;

/// Choice of `L_2(P)` distance between members.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// `rho_P(f, g)^2 = P (f - g)^2`.
    #[default]
    L2,
    /// `rho_P(f, g)^2 = Var_P (f - g)`.
    Variance,
}

/// True first and second moments of a class under `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassMoments {
    /// `P f_i`.
    pub risks: Vec<f64>,
    /// `P (f_i f_j)`.
    pub cross: Array2<f64>,
    /// Declared accuracy of every entry; zero for exact oracles.
    pub accuracy: f64,
}

impl ClassMoments {
    pub fn len(&self) -> usize {
        self.risks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.risks.is_empty()
    }

    pub fn min_risk(&self) -> f64 {
        self.risks.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `P f_i - inf_F P f`.
    pub fn excess(&self) -> Vec<f64> {
        let best = self.min_risk();
        self.risks.iter().map(|r| r - best).collect()
    }

    pub fn dist2(&self, i: usize, j: usize, metric: MetricKind) -> f64 {
        let l2 = self.cross[[i, i]] + self.cross[[j, j]] - 2.0 * self.cross[[i, j]];
        let d = match metric {
            MetricKind::L2 => l2,
            MetricKind::Variance => l2 - (self.risks[i] - self.risks[j]).powi(2),
        };
        d.max(0.0)
    }

    pub fn subset(&self, idx: &[usize]) -> Self {
        let risks = idx.iter().map(|&i| self.risks[i]).collect();
        let cross = Array2::from_shape_fn((idx.len(), idx.len()), |(a, b)| self.cross[[idx[a], idx[b]]]);
        Self { risks, cross, accuracy: self.accuracy }
    }
}

/// A distribution that can be sampled and that knows the true moments of
/// the classes it is asked about.
pub trait OracleDistribution<P>: Send + Sync {
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<P>;

    fn moments(&self, class: &FunctionClass<P>) -> Result<ClassMoments>;

    /// True risks `P f`; oracles with a cheaper path than the full moments
    /// override this.
    fn risks(&self, class: &FunctionClass<P>) -> Result<Vec<f64>> {
        Ok(self.moments(class)?.risks)
    }

    /// Draws a sample on the stream keyed by `seed` and `path`.
    fn draw(&self, n: usize, seed: u64, path: &[u64]) -> Sample<P> {
        let key = rng::stream_key(seed, path);
        let mut g = rng::stream(key, &[]);
        Sample::new(self.sample(n, &mut g), key)
    }
}

/// Distribution with finitely many atoms; every moment is exact.
#[derive(Debug, Clone)]
pub struct FiniteSupport<P> {
    points: Vec<P>,
    weights: Vec<f64>,
    index: WeightedIndex<f64>,
}

impl<P: Clone> FiniteSupport<P> {
    pub fn new(points: Vec<P>, weights: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::BadParams("support and weights must be nonempty and aligned".into()));
        }
        let total: f64 = weights.iter().sum();
        let weights: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let index = WeightedIndex::new(&weights).map_err(|e| Error::BadParams(e.to_string()))?;
        Ok(Self { points, weights, index })
    }

    pub fn uniform(points: Vec<P>) -> Result<Self> {
        let w = vec![1.0; points.len()];
        Self::new(points, w)
    }

    pub fn points(&self) -> &[P] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl<P: Clone + Send + Sync> OracleDistribution<P> for FiniteSupport<P> {
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<P> {
        (0..n).map(|_| self.points[self.index.sample(rng)].clone()).collect()
    }

    fn moments(&self, class: &FunctionClass<P>) -> Result<ClassMoments> {
        let m = class.len();
        let values: Vec<Vec<f64>> = class.members().map(|f| self.points.iter().map(|p| f.eval(p)).collect()).collect();
        let risks = values.iter().map(|v| v.iter().zip(&self.weights).map(|(a, w)| a * w).sum()).collect();
        let cross = Array2::from_shape_fn((m, m), |(i, j)| {
            values[i].iter().zip(&values[j]).zip(&self.weights).map(|((a, b), w)| a * b * w).sum()
        });
        Ok(ClassMoments { risks, cross, accuracy: 0.0 })
    }
}

/// Monte Carlo moments with per-entry standard errors.
#[derive(Debug, Clone)]
pub struct MonteCarloMoments {
    pub moments: ClassMoments,
    pub risk_stderr: Vec<f64>,
    pub cross_stderr: Array2<f64>,
}

/// Estimates moments from `draws` fresh points; the declared accuracy is four
/// times the largest standard error.
pub fn monte_carlo_moments<P>(
    oracle: &dyn OracleDistribution<P>,
    class: &FunctionClass<P>,
    draws: usize,
    seed: u64,
) -> Result<MonteCarloMoments> {
    if draws < 2 {
        return Err(Error::BadParams("need at least two draws".into()));
    }
    let m = class.len();
    let mut sum = vec![0.0; m];
    let mut sum_sq = vec![0.0; m];
    let mut cross = Array2::<f64>::zeros((m, m));
    let mut cross_sq = Array2::<f64>::zeros((m, m));
    let chunk = 1 << 14;
    let mut done = 0usize;
    let mut vals = vec![0.0; m];
    while done < draws {
        let k = chunk.min(draws - done);
        let sample = oracle.draw(k, seed, &[done as u64]);
        for p in &sample.points {
            for (v, f) in vals.iter_mut().zip(class.members()) {
                *v = f.eval(p);
            }
            for i in 0..m {
                sum[i] += vals[i];
                sum_sq[i] += vals[i] * vals[i];
                for j in i..m {
                    let x = vals[i] * vals[j];
                    cross[[i, j]] += x;
                    cross_sq[[i, j]] += x * x;
                }
            }
        }
        done += k;
    }
    let n = draws as f64;
    let se = |s: f64, s2: f64| ((s2 / n - (s / n).powi(2)).max(0.0) / (n - 1.0)).sqrt();
    let risk_stderr: Vec<f64> = (0..m).map(|i| se(sum[i], sum_sq[i])).collect();
    let mut cross_stderr = Array2::<f64>::zeros((m, m));
    for i in 0..m {
        for j in i..m {
            cross_stderr[[i, j]] = se(cross[[i, j]], cross_sq[[i, j]]);
            cross_stderr[[j, i]] = cross_stderr[[i, j]];
            cross[[i, j]] /= n;
            cross[[j, i]] = cross[[i, j]];
        }
    }
    let accuracy = 4.0 * cross_stderr.iter().chain(&risk_stderr).copied().fold(0.0, f64::max);
    let risks = sum.iter().map(|s| s / n).collect();
    Ok(MonteCarloMoments { moments: ClassMoments { risks, cross, accuracy }, risk_stderr, cross_stderr })
}
