use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Scenario, Truth};
use crate::class::{ClassMoments, FunctionClass, Member, OracleDistribution};
use crate::error::{Error, Result};
use crate::selection::{Labeled, ModelFamily};

/// Offset of the threshold grid from 1/2, in units of the pitch.
pub const GRID_OFFSET: f64 = 1.0 / 3.0;

/// Default signal amplitude `c` of the regression function.
pub const DEFAULT_AMPLITUDE: f64 = 0.8;

/// Binary classification on `X ~ U[0, 1]` with
/// `eta(x) = 2 P(Y = 1 | x) - 1 = sign(x - 1/2) c |2x - 1|^{kappa - 1}`.
///
/// The excess risk of the threshold rule `I(x >= s)` is
/// `c |2s - 1|^kappa / (2 kappa)` and its squared `L_2` distance to the Bayes
/// rule is `|s - 1/2|`, so the margin exponent is `kappa`.
#[derive(Debug, Clone, Copy)]
pub struct TsybakovOracle {
    pub kappa: f64,
    pub amplitude: f64,
}

impl TsybakovOracle {
    pub fn new(kappa: f64, amplitude: f64) -> Result<Self> {
        if !(kappa >= 1.0) || !(amplitude > 0.0 && amplitude <= 1.0) {
            return Err(Error::BadParams(format!("need kappa >= 1 and c in (0, 1], got {kappa}, {amplitude}")));
        }
        Ok(Self { kappa, amplitude })
    }

    pub fn eta(&self, x: f64) -> f64 {
        let s = if x >= 0.5 { 1.0 } else { -1.0 };
        s * self.amplitude * (2.0 * x - 1.0).abs().powf(self.kappa - 1.0)
    }

    pub fn bayes_risk(&self) -> f64 {
        0.5 - self.amplitude / (2.0 * self.kappa)
    }

    /// Risk of `I(x >= s)`.
    pub fn threshold_risk(&self, s: f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        self.bayes_risk() + self.amplitude * (2.0 * s - 1.0).abs().powf(self.kappa) / (2.0 * self.kappa)
    }
}

impl OracleDistribution<Labeled<f64>> for TsybakovOracle {
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<Labeled<f64>> {
        (0..n)
            .map(|_| {
                let x: f64 = rng.random();
                let p = 0.5 * (1.0 + self.eta(x));
                Labeled { x, y: if rng.random::<f64>() < p { 1.0 } else { 0.0 } }
            })
            .collect()
    }

    fn risks(&self, class: &FunctionClass<Labeled<f64>>) -> Result<Vec<f64>> {
        Ok(thresholds(class)?.into_iter().map(|s| self.threshold_risk(s)).collect())
    }

    /// Exact for threshold members: the losses are binary, so
    /// `P(f_a f_b) = (P f_a + P f_b - P(f_a - f_b)^2) / 2` with
    /// `P(f_a - f_b)^2 = |a - b|`.
    fn moments(&self, class: &FunctionClass<Labeled<f64>>) -> Result<ClassMoments> {
        let s = thresholds(class)?;
        let risks: Vec<f64> = s.iter().map(|v| self.threshold_risk(*v)).collect();
        let m = s.len();
        let cross = Array2::from_shape_fn((m, m), |(i, j)| {
            let d = (s[i].clamp(0.0, 1.0) - s[j].clamp(0.0, 1.0)).abs();
            (risks[i] + risks[j] - d) / 2.0
        });
        Ok(ClassMoments { risks, cross, accuracy: 0.0 })
    }
}

fn thresholds(class: &FunctionClass<Labeled<f64>>) -> Result<Vec<f64>> {
    class
        .members()
        .map(|m| {
            m.params()
                .map(|p| p[0])
                .ok_or_else(|| Error::OracleUnavailable(format!("member {} has no threshold", m.label())))
        })
        .collect()
}

/// 0-1 loss of the threshold rule `I(x >= s)`.
pub fn threshold_member(s: f64) -> Member<Labeled<f64>> {
    Member::new(format!("s{s:.12}"), move |p: &Labeled<f64>| {
        let pred = if p.x >= s { 1.0 } else { 0.0 };
        if pred == p.y {
            0.0
        } else {
            1.0
        }
    })
    .with_params(vec![s])
}

/// Thresholds `1/2 + (j - GRID_OFFSET) / size` inside `(0, 1)`.
pub fn threshold_grid(size: usize) -> Vec<f64> {
    let h = 1.0 / size as f64;
    let lo = (GRID_OFFSET - 0.5 * size as f64).ceil() as i64;
    let hi = (GRID_OFFSET + 0.5 * size as f64).floor() as i64;
    (lo..=hi).map(|j| 0.5 + (j as f64 - GRID_OFFSET) * h).filter(|s| *s > 0.0 && *s < 1.0).collect()
}

/// Class size `ceil(n^{1/(2 kappa + rho - 1)})` whose pitch realizes the
/// rate `n^{-kappa/(2 kappa + rho - 1)}`.
pub fn sieve_size(kappa: f64, rho: f64, n: usize) -> usize {
    (n as f64).powf(1.0 / (2.0 * kappa + rho - 1.0)).ceil() as usize
}

/// Threshold classifiers on a grid of `class_size` cells under the 0-1 loss.
pub fn tsybakov_scenario(kappa: f64, rho: f64, class_size: usize) -> Result<Scenario<Labeled<f64>>> {
    tsybakov_with_amplitude(kappa, rho, class_size, DEFAULT_AMPLITUDE)
}

pub fn tsybakov_with_amplitude(
    kappa: f64,
    rho: f64,
    class_size: usize,
    amplitude: f64,
) -> Result<Scenario<Labeled<f64>>> {
    if !(rho > 0.0 && rho < 1.0) || class_size < 2 {
        return Err(Error::BadParams(format!("need rho in (0, 1) and class size >= 2, got {rho}, {class_size}")));
    }
    let oracle = TsybakovOracle::new(kappa, amplitude)?;
    let class = FunctionClass::new(threshold_grid(class_size).into_iter().map(threshold_member).collect())?;
    let truth = Truth {
        bayes_risk: Some(oracle.bayes_risk()),
        rate_exponent: Some(kappa / (2.0 * kappa + rho - 1.0)),
        kappa: Some(kappa),
        rho: Some(rho),
        alpha: if kappa > 1.0 { Some(1.0 / (kappa - 1.0)) } else { None },
        binary: true,
        ..Truth::named("tsybakov")
    };
    Ok(Scenario {
        name: "tsybakov".into(),
        oracle: Arc::new(oracle),
        family: ModelFamily::uniform(vec![class], 1.0)?,
        truth,
        kernels: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::monte_carlo_moments;

    #[test]
    fn rate_exponents() {
        let s = tsybakov_scenario(1.0, 0.5, 16).unwrap();
        assert!((s.truth.rate_exponent.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let big = tsybakov_scenario(1e6, 0.5, 16).unwrap();
        assert!((big.truth.rate_exponent.unwrap() - 0.5).abs() < 1e-6);
    }

    #[test]
    fn bayes_threshold_is_nearest_half() {
        let s = tsybakov_scenario(1.0, 0.5, 12).unwrap();
        let class = &s.family.classes()[0];
        let risks = s.oracle.risks(class).unwrap();
        let best = crate::class::argmin(&risks).unwrap();
        let ts = threshold_grid(12);
        let nearest = (0..ts.len()).min_by(|&a, &b| (ts[a] - 0.5).abs().total_cmp(&(ts[b] - 0.5).abs())).unwrap();
        assert_eq!(best, nearest);
        let gap = risks[best] - s.truth.bayes_risk.unwrap();
        assert!((gap - DEFAULT_AMPLITUDE * GRID_OFFSET / 12.0).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_agrees() {
        for kappa in [1.0, 2.0] {
            let oracle = TsybakovOracle::new(kappa, 0.7).unwrap();
            let class = FunctionClass::new(vec![0.2, 0.45, 0.5, 0.8].into_iter().map(threshold_member).collect()).unwrap();
            let exact = oracle.moments(&class).unwrap();
            let mc = monte_carlo_moments(&oracle, &class, 200_000, 5).unwrap();
            for i in 0..4 {
                assert!((exact.risks[i] - mc.moments.risks[i]).abs() <= 4.0 * mc.risk_stderr[i]);
                for j in 0..4 {
                    assert!((exact.cross[[i, j]] - mc.moments.cross[[i, j]]).abs() <= 4.0 * mc.cross_stderr[[i, j]] + 1e-12);
                }
            }
        }
    }
}
