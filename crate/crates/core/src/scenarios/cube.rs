use std::sync::Arc;

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Scenario, Truth};
use crate::class::{ClassMoments, FunctionClass, Member, OracleDistribution};
use crate::error::{Error, Result};
use crate::selection::ModelFamily;

/// Uniform distribution on `{0, 1}^bits`, points stored as bit masks.
///
/// Sampling draws a full 64-bit word and masks it, so cubes of different
/// dimension share their leading coordinates on a common stream.
#[derive(Debug, Clone, Copy)]
pub struct CubeOracle {
    bits: u32,
}

impl CubeOracle {
    pub fn new(bits: u32) -> Result<Self> {
        if !(1..=64).contains(&bits) {
            return Err(Error::BadParams(format!("cube dimension {bits} outside 1..=64")));
        }
        Ok(Self { bits })
    }

    fn mask(&self) -> u64 {
        if self.bits == 64 {
            u64::MAX
        } else {
            (1u64 << self.bits) - 1
        }
    }
}

impl OracleDistribution<u64> for CubeOracle {
    fn sample(&self, n: usize, rng: &mut ChaCha8Rng) -> Vec<u64> {
        (0..n).map(|_| rng.random::<u64>() & self.mask()).collect()
    }

    /// Exact for coordinate members (parameter = coordinate index); other
    /// members are enumerated when the cube has at most `2^16` points.
    fn moments(&self, class: &FunctionClass<u64>) -> Result<ClassMoments> {
        let coords: Option<Vec<usize>> = class.members().map(|m| m.params().map(|p| p[0] as usize)).collect();
        let m = class.len();
        if let Some(c) = coords {
            let cross = Array2::from_shape_fn((m, m), |(i, j)| if c[i] == c[j] { 0.5 } else { 0.25 });
            return Ok(ClassMoments { risks: vec![0.5; m], cross, accuracy: 0.0 });
        }
        if self.bits > 16 {
            return Err(Error::OracleUnavailable("cube too large to enumerate".into()));
        }
        let points: Vec<u64> = (0..1u64 << self.bits).collect();
        let w = 1.0 / points.len() as f64;
        let values: Vec<Vec<f64>> = class.members().map(|f| points.iter().map(|p| f.eval(p)).collect()).collect();
        let risks = values.iter().map(|v| v.iter().sum::<f64>() * w).collect();
        let cross = Array2::from_shape_fn((m, m), |(i, j)| {
            values[i].iter().zip(&values[j]).map(|(a, b)| a * b).sum::<f64>() * w
        });
        Ok(ClassMoments { risks, cross, accuracy: 0.0 })
    }
}

/// Coordinate functions `f_j(x) = x_j`, `j = 0..=n_max`.
pub fn coordinate_class(count: usize) -> Result<FunctionClass<u64>> {
    FunctionClass::new(
        (0..count)
            .map(|j| Member::new(format!("x{j}"), move |p: &u64| ((p >> j) & 1) as f64).with_params(vec![j as f64]))
            .collect(),
    )
}

/// The cube `{0,1}^{N+1}` with its `N + 1` coordinate functions, all of
/// true risk 1/2.
pub fn cube_scenario(n_max: usize) -> Result<Scenario<u64>> {
    if n_max == 0 || n_max > 63 {
        return Err(Error::BadParams(format!("N = {n_max} outside 1..=63")));
    }
    let oracle = CubeOracle::new(n_max as u32 + 1)?;
    let class = coordinate_class(n_max + 1)?;
    let truth = Truth { bayes_risk: Some(0.5), n_coords: Some(n_max), ..Truth::named("cube") };
    Ok(Scenario {
        name: "cube".into(),
        oracle: Arc::new(oracle),
        family: ModelFamily::uniform(vec![class], 1.0)?,
        truth,
        kernels: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::MetricKind;

    #[test]
    fn exact_moments() {
        let s = cube_scenario(3).unwrap();
        let m = s.oracle.moments(&s.family.classes()[0]).unwrap();
        assert!(m.excess().iter().all(|e| *e == 0.0));
        assert_eq!(m.dist2(0, 1, MetricKind::L2), 0.5);
        let plain = FunctionClass::new(vec![Member::new("x1", |p: &u64| ((p >> 1) & 1) as f64)]).unwrap();
        let e = s.oracle.moments(&plain).unwrap();
        assert_eq!(e.risks, vec![0.5]);
    }

    #[test]
    fn shared_streams_nest() {
        let small = CubeOracle::new(4).unwrap().draw(50, 9, &[1]);
        let big = CubeOracle::new(32).unwrap().draw(50, 9, &[1]);
        assert!(small.points.iter().zip(&big.points).all(|(a, b)| *a == b & 0xF));
    }
}
