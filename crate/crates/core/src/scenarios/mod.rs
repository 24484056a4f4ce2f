//! Synthetic scenarios with exact oracles and the experiment drivers that
//! run bounds and selection methods on them.

mod cube;
mod experiments;
mod kernel;
mod regression;
mod tsybakov;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::class::OracleDistribution;
use crate::complexity::KernelSpec;
use crate::error::{Error, Result};
use crate::selection::ModelFamily;

pub use cube::{coordinate_class, cube_scenario, CubeOracle};
pub use experiments::{
    coverage_experiment, evaluate_method, ordering_experiment, prop2_experiment, run_rate_experiment,
    selection_experiment, CoverageReport, MethodOptions, MethodOutcome, OrderingReport, Prop2Report, Prop2Row,
    MethodSummary, RateReport, RateRow, SelectionReport, SelectionTrial,
};
pub use kernel::{kernel_regression, sobolev_eigenvalues};
pub use regression::{
    coefficient_net, cosine_features, default_target, finite_dim_regression, linear_member, linear_value,
    nested_regression, oscillation_bound, squared_loss_class, CosineDesign, CosineRegression, Features, NetSpec,
    NOISE_HALF_WIDTH, NOISE_VARIANCE,
};
pub use tsybakov::{
    sieve_size, threshold_grid, threshold_member, tsybakov_scenario, tsybakov_with_amplitude, TsybakovOracle,
    DEFAULT_AMPLITUDE, GRID_OFFSET,
};

/// Ground-truth parameters a scenario was built from.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Truth {
    pub name: String,
    /// Risk of the best measurable predictor.
    pub bayes_risk: Option<f64>,
    /// Exponent `beta` of the expected rate `n^{-beta}`.
    pub rate_exponent: Option<f64>,
    pub kappa: Option<f64>,
    pub rho: Option<f64>,
    /// Noise exponent.
    pub alpha: Option<f64>,
    /// Dimension of a single-class scenario.
    pub d: Option<usize>,
    /// Largest coordinate index `N` of the cube.
    pub n_coords: Option<usize>,
    pub eigenvalues: Option<Vec<f64>>,
    /// Per-model dimensions.
    pub dims: Option<Vec<usize>>,
    /// Per-model constants `D_k` with `P(f - f_k*)^2 <= D_k (P f - P f_k*)`.
    pub variance_constants: Option<Vec<f64>>,
    /// Whether every member takes values in `{0, 1}`.
    pub binary: bool,
}

impl Truth {
    pub fn named(name: &str) -> Self {
        Self { name: name.to_owned(), ..Self::default() }
    }
}

/// A distribution, a family of classes over it and the truth behind them.
pub struct Scenario<P> {
    pub name: String,
    pub oracle: Arc<dyn OracleDistribution<P>>,
    pub family: ModelFamily<P>,
    pub truth: Truth,
    /// One kernel per model for the kernel penalty.
    pub kernels: Option<Vec<KernelSpec<P>>>,
}

impl<P> Scenario<P> {
    /// The first class, for single-class scenarios.
    pub fn class(&self) -> &crate::class::FunctionClass<P> {
        &self.family.classes()[0]
    }
}

/// Sample sizes, replicates and seed of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub n_sweep: Vec<usize>,
    pub replicates: usize,
    pub t: f64,
    pub seed: u64,
    /// Replicates per `n` on which `delta_n(t)` is also computed.
    #[serde(default)]
    pub bound_replicates: usize,
}

impl ExperimentPlan {
    pub fn new(n_sweep: Vec<usize>, replicates: usize, t: f64, seed: u64) -> Result<Self> {
        let plan = Self { n_sweep, replicates, t, seed, bound_replicates: 0 };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sweep.is_empty() || self.n_sweep[0] == 0 || self.n_sweep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::BadParams("n_sweep must be positive and strictly increasing".into()));
        }
        if self.replicates < 2 {
            return Err(Error::BadParams(format!("replicates = {} must be at least 2", self.replicates)));
        }
        if !(self.t > 0.0) {
            return Err(Error::BadParams(format!("t = {} must be positive", self.t)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_validation() {
        assert!(ExperimentPlan::new(vec![64, 128], 2, 1.0, 0).is_ok());
        assert!(ExperimentPlan::new(vec![128, 64], 2, 1.0, 0).is_err());
        assert!(ExperimentPlan::new(vec![64, 64], 2, 1.0, 0).is_err());
        assert!(ExperimentPlan::new(vec![64], 1, 1.0, 0).is_err());
        assert!(ExperimentPlan::new(vec![], 5, 1.0, 0).is_err());
    }
}
