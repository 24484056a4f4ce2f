//! Run configuration: one experiment per TOML file, dotted keys allowed.
//!
//! ```toml
//! experiment = "rate"
//! seed = 7
//! scenario.name = "finite_dim"
//! scenario.d = 3
//! method.name = "erm"
//! plan.n_sweep = [64, 128, 256]
//! plan.replicates = 20
//! constants.q = 2.0
//! ```

use std::path::Path;

use riskbound::bounds::BoundConstants;
use riskbound::scenarios::{ExperimentPlan, MethodOptions};
use riskbound::selection::Method;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Rate,
    Ordering,
    Coverage,
    Selection,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Rate => "rate",
            ExperimentKind::Ordering => "ordering",
            ExperimentKind::Coverage => "coverage",
            ExperimentKind::Selection => "selection",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScenarioConfig {
    /// Coordinate functions on `{0,1}^{N+1}`.
    Cube { n_coords: usize },
    /// Cosine regression net; the pitch adapts to `n` unless given.
    FiniteDim {
        d: usize,
        pitch: Option<f64>,
        levels: Option<usize>,
    },
    /// Threshold classifiers; the class size follows the sieve unless given.
    Tsybakov {
        kappa: f64,
        rho: f64,
        class_size: Option<usize>,
        amplitude: Option<f64>,
    },
    NestedRegression {
        target: Vec<f64>,
        pitch: f64,
        levels: usize,
        #[serde(default = "default_family_t")]
        t: f64,
    },
    KernelRegression {
        dims: Vec<usize>,
        #[serde(default = "default_family_t")]
        t: f64,
    },
}

fn default_family_t() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodConfig {
    #[serde(default = "default_method")]
    pub name: Method,
    /// Methods compared by a selection experiment.
    pub names: Option<Vec<Method>>,
    pub k_v1: Option<f64>,
    pub k_dimension: Option<f64>,
    pub k_shattering: Option<f64>,
    pub k_kernel: Option<f64>,
    pub k_rademacher: Option<f64>,
    pub eps: Option<f64>,
    pub link_d: Option<f64>,
    pub sign_draws: Option<usize>,
    pub c_bar: Option<f64>,
    pub c_hat: Option<f64>,
    pub c_tilde: Option<f64>,
    pub massart_k: Option<f64>,
    pub massart_k_hat: Option<f64>,
}

fn default_method() -> Method {
    Method::Erm
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self {
            name: Method::Erm,
            names: None,
            k_v1: None,
            k_dimension: None,
            k_shattering: None,
            k_kernel: None,
            k_rademacher: None,
            eps: None,
            link_d: None,
            sign_draws: None,
            c_bar: None,
            c_hat: None,
            c_tilde: None,
            massart_k: None,
            massart_k_hat: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanConfig {
    pub n_sweep: Option<Vec<usize>>,
    /// Sample size of single-`n` experiments.
    pub n: Option<usize>,
    pub replicates: Option<usize>,
    pub trials: Option<usize>,
    pub t: Option<f64>,
    pub phi_replicates: Option<usize>,
    pub bound_replicates: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    pub q: Option<f64>,
    pub k_bar: Option<f64>,
    pub k_hat: Option<f64>,
    pub c_hat: Option<f64>,
    pub k_tilde: Option<f64>,
    pub c_tilde: Option<f64>,
    pub k_check: Option<f64>,
    pub kappa_w: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub csv: Option<String>,
    pub json: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub seed: u64,
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub method: MethodConfig,
    #[serde(default)]
    pub plan: PlanConfig,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

pub const DEFAULT_PHI_REPLICATES: usize = 400;

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn set(slot: &mut f64, value: Option<f64>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks everything that can be checked without running.
    pub fn validate(&self) -> Result<(), CliError> {
        self.constants()?;
        self.options()?;
        match self.experiment {
            ExperimentKind::Rate => {
                self.plan()?;
            }
            _ => {
                self.single_n()?;
                self.trials()?;
            }
        }
        if self.experiment == ExperimentKind::Selection && self.method.names.as_ref().is_none_or(|m| m.is_empty()) {
            return Err(invalid("selection experiments need method.names"));
        }
        if let ScenarioConfig::Tsybakov { kappa, rho, .. } = self.scenario {
            if !(kappa >= 1.0) || !(rho > 0.0 && rho < 1.0) {
                return Err(invalid("tsybakov needs kappa >= 1 and rho in (0, 1)"));
            }
        }
        Ok(())
    }

    pub fn constants(&self) -> Result<BoundConstants<f64>, CliError> {
        let c = &self.constants;
        let mut out = BoundConstants::default();
        set(&mut out.q, c.q);
        set(&mut out.k_bar, c.k_bar);
        set(&mut out.k_hat, c.k_hat);
        set(&mut out.c_hat, c.c_hat);
        set(&mut out.k_tilde, c.k_tilde);
        set(&mut out.c_tilde, c.c_tilde);
        set(&mut out.k_check, c.k_check);
        out.kappa_w = c.kappa_w.or(out.kappa_w);
        out.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(out)
    }

    pub fn options(&self) -> Result<MethodOptions, CliError> {
        let m = &self.method;
        let mut o = MethodOptions { bounds: self.constants()?, ..MethodOptions::default() };
        set(&mut o.k_v1, m.k_v1);
        set(&mut o.k_dimension, m.k_dimension);
        set(&mut o.k_shattering, m.k_shattering);
        set(&mut o.k_kernel, m.k_kernel);
        set(&mut o.k_rademacher, m.k_rademacher);
        set(&mut o.eps, m.eps);
        set(&mut o.comparison.c_bar, m.c_bar);
        set(&mut o.comparison.c_hat, m.c_hat);
        set(&mut o.comparison.c_tilde, m.c_tilde);
        set(&mut o.massart.k, m.massart_k);
        set(&mut o.massart.k_hat, m.massart_k_hat);
        o.link_d = m.link_d.or(o.link_d);
        o.sign_draws = m.sign_draws.unwrap_or(o.sign_draws);
        let positive = [o.k_v1, o.k_dimension, o.k_shattering, o.k_kernel, o.k_rademacher, o.massart.k, o.massart.k_hat];
        if positive.iter().any(|k| !(*k > 0.0)) || !(o.eps > 0.0 && o.eps < 1.0) || o.sign_draws == 0 {
            return Err(invalid("method constants must be positive, eps in (0, 1) and sign_draws >= 1"));
        }
        Ok(o)
    }

    pub fn plan(&self) -> Result<ExperimentPlan, CliError> {
        let p = &self.plan;
        let sweep = p.n_sweep.clone().ok_or_else(|| invalid("rate experiments need plan.n_sweep"))?;
        let mut plan = ExperimentPlan::new(sweep, p.replicates.unwrap_or(20), p.t.unwrap_or(1.0), self.seed)
            .map_err(|e| invalid(e.to_string()))?;
        plan.bound_replicates = p.bound_replicates.unwrap_or(0);
        Ok(plan)
    }

    pub fn single_n(&self) -> Result<usize, CliError> {
        match self.plan.n {
            Some(n) if n > 0 => Ok(n),
            _ => Err(invalid(format!("{} experiments need a positive plan.n", self.experiment.name()))),
        }
    }

    pub fn trials(&self) -> Result<usize, CliError> {
        match self.plan.trials.unwrap_or(100) {
            0 => Err(invalid("plan.trials must be positive")),
            k => Ok(k),
        }
    }

    pub fn t(&self) -> Result<f64, CliError> {
        match self.plan.t.unwrap_or(1.0) {
            t if t > 0.0 => Ok(t),
            t => Err(invalid(format!("plan.t = {t} must be positive"))),
        }
    }

    pub fn phi_replicates(&self) -> usize {
        self.plan.phi_replicates.unwrap_or(DEFAULT_PHI_REPLICATES).max(1)
    }
}
