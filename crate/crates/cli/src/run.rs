use std::path::{Path, PathBuf};

use riskbound::scenarios::{
    coverage_experiment, cube_scenario, finite_dim_regression, kernel_regression, nested_regression,
    ordering_experiment, run_rate_experiment, selection_experiment, sieve_size, tsybakov_with_amplitude,
    MethodSummary, NetSpec, Scenario, DEFAULT_AMPLITUDE,
};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentKind, RunConfig, ScenarioConfig};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub scenario: String,
    pub method: String,
    pub seed: u64,
    pub replicates: usize,
    pub n_values: Vec<usize>,
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// Log-log slope over the upper half of the sweep.
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub ci_half_width: Option<f64>,
    pub fit_from: usize,
    pub expected_slope: Option<f64>,
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingSummary {
    pub scenario: String,
    pub seed: u64,
    pub n: usize,
    pub t: f64,
    pub trials: usize,
    pub delta_bar: f64,
    pub delta_hat_mean: f64,
    pub delta_hat_min: f64,
    pub delta_hat_max: f64,
    pub delta_tilde: f64,
    pub frequency: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub scenario: String,
    pub seed: u64,
    pub n: usize,
    pub t: f64,
    pub trials: usize,
    pub delta_n: f64,
    pub frequency: f64,
    pub budget: f64,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionSummary {
    pub scenario: String,
    pub seed: u64,
    pub n: usize,
    pub trials: usize,
    pub k_star: usize,
    pub true_mins: Vec<f64>,
    pub delta_bar: Vec<f64>,
    pub delta_tilde: Vec<f64>,
    pub methods: Vec<MethodSummary>,
}

/// JSON summary of one experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Summary {
    Rate(RateSummary),
    Ordering(OrderingSummary),
    Coverage(CoverageSummary),
    Selection(SelectionSummary),
}

/// Computed artifacts, written only once everything succeeded.
pub struct Outcome {
    pub summary: Summary,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub line: String,
}

/// 17 significant digits.
fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_real(x: Option<f64>) -> String {
    x.map(real).unwrap_or_default()
}

type Builder<'a, P> = &'a (dyn Fn(usize) -> riskbound::Result<Scenario<P>> + Sync);

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.scenario.clone() {
        ScenarioConfig::Cube { n_coords } => drive(cfg, &move |_| cube_scenario(n_coords)),
        ScenarioConfig::FiniteDim { d, pitch, levels } => drive(cfg, &move |n| {
            let mut net = NetSpec::adaptive(n);
            net.pitch = pitch.unwrap_or(net.pitch);
            net.levels = levels.unwrap_or(net.levels);
            finite_dim_regression(d, net)
        }),
        ScenarioConfig::Tsybakov { kappa, rho, class_size, amplitude } => drive(cfg, &move |n| {
            let size = class_size.unwrap_or_else(|| sieve_size(kappa, rho, n));
            tsybakov_with_amplitude(kappa, rho, size, amplitude.unwrap_or(DEFAULT_AMPLITUDE))
        }),
        ScenarioConfig::NestedRegression { target, pitch, levels, t } => {
            drive(cfg, &move |_| nested_regression(target.clone(), pitch, levels, t))
        }
        ScenarioConfig::KernelRegression { dims, t } => drive(cfg, &move |_| kernel_regression(&dims, t)),
    }
}

fn drive<P: Send + Sync>(cfg: &RunConfig, build: Builder<'_, P>) -> Result<Outcome, CliError> {
    let opts = cfg.options()?;
    let seed = cfg.seed;
    if cfg.experiment == ExperimentKind::Rate {
        let plan = cfg.plan()?;
        let r = run_rate_experiment(build, &plan, cfg.method.name, &opts)?;
        let rows = r
            .rows
            .iter()
            .map(|w| vec![w.scenario.clone(), w.n.to_string(), w.trial.to_string(), real(w.excess), w.k_hat.to_string(), opt_real(w.delta_n)])
            .collect();
        let slope = r.slope();
        let line = format!(
            "rate {} {}: n = {}..{}, {} replicates, slope = {}",
            r.scenario,
            r.method.name(),
            r.n_values[0],
            r.n_values[r.n_values.len() - 1],
            plan.replicates,
            slope.map_or("n/a".into(), |s| format!("{s:.4}")),
        );
        let summary = Summary::Rate(RateSummary {
            scenario: r.scenario.clone(),
            method: r.method.name().into(),
            seed,
            replicates: plan.replicates,
            n_values: r.n_values.clone(),
            means: r.means.clone(),
            stderrs: r.stderrs.clone(),
            slope,
            intercept: r.fit.map(|f| f.intercept),
            ci_half_width: r.fit.map(|f| f.ci_half_width),
            fit_from: r.fit_from,
            expected_slope: r.expected_slope,
            degenerate: r.degenerate,
        });
        return Ok(Outcome {
            summary,
            header: vec!["scenario", "n", "trial", "excess", "k_hat", "delta_n"],
            rows,
            line,
        });
    }
    let n = cfg.single_n()?;
    let trials = cfg.trials()?;
    let phi = cfg.phi_replicates();
    let scenario = build(n)?;
    match cfg.experiment {
        ExperimentKind::Ordering => {
            let t = cfg.t()?;
            let r = ordering_experiment(&scenario, n, t, trials, phi, opts.sign_draws, &opts.bounds, seed)?;
            let rows = r
                .delta_hat
                .iter()
                .zip(&r.ordered)
                .enumerate()
                .map(|(i, (h, o))| {
                    vec![r.scenario.clone(), n.to_string(), i.to_string(), real(r.delta_bar), real(*h), real(r.delta_tilde), o.to_string()]
                })
                .collect();
            let mean = r.delta_hat.iter().sum::<f64>() / r.delta_hat.len() as f64;
            let line = format!("ordering {}: n = {n}, ordered in {:.3} of {} trials", r.scenario, r.frequency, trials);
            let summary = Summary::Ordering(OrderingSummary {
                scenario: r.scenario.clone(),
                seed,
                n,
                t,
                trials,
                delta_bar: r.delta_bar,
                delta_hat_mean: mean,
                delta_hat_min: r.delta_hat.iter().copied().fold(f64::INFINITY, f64::min),
                delta_hat_max: r.delta_hat.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                delta_tilde: r.delta_tilde,
                frequency: r.frequency,
            });
            Ok(Outcome {
                summary,
                header: vec!["scenario", "n", "trial", "delta_bar", "delta_hat", "delta_tilde", "ordered"],
                rows,
                line,
            })
        }
        ExperimentKind::Coverage => {
            let t = cfg.t()?;
            let r = coverage_experiment(&scenario, n, t, trials, phi, &opts.bounds, seed)?;
            let rows = r
                .excess
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    vec![r.scenario.clone(), n.to_string(), i.to_string(), real(*e), real(r.delta_n), (*e > r.delta_n).to_string()]
                })
                .collect();
            let line = format!(
                "coverage {}: n = {n}, t = {t}, exceedance {:.3} vs budget {:.3}",
                r.scenario, r.frequency, r.budget
            );
            let summary = Summary::Coverage(CoverageSummary {
                scenario: r.scenario.clone(),
                seed,
                n,
                t,
                trials,
                delta_n: r.delta_n,
                frequency: r.frequency,
                budget: r.budget,
                slack: r.slack,
                pass: r.pass,
            });
            Ok(Outcome { summary, header: vec!["scenario", "n", "trial", "excess", "delta_n", "exceeds"], rows, line })
        }
        ExperimentKind::Selection => {
            let methods = cfg.method.names.clone().unwrap_or_default();
            let r = selection_experiment(&scenario, n, trials, &methods, &opts, phi, seed)?;
            let rows = r
                .trials
                .iter()
                .map(|w| {
                    vec![
                        r.scenario.clone(),
                        n.to_string(),
                        w.trial.to_string(),
                        w.method.name().into(),
                        w.k_hat.to_string(),
                        real(w.excess),
                        real(w.bound),
                        w.holds.to_string(),
                    ]
                })
                .collect();
            let parts: Vec<String> =
                r.summary.iter().map(|m| format!("{} {:.3}", m.method.name(), m.inequality_frequency)).collect();
            let line = format!("selection {}: n = {n}, k* = {}, inequality holds: {}", r.scenario, r.k_star, parts.join(", "));
            let summary = Summary::Selection(SelectionSummary {
                scenario: r.scenario.clone(),
                seed,
                n,
                trials,
                k_star: r.k_star,
                true_mins: r.true_mins.clone(),
                delta_bar: r.delta_bar.clone(),
                delta_tilde: r.delta_tilde.clone(),
                methods: r.summary.clone(),
            });
            Ok(Outcome {
                summary,
                header: vec!["scenario", "n", "trial", "method", "k_hat", "excess", "bound", "holds"],
                rows,
                line,
            })
        }
        ExperimentKind::Rate => unreachable!("handled above"),
    }
}

pub fn csv_bytes(outcome: &Outcome) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&outcome.header)?;
    for row in &outcome.rows {
        w.write_record(row)?;
    }
    w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))
}

/// Writes the CSV and JSON artifacts; returns their paths.
pub fn write_artifacts(cfg: &RunConfig, outcome: &Outcome, out_dir: &Path) -> Result<(PathBuf, PathBuf), CliError> {
    let csv = csv_bytes(outcome)?;
    let json = serde_json::to_string_pretty(&outcome.summary)?;
    std::fs::create_dir_all(out_dir).map_err(CliError::io(out_dir))?;
    let csv_path = out_dir.join(cfg.output.csv.clone().unwrap_or_else(|| format!("{}.csv", cfg.experiment.name())));
    let json_path = out_dir.join(cfg.output.json.clone().unwrap_or_else(|| "summary.json".into()));
    std::fs::write(&csv_path, csv).map_err(CliError::io(&csv_path))?;
    std::fs::write(&json_path, json + "\n").map_err(CliError::io(&json_path))?;
    Ok((csv_path, json_path))
}
