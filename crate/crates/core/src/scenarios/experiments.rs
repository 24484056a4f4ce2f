use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cube_scenario, ExperimentPlan, Scenario};
use crate::bounds::{bound_report, delta_hat, BoundConstants, TrueComplexity};
use crate::class::{argmin, empirical_profiles, EvaluationMatrix, FunctionClass, MetricKind, Sample};
use crate::complexity::{
    bound_curve, mendelson_curve, modulus_curve, shattering_number, BoundCurveParams, ModulusMetric, RademacherDraw,
    SignSet,
};
use crate::error::{Error, Result};
use crate::rng;
use crate::selection::{
    cumulative_max, dimension_penalty, k_star, kernel_penalty, massart_penalty, penalty_v1, penalty_v2,
    rademacher_penalty, select_comparison, select_penalized, shattering_penalty, ComparisonConstants,
    ComparisonOracle, ConvexLink, MassartConstants, Method, SelectionResult,
};
use crate::stats::{fit_line, Estimate, LineFit};

/// Tolerance used to identify equal true minima.
const MIN_TOL: f64 = 1e-12;

/// Constants of every selection method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodOptions {
    pub bounds: BoundConstants<f64>,
    pub comparison: ComparisonConstants,
    pub k_v1: f64,
    pub k_dimension: f64,
    pub k_shattering: f64,
    pub k_kernel: f64,
    pub k_rademacher: f64,
    pub massart: MassartConstants<f64>,
    /// `eps` of the version-2 and variance-condition penalties.
    pub eps: f64,
    /// `D` of the link `phi(u) = u^2 / D`; `None` takes the scenario's first
    /// variance constant, or 4.
    pub link_d: Option<f64>,
    /// Rademacher sign vectors per sample.
    pub sign_draws: usize,
}

impl Default for MethodOptions {
    fn default() -> Self {
        Self {
            bounds: BoundConstants::default(),
            comparison: ComparisonConstants::default(),
            k_v1: 5.0,
            k_dimension: 2.0,
            k_shattering: 6.0,
            k_kernel: 2.0,
            k_rademacher: 2.0,
            massart: MassartConstants::default(),
            eps: 0.5,
            link_d: None,
            sign_draws: 64,
        }
    }
}

/// Result of running one method on one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub k_hat: usize,
    /// Index of the chosen member in the family's union.
    pub selected: usize,
    pub label: String,
    pub empirical_risk: f64,
    pub true_risk: f64,
    pub selection: SelectionResult,
}

/// Per-scenario state shared by all samples.
struct Prepared<P> {
    universe: FunctionClass<P>,
    maps: Vec<Vec<usize>>,
    true_risks: Vec<f64>,
}

struct OracleSide {
    true_mins: Vec<f64>,
    delta_bar: Vec<f64>,
    delta_tilde: Vec<f64>,
}

impl<P> Prepared<P> {
    fn new(scenario: &Scenario<P>) -> Result<Self> {
        let (universe, maps) = scenario.family.universe()?;
        let true_risks = scenario.oracle.risks(&universe)?;
        Ok(Self { universe, maps, true_risks })
    }

    fn true_mins(&self) -> Vec<f64> {
        self.maps.iter().map(|m| m.iter().map(|&i| self.true_risks[i]).fold(f64::INFINITY, f64::min)).collect()
    }

    fn best_risk(&self) -> f64 {
        self.true_risks.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn needs_matrix(method: Method) -> bool {
    matches!(method, Method::V1 | Method::V2 | Method::Comparison | Method::Shattering | Method::Rademacher)
}

fn submatrix(matrix: &EvaluationMatrix, idx: &[usize]) -> Result<EvaluationMatrix> {
    let cols: Vec<Vec<f64>> = idx.iter().map(|&j| matrix.column(j).to_vec()).collect();
    EvaluationMatrix::from_columns(&cols)
}

fn sign_set(n: usize, draws: usize, key: u64) -> SignSet {
    SignSet { draws: (0..draws as u64).map(|k| RademacherDraw::sample(n, key, &[k])).collect(), exhaustive: false }
}

fn delta_hats(
    matrix: &EvaluationMatrix,
    maps: &[Vec<usize>],
    signs: &SignSet,
    consts: &BoundConstants<f64>,
    t: &[f64],
) -> Result<Vec<f64>> {
    let n = matrix.n();
    maps.iter()
        .zip(t)
        .map(|(idx, &tk)| {
            let prof = empirical_profiles(&submatrix(matrix, idx)?, &signs.draws)?;
            let grid = crate::transform::GeometricGrid::for_sample(consts.q, n, tk)?;
            delta_hat(&|d| prof.phi_hat.at(d), &|d| prof.d_hat.at(d), &grid, consts, tk, n)
        })
        .collect()
}

fn required<T: Clone>(v: &Option<T>, what: &str) -> Result<T> {
    v.clone().ok_or_else(|| Error::BadParams(format!("scenario does not provide {what}")))
}

fn evaluate_prepared<P>(
    scenario: &Scenario<P>,
    prep: &Prepared<P>,
    sample: &Sample<P>,
    method: Method,
    opts: &MethodOptions,
    sign_key: u64,
    side: Option<&OracleSide>,
) -> Result<MethodOutcome> {
    let n = sample.len();
    let t = scenario.family.t_schedule();
    let matrix = if needs_matrix(method) { Some(prep.universe.evaluate(sample)?) } else { None };
    let emp = match &matrix {
        Some(m) => m.means(),
        None => prep.universe.empirical_risks(sample)?,
    };
    let local: Vec<usize> = prep
        .maps
        .iter()
        .map(|idx| argmin(&idx.iter().map(|&i| emp[i]).collect::<Vec<_>>()))
        .collect::<Result<_>>()?;
    let mins: Vec<f64> = prep.maps.iter().zip(&local).map(|(idx, &b)| emp[idx[b]]).collect();
    let signs = || sign_set(n, opts.sign_draws.max(1), sign_key);
    let hats = |m: &EvaluationMatrix| delta_hats(m, &prep.maps, &signs(), &opts.bounds, t);
    let sub_all = |m: &EvaluationMatrix| prep.maps.iter().map(|idx| submatrix(m, idx)).collect::<Result<Vec<_>>>();
    let truth = &scenario.truth;
    let selection = match method {
        Method::Erm => select_penalized(method, &mins, &vec![0.0; mins.len()], None)?,
        Method::V1 => {
            let dh = hats(matrix.as_ref().expect("matrix"))?;
            let pen = penalty_v1(opts.k_v1, &dh, &mins, t, n)?;
            select_penalized(method, &mins, &pen, Some(&dh))?
        }
        Method::V2 => {
            let dh = hats(matrix.as_ref().expect("matrix"))?;
            let d = opts.link_d.or_else(|| truth.variance_constants.as_ref().map(|v| v[0])).unwrap_or(4.0);
            let link = ConvexLink::quadratic(d)?;
            let pen = penalty_v2(&[link], opts.eps, &dh, None, t, n)?;
            select_penalized(method, &mins, &pen.hat, Some(&dh))?
        }
        Method::Comparison => {
            let dh = hats(matrix.as_ref().expect("matrix"))?;
            let oracle = side.map(|s| ComparisonOracle {
                true_mins: &s.true_mins,
                delta_bar: &s.delta_bar,
                delta_tilde: &s.delta_tilde,
                tol: MIN_TOL,
            });
            select_comparison(&scenario.family, &mins, &dh, opts.comparison, oracle)?
        }
        Method::Dimension => {
            let dims = required(&truth.dims, "model dimensions")?;
            let pen = dimension_penalty(opts.k_dimension, &dims, t, n)?;
            select_penalized(method, &mins, &pen, None)?
        }
        Method::Shattering => {
            let logs = sub_all(matrix.as_ref().expect("matrix"))?
                .iter()
                .map(|m| shattering_number(m).map(|s| (s as f64).ln()))
                .collect::<Result<Vec<_>>>()?;
            let pen = shattering_penalty(opts.k_shattering, &logs, &mins, t, n)?;
            select_penalized(method, &mins, &pen, None)?
        }
        Method::Rademacher => {
            let s = signs();
            let curves = sub_all(matrix.as_ref().expect("matrix"))?
                .iter()
                .map(|m| modulus_curve(m, &s, ModulusMetric::Empirical))
                .collect::<Result<Vec<_>>>()?;
            let pen = rademacher_penalty(opts.k_rademacher, &curves, t, n)?;
            select_penalized(method, &mins, &pen, None)?
        }
        Method::Kernel => {
            let kernels = scenario.kernels.as_ref().ok_or_else(|| Error::BadParams("scenario has no kernels".into()))?;
            if kernels.len() != mins.len() {
                return Err(Error::BadParams("need one kernel per model".into()));
            }
            let curves = kernels
                .iter()
                .map(|k| mendelson_curve(&k.gram_spectrum(&sample.points)?, n))
                .collect::<Result<Vec<_>>>()?;
            let pen = kernel_penalty(opts.k_kernel, &curves, t, n)?;
            select_penalized(method, &mins, &pen, None)?
        }
        Method::Massart => {
            let dims = required(&truth.dims, "model dimensions")?;
            let d = required(&truth.variance_constants, "variance constants")?;
            let theta = dims
                .iter()
                .map(|&dk| bound_curve(&BoundCurveParams::FiniteDim { d: dk as f64 }, n, 1.0))
                .collect::<Result<Vec<_>>>()?;
            let pen = massart_penalty(&d, &theta, opts.eps, opts.massart, t, n)?;
            select_penalized(method, &mins, &pen.penalty, None)?
        }
    };
    let k_hat = selection.k_hat;
    let selected = prep.maps[k_hat][local[k_hat]];
    Ok(MethodOutcome {
        method,
        k_hat,
        selected,
        label: prep.universe.member(selected).label().to_owned(),
        empirical_risk: emp[selected],
        true_risk: prep.true_risks[selected],
        selection,
    })
}

/// Runs `method` on one sample of `scenario`.
pub fn evaluate_method<P>(
    scenario: &Scenario<P>,
    sample: &Sample<P>,
    method: Method,
    opts: &MethodOptions,
    sign_key: u64,
) -> Result<MethodOutcome> {
    let prep = Prepared::new(scenario)?;
    evaluate_prepared(scenario, &prep, sample, method, opts, sign_key, None)
}

/// One replicate of a rate experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub scenario: String,
    pub n: usize,
    pub trial: usize,
    pub excess: f64,
    pub k_hat: usize,
    pub delta_n: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub scenario: String,
    pub method: Method,
    pub rows: Vec<RateRow>,
    pub n_values: Vec<usize>,
    pub means: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// Log-log fit over the upper half of the sweep.
    pub fit: Option<LineFit>,
    pub fit_from: usize,
    /// True when the fit is undefined, e.g. all excess risks vanish.
    pub degenerate: bool,
    /// `-beta` from the scenario's truth.
    pub expected_slope: Option<f64>,
}

impl RateReport {
    pub fn slope(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

/// For each `n`, builds the scenario, draws `replicates` samples and records
/// the excess risk of `method` over the Bayes risk (or the best member when
/// the Bayes risk is unknown).
pub fn run_rate_experiment<P: Send + Sync>(
    builder: &(dyn Fn(usize) -> Result<Scenario<P>> + Sync),
    plan: &ExperimentPlan,
    method: Method,
    opts: &MethodOptions,
) -> Result<RateReport> {
    plan.validate()?;
    let mut rows = Vec::new();
    let (mut means, mut stderrs) = (Vec::new(), Vec::new());
    let mut name = String::new();
    let mut expected_slope = None;
    for &n in &plan.n_sweep {
        let scenario = builder(n)?;
        let prep = Prepared::new(&scenario)?;
        let reference = scenario.truth.bayes_risk.unwrap_or_else(|| prep.best_risk());
        let delta_n = if plan.bound_replicates >= 2 {
            let tc = TrueComplexity::estimate(
                scenario.oracle.as_ref(),
                &prep.universe,
                n,
                plan.bound_replicates,
                rng::stream_key(plan.seed, &[n as u64, 2]),
                MetricKind::L2,
            )?;
            Some(bound_report(&tc, None, &opts.bounds, plan.t)?.delta_n)
        } else {
            None
        };
        let outcomes: Vec<MethodOutcome> = (0..plan.replicates)
            .into_par_iter()
            .map(|r| {
                let sample = scenario.oracle.draw(n, plan.seed, &[n as u64, r as u64]);
                let key = rng::stream_key(plan.seed, &[n as u64, r as u64, 1]);
                evaluate_prepared(&scenario, &prep, &sample, method, opts, key, None)
            })
            .collect::<Result<_>>()?;
        let excess: Vec<f64> = outcomes.iter().map(|o| (o.true_risk - reference).max(0.0)).collect();
        let e = Estimate::from_samples(&excess);
        means.push(e.mean);
        stderrs.push(e.stderr);
        for (trial, (o, ex)) in outcomes.iter().zip(&excess).enumerate() {
            rows.push(RateRow { scenario: scenario.name.clone(), n, trial, excess: *ex, k_hat: o.k_hat, delta_n });
        }
        name = scenario.name.clone();
        expected_slope = scenario.truth.rate_exponent.map(|b| -b);
    }
    let fit_from = plan.n_sweep.len() / 2;
    let (xs, ys): (Vec<f64>, Vec<f64>) = plan.n_sweep[fit_from..]
        .iter()
        .zip(&means[fit_from..])
        .map(|(n, m)| ((*n as f64).ln(), m.ln()))
        .unzip();
    let fit = if means[fit_from..].iter().all(|m| *m > 0.0) { fit_line(&xs, &ys) } else { None };
    Ok(RateReport {
        scenario: name,
        method,
        rows,
        n_values: plan.n_sweep.clone(),
        means,
        stderrs,
        degenerate: fit.is_none(),
        fit,
        fit_from,
        expected_slope,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop2Row {
    pub n_coords: usize,
    pub delta_n: f64,
    /// `0.25 sqrt(log N / n)`.
    pub threshold: f64,
    /// Fraction of trials where some member falls outside the empirical
    /// `threshold`-minimal set.
    pub non_inclusion: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop2Report {
    pub n: usize,
    pub t: f64,
    pub trials: usize,
    pub rows: Vec<Prop2Row>,
    pub delta_monotone: bool,
    pub frequency_monotone: bool,
}

/// Cube experiment: `delta_n(t)` and the non-inclusion frequency for each
/// `N` in `n_coords`. Samples share a stream across `N`, so the cubes are
/// nested within each trial.
pub fn prop2_experiment(
    n_coords: &[usize],
    n: usize,
    t: f64,
    trials: usize,
    phi_replicates: usize,
    seed: u64,
) -> Result<Prop2Report> {
    if n_coords.is_empty() || trials == 0 {
        return Err(Error::BadParams("need some N and at least one trial".into()));
    }
    if let Some(big) = n_coords.iter().find(|&&nc| (nc * nc) > n) {
        return Err(Error::BadParams(format!("N = {big} exceeds sqrt(n) = {}", (n as f64).sqrt())));
    }
    let consts = BoundConstants::default();
    let rows = n_coords
        .iter()
        .map(|&nc| {
            let s = cube_scenario(nc)?;
            let tc = TrueComplexity::estimate(s.oracle.as_ref(), s.class(), n, phi_replicates, seed, MetricKind::L2)?;
            let delta_n = bound_report(&tc, None, &consts, t)?.delta_n;
            let threshold = 0.25 * ((nc as f64).ln() / n as f64).sqrt();
            let hits = (0..trials)
                .into_par_iter()
                .map(|r| {
                    let sample = s.oracle.draw(n, seed, &[1, r as u64]);
                    let risks = s.class().empirical_risks(&sample)?;
                    let (lo, hi) = risks.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
                    Ok(usize::from(hi - lo > threshold))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .sum::<usize>();
            Ok(Prop2Row { n_coords: nc, delta_n, threshold, non_inclusion: hits as f64 / trials as f64 })
        })
        .collect::<Result<Vec<_>>>()?;
    let delta_monotone = rows.windows(2).all(|w| w[0].delta_n <= w[1].delta_n);
    let frequency_monotone = rows.windows(2).all(|w| w[0].non_inclusion <= w[1].non_inclusion);
    Ok(Prop2Report { n, t, trials, rows, delta_monotone, frequency_monotone })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingReport {
    pub scenario: String,
    pub n: usize,
    pub t: f64,
    pub trials: usize,
    pub delta_bar: f64,
    pub delta_tilde: f64,
    pub delta_hat: Vec<f64>,
    pub ordered: Vec<bool>,
    pub frequency: f64,
}

/// Frequency of `delta_bar <= delta_hat <= delta_tilde` on the first class.
#[allow(clippy::too_many_arguments)]
pub fn ordering_experiment<P: Send + Sync>(
    scenario: &Scenario<P>,
    n: usize,
    t: f64,
    trials: usize,
    phi_replicates: usize,
    sign_draws: usize,
    consts: &BoundConstants<f64>,
    seed: u64,
) -> Result<OrderingReport> {
    if trials == 0 || sign_draws == 0 {
        return Err(Error::BadParams("need trials and sign draws".into()));
    }
    let class = scenario.class();
    let tc = TrueComplexity::estimate(
        scenario.oracle.as_ref(),
        class,
        n,
        phi_replicates,
        rng::stream_key(seed, &[2]),
        MetricKind::L2,
    )?;
    let base = bound_report(&tc, None, consts, t)?;
    let reports = (0..trials)
        .into_par_iter()
        .map(|r| {
            let sample = scenario.oracle.draw(n, seed, &[0, r as u64]);
            let matrix = class.evaluate(&sample)?;
            let signs = sign_set(n, sign_draws, rng::stream_key(seed, &[1, r as u64]));
            let prof = empirical_profiles(&matrix, &signs.draws)?;
            bound_report(&tc, Some(&prof), consts, t)
        })
        .collect::<Result<Vec<_>>>()?;
    let delta_hat: Vec<f64> = reports.iter().map(|r| r.delta_hat.expect("empirical profiles given")).collect();
    let ordered: Vec<bool> = reports.iter().map(|r| r.ordered()).collect();
    let frequency = ordered.iter().filter(|o| **o).count() as f64 / trials as f64;
    Ok(OrderingReport {
        scenario: scenario.name.clone(),
        n,
        t,
        trials,
        delta_bar: base.delta_bar,
        delta_tilde: base.delta_tilde,
        delta_hat,
        ordered,
        frequency,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub scenario: String,
    pub n: usize,
    pub t: f64,
    pub trials: usize,
    pub delta_n: f64,
    pub excess: Vec<f64>,
    pub frequency: f64,
    /// `log_q(q n / t) e^{-t}`.
    pub budget: f64,
    /// Three binomial standard errors at the budget.
    pub slack: f64,
    pub pass: bool,
}

/// Frequency of `E(f_hat) > delta_n(t)` for the empirical risk minimizer of
/// the first class, with excess measured from the class minimum.
pub fn coverage_experiment<P: Send + Sync>(
    scenario: &Scenario<P>,
    n: usize,
    t: f64,
    trials: usize,
    phi_replicates: usize,
    consts: &BoundConstants<f64>,
    seed: u64,
) -> Result<CoverageReport> {
    if trials == 0 {
        return Err(Error::BadParams("need at least one trial".into()));
    }
    let class = scenario.class();
    let tc = TrueComplexity::estimate(
        scenario.oracle.as_ref(),
        class,
        n,
        phi_replicates,
        rng::stream_key(seed, &[2]),
        MetricKind::L2,
    )?;
    let delta_n = bound_report(&tc, None, consts, t)?.delta_n;
    let truth = &tc.moments.risks;
    let best = tc.moments.min_risk();
    let excess = (0..trials)
        .into_par_iter()
        .map(|r| {
            let sample = scenario.oracle.draw(n, seed, &[0, r as u64]);
            let risks = class.empirical_risks(&sample)?;
            Ok(truth[argmin(&risks)?] - best)
        })
        .collect::<Result<Vec<f64>>>()?;
    let frequency = excess.iter().filter(|e| **e > delta_n).count() as f64 / trials as f64;
    let q = consts.q;
    let budget = (q * n as f64 / t).ln() / q.ln() * (-t).exp();
    let p = budget.min(1.0);
    let slack = 3.0 * (p * (1.0 - p) / trials as f64).sqrt();
    Ok(CoverageReport {
        scenario: scenario.name.clone(),
        n,
        t,
        trials,
        delta_n,
        excess,
        frequency,
        budget,
        slack,
        pass: frequency <= budget + slack,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionTrial {
    pub trial: usize,
    pub method: Method,
    pub k_hat: usize,
    pub excess: f64,
    /// `C (inf_{F_k*} P f - inf_F P f + pi_tilde(k*))`.
    pub bound: f64,
    pub holds: bool,
    /// Comparison ordering `k_tilde <= k_hat <= k_bar <= k*`, when available.
    pub ordered: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub scenario: String,
    pub n: usize,
    pub true_mins: Vec<f64>,
    pub delta_bar: Vec<f64>,
    pub delta_tilde: Vec<f64>,
    /// Reference penalties `K_tilde [delta_tilde_k + sqrt((t_k/n) inf_{F_k} P f) + t_k/n]`.
    pub reference_penalty: Vec<f64>,
    pub k_star: usize,
    pub trials: Vec<SelectionTrial>,
    /// Per method: `(method, C, frequency of the oracle inequality, frequency of k_hat <= k*, realized constant)`.
    pub summary: Vec<MethodSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub constant: f64,
    pub inequality_frequency: f64,
    pub k_hat_at_most_k_star: f64,
    /// Largest observed ratio of excess to the oracle term.
    pub realized_constant: f64,
}

/// Oracle-inequality experiment on a family. The comparison method uses
/// `C = c_tilde + 1` with `max_{j <= k*} delta_tilde_j` as its oracle term;
/// every other method uses `C = 1` with the reference penalty.
#[allow(clippy::too_many_arguments)]
pub fn selection_experiment<P: Send + Sync>(
    scenario: &Scenario<P>,
    n: usize,
    trials: usize,
    methods: &[Method],
    opts: &MethodOptions,
    phi_replicates: usize,
    seed: u64,
) -> Result<SelectionReport> {
    if trials == 0 || methods.is_empty() {
        return Err(Error::BadParams("need trials and methods".into()));
    }
    let prep = Prepared::new(scenario)?;
    let t = scenario.family.t_schedule();
    let (mut delta_bar, mut delta_tilde) = (Vec::new(), Vec::new());
    for (k, class) in scenario.family.classes().iter().enumerate() {
        let tc = TrueComplexity::estimate(
            scenario.oracle.as_ref(),
            class,
            n,
            phi_replicates,
            rng::stream_key(seed, &[2, k as u64]),
            MetricKind::L2,
        )?;
        let rep = bound_report(&tc, None, &opts.bounds, t[k])?;
        delta_bar.push(rep.delta_bar);
        delta_tilde.push(rep.delta_tilde);
    }
    let true_mins = prep.true_mins();
    let best = prep.best_risk();
    let ks = k_star(&true_mins, MIN_TOL)?;
    let reference_penalty = penalty_v1(opts.bounds.k_tilde, &delta_tilde, &true_mins, t, n)?;
    let approx = true_mins[ks] - best;
    let cum_tilde = cumulative_max(&delta_tilde);
    let side = OracleSide { true_mins: true_mins.clone(), delta_bar: delta_bar.clone(), delta_tilde: delta_tilde.clone() };
    let term = |m: Method| match m {
        Method::Comparison => (opts.comparison.c_tilde + 1.0, approx + cum_tilde[ks]),
        _ => (1.0, approx + reference_penalty[ks]),
    };
    let rows: Vec<Vec<SelectionTrial>> = (0..trials)
        .into_par_iter()
        .map(|r| {
            let sample = scenario.oracle.draw(n, seed, &[0, r as u64]);
            let key = rng::stream_key(seed, &[1, r as u64]);
            methods
                .iter()
                .map(|&m| {
                    let o = evaluate_prepared(scenario, &prep, &sample, m, opts, key, Some(&side))?;
                    let (c, base) = term(m);
                    let excess = o.true_risk - best;
                    Ok(SelectionTrial {
                        trial: r,
                        method: m,
                        k_hat: o.k_hat,
                        excess,
                        bound: c * base,
                        holds: excess <= c * base,
                        ordered: o.selection.diagnostics.ordered,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let trials_flat: Vec<SelectionTrial> = rows.into_iter().flatten().collect();
    let summary = methods
        .iter()
        .map(|&m| {
            let mine: Vec<&SelectionTrial> = trials_flat.iter().filter(|r| r.method == m).collect();
            let count = mine.len() as f64;
            let (c, base) = term(m);
            MethodSummary {
                method: m,
                constant: c,
                inequality_frequency: mine.iter().filter(|r| r.holds).count() as f64 / count,
                k_hat_at_most_k_star: mine.iter().filter(|r| r.k_hat <= ks).count() as f64 / count,
                realized_constant: mine.iter().map(|r| r.excess / base).fold(0.0, f64::max),
            }
        })
        .collect();
    Ok(SelectionReport {
        scenario: scenario.name.clone(),
        n,
        true_mins,
        delta_bar,
        delta_tilde,
        reference_penalty,
        k_star: ks,
        trials: trials_flat,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{finite_dim_regression, nested_regression, tsybakov_scenario, NetSpec};

    #[test]
    fn cube_rate_is_degenerate() {
        let plan = ExperimentPlan::new(vec![32, 64], 3, 1.0, 4).unwrap();
        let r = run_rate_experiment(&|_| cube_scenario(5), &plan, Method::Erm, &MethodOptions::default()).unwrap();
        assert!(r.means.iter().all(|m| *m == 0.0));
        assert!(r.degenerate && r.fit.is_none());
    }

    #[test]
    fn rate_experiment_is_deterministic() {
        let plan = ExperimentPlan::new(vec![64, 128, 256], 4, 1.0, 11).unwrap();
        let build = |n: usize| finite_dim_regression(2, NetSpec::adaptive(n));
        let a = run_rate_experiment(&build, &plan, Method::Erm, &MethodOptions::default()).unwrap();
        let b = run_rate_experiment(&build, &plan, Method::Erm, &MethodOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 12);
        assert_eq!(a.expected_slope, Some(-1.0));
    }

    #[test]
    fn every_method_runs() {
        let s = nested_regression(vec![0.5, 0.06, 0.0], 0.03, 2, 2.0).unwrap();
        let sample = s.oracle.draw(64, 3, &[0]);
        let opts = MethodOptions::default();
        for m in [Method::Erm, Method::V1, Method::V2, Method::Comparison, Method::Dimension, Method::Rademacher, Method::Massart] {
            let o = evaluate_method(&s, &sample, m, &opts, 9).unwrap();
            assert!(o.k_hat < 3);
            assert!(o.true_risk >= s.truth.bayes_risk.unwrap() - 1e-15);
        }
        assert!(matches!(evaluate_method(&s, &sample, Method::Shattering, &opts, 9), Err(Error::NotBinary)));
        assert!(evaluate_method(&s, &sample, Method::Kernel, &opts, 9).is_err());
        let cls = tsybakov_scenario(1.0, 0.5, 8).unwrap();
        let o = evaluate_method(&cls, &cls.oracle.draw(50, 1, &[0]), Method::Shattering, &opts, 2).unwrap();
        assert_eq!(o.k_hat, 0);
    }

    #[test]
    fn prop2_needs_small_n() {
        assert!(prop2_experiment(&[20], 100, 1.0, 5, 4, 0).is_err());
        let r = prop2_experiment(&[1, 3], 64, 1.0, 20, 8, 0).unwrap();
        assert!(r.rows[0].delta_n > 0.0);
        assert_eq!(r.rows[0].threshold, 0.0);
    }
}
