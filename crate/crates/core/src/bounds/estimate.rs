use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::formulas::{delta_family, delta_n, u_n, BoundConstants, FamilyInputs};
use crate::class::{
    delta_minimal, diameter_profile, phi_n_profile, r_check, ClassMoments, EmpiricalProfiles, FunctionClass,
    MetricKind, MinimalSetProfile, OracleDistribution, PhiProfile,
};
use crate::error::{Error, Result};
use crate::transform::{sharp_q_table, GeometricGrid, GridTable};

/// Distribution-dependent localized complexities of a class at sample size
/// `n`, estimated once and reused across samples.
#[derive(Debug, Clone)]
pub struct TrueComplexity {
    pub moments: ClassMoments,
    pub phi: PhiProfile,
    pub diam: MinimalSetProfile,
    pub n: usize,
    pub metric: MetricKind,
}

impl TrueComplexity {
    pub fn estimate<P: Send + Sync>(
        oracle: &dyn OracleDistribution<P>,
        class: &FunctionClass<P>,
        n: usize,
        replicates: usize,
        seed: u64,
        metric: MetricKind,
    ) -> Result<Self> {
        let moments = oracle.moments(class)?;
        let phi = phi_n_profile(oracle, class, &moments, n, replicates, seed)?;
        let diam = diameter_profile(&moments, metric);
        Ok(Self { moments, phi, diam, n, metric })
    }

    pub fn phi_at(&self, delta: f64) -> f64 {
        self.phi.mean.at(delta)
    }

    pub fn diam_at(&self, delta: f64) -> f64 {
        self.diam.at(delta)
    }
}

/// Flat summary of the bound family at one sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub grid: Vec<f64>,
    pub phi: Vec<f64>,
    #[serde(rename = "D")]
    pub d: Vec<f64>,
    #[serde(rename = "U")]
    pub u: Vec<f64>,
    pub delta_n: f64,
    pub delta_bar: f64,
    pub delta_hat: Option<f64>,
    pub delta_tilde: f64,
    pub sigma: Option<f64>,
    pub r_check: Option<Vec<f64>>,
    pub delta_check: Option<f64>,
}

impl BoundReport {
    /// `delta_bar <= delta_hat <= delta_tilde`; false when `delta_hat` is absent.
    pub fn ordered(&self) -> bool {
        self.delta_hat.is_some_and(|h| self.delta_bar <= h && h <= self.delta_tilde)
    }
}

/// Computes every bound available from the true complexities and, when
/// given, the empirical profiles of one sample.
pub fn bound_report(
    truth: &TrueComplexity,
    empirical: Option<&EmpiricalProfiles>,
    consts: &BoundConstants<f64>,
    t: f64,
) -> Result<BoundReport> {
    consts.validate()?;
    let n = truth.n;
    let grid = GeometricGrid::for_sample(consts.q, n, t)?;
    let phi = GridTable::tabulate(&grid, |d| truth.phi_at(d));
    let diam = GridTable::tabulate(&grid, |d| truth.diam_at(d));
    let u = u_n(&phi, &diam, t, n)?;
    let dn = delta_n(&u)?;
    let phi_fn = |d: f64| truth.phi_at(d);
    let diam_fn = |d: f64| truth.diam_at(d);
    let phi_hat_fn = empirical.map(|e| move |d: f64| e.phi_hat.at(d));
    let diam_hat_fn = empirical.map(|e| move |d: f64| e.d_hat.at(d));
    let inputs = FamilyInputs {
        phi: &phi_fn,
        diam: &diam_fn,
        phi_hat: phi_hat_fn.as_ref().map(|f| f as &dyn Fn(f64) -> f64),
        diam_hat: diam_hat_fn.as_ref().map(|f| f as &dyn Fn(f64) -> f64),
    };
    let family = delta_family(&inputs, &grid, consts, t, n)?;
    Ok(BoundReport {
        grid: grid.points(),
        phi: phi.values,
        d: diam.values,
        u: u.values,
        delta_n: dn,
        delta_bar: family.delta_bar,
        delta_hat: family.delta_hat,
        delta_tilde: family.delta_tilde,
        sigma: None,
        r_check: None,
        delta_check: None,
    })
}

/// Geometric bound around the `sigma`-minimal set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometricBound {
    pub sigma: f64,
    pub grid: Vec<f64>,
    pub r_check: Vec<f64>,
    pub psi_check: Vec<f64>,
    pub u_check: Vec<f64>,
    pub delta_check: f64,
}

impl GeometricBound {
    /// Copies the geometric fields into a report.
    pub fn attach(&self, report: &mut BoundReport) {
        report.sigma = Some(self.sigma);
        report.r_check = Some(self.r_check.clone());
        report.delta_check = Some(self.delta_check);
    }
}

/// `delta_check_n(sigma; t)`: the discretized sharp transform at `1/(2q)` of
/// `U_check(sigma; . ; t) + sigma`, where
/// `U_check = psi_check + sqrt(2 (t/n) (r_check^2 + 2 psi_check)) + t/(2n)`
/// and `psi_check(sigma; delta)` is the expected supremum of
/// `|(P_n - P)(f - g)|` over `g` in `F(sigma)` and `f` in `F(delta)` within
/// `r_check(sigma; delta)` of `g`.
#[allow(clippy::too_many_arguments)]
pub fn geometric_bound<P: Send + Sync>(
    oracle: &dyn OracleDistribution<P>,
    class: &FunctionClass<P>,
    moments: &ClassMoments,
    sigma: f64,
    consts: &BoundConstants<f64>,
    t: f64,
    n: usize,
    replicates: usize,
    seed: u64,
    metric: MetricKind,
) -> Result<GeometricBound> {
    consts.validate()?;
    if !(sigma >= 0.0) || replicates < 2 {
        return Err(Error::BadParams("need sigma >= 0 and at least two replicates".into()));
    }
    let q = consts.q;
    let base = GeometricGrid::for_sample(q, n, t)?;
    let reach = (4.0 * q * sigma.max(1.0)).ln() / q.ln();
    let grid = GeometricGrid::new(q, base.j_min().min(-(reach.ceil() as i32)), base.j_max())?;
    let points = grid.points();
    let acc = moments.accuracy;
    let near = delta_minimal(&moments.risks, sigma, acc)?;
    if near.is_empty() {
        return Err(Error::EmptyMinimalSet(sigma));
    }
    let mut r_values = Vec::with_capacity(points.len());
    let mut pairs: Vec<Vec<(usize, usize)>> = Vec::with_capacity(points.len());
    for &d in &points {
        let r = r_check(moments, sigma, d, metric)?;
        let far = delta_minimal(&moments.risks, d, acc)?;
        let limit = (r + acc).powi(2) + 1e-12;
        pairs.push(
            near.iter()
                .flat_map(|&g| far.iter().map(move |&f| (g, f)))
                .filter(|&(g, f)| moments.dist2(f, g, metric) <= limit)
                .collect(),
        );
        r_values.push(r);
    }
    let runs: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|rep| {
            let sample = oracle.draw(n, seed, &[rep as u64]);
            let risks = class.empirical_risks(&sample)?;
            let dev: Vec<f64> = risks.iter().zip(&moments.risks).map(|(a, b)| a - b).collect();
            Ok(pairs.iter().map(|ps| ps.iter().fold(0.0_f64, |m, &(g, f)| m.max((dev[f] - dev[g]).abs()))).collect())
        })
        .collect::<Result<_>>()?;
    let psi_check: Vec<f64> =
        (0..points.len()).map(|k| runs.iter().map(|r| r[k]).sum::<f64>() / replicates as f64).collect();
    let ratio = t / n as f64;
    let u_check: Vec<f64> = psi_check
        .iter()
        .zip(&r_values)
        .map(|(p, r)| p + (2.0 * ratio * (r * r + 2.0 * p)).sqrt() + ratio / 2.0)
        .collect();
    let shifted = GridTable::new(grid.clone(), u_check.iter().map(|u| u + sigma).collect())?;
    let delta_check = sharp_q_table(&shifted, 1.0 / (2.0 * q), false)?;
    Ok(GeometricBound { sigma, grid: points, r_check: r_values, psi_check, u_check, delta_check })
}
