use rayon::prelude::*;

use super::oracle::{ClassMoments, MetricKind, OracleDistribution};
use super::{delta_minimal, EvaluationMatrix, FunctionClass};
use crate::complexity::RademacherDraw;
use crate::error::{Error, Result};
use crate::stats::Estimate;

/// A statistic of the delta-minimal sets `{f : excess(f) <= delta}` as a
/// function of `delta`.
///
/// The sets only change at member excess values, so the statistic is stored
/// once per prefix of the excess ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimalSetProfile {
    order: Vec<usize>,
    thresholds: Vec<f64>,
    values: Vec<f64>,
    slack: f64,
}

impl MinimalSetProfile {
    fn ordering(excess: &[f64]) -> (Vec<usize>, Vec<f64>) {
        let mut order: Vec<usize> = (0..excess.len()).collect();
        order.sort_by(|&a, &b| excess[a].total_cmp(&excess[b]).then(a.cmp(&b)));
        let thresholds = order.iter().map(|&i| excess[i]).collect();
        (order, thresholds)
    }

    /// Member indices sorted by excess.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Sorted excess values.
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    /// Statistic of the first `k + 1` members in excess order.
    pub fn prefix_values(&self) -> &[f64] {
        &self.values
    }

    /// Number of members in the delta-minimal set.
    pub fn prefix_len(&self, delta: f64) -> usize {
        self.thresholds.partition_point(|e| *e <= delta + self.slack)
    }

    /// Statistic of the delta-minimal set; zero when the set is empty.
    pub fn at(&self, delta: f64) -> f64 {
        match self.prefix_len(delta) {
            0 => 0.0,
            k => self.values[k - 1],
        }
    }
}

/// `sup |a_f - a_g|` over every prefix of `order`.
fn prefix_spread(order: &[usize], a: &[f64]) -> Vec<f64> {
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    order
        .iter()
        .map(|&i| {
            hi = hi.max(a[i]);
            lo = lo.min(a[i]);
            hi - lo
        })
        .collect()
}

/// `sqrt(max dist2)` over every prefix of `order`.
fn prefix_diameter(order: &[usize], dist2: impl Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut best: f64 = 0.0;
    order
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            for &j in &order[..k] {
                best = best.max(dist2(i, j));
            }
            best.sqrt()
        })
        .collect()
}

/// Monte Carlo estimate of `phi_n(delta) = E sup_{f, g in F(delta)} |(P_n - P)(f - g)|`
/// for every `delta` at once.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiProfile {
    pub mean: MinimalSetProfile,
    pub stderr: Vec<f64>,
    pub replicates: usize,
}

impl PhiProfile {
    pub fn at(&self, delta: f64) -> Estimate {
        match self.mean.prefix_len(delta) {
            0 => Estimate::exact(0.0),
            k => Estimate { mean: self.mean.values[k - 1], stderr: self.stderr[k - 1] },
        }
    }
}

pub fn phi_n_profile<P: Send + Sync>(
    oracle: &dyn OracleDistribution<P>,
    class: &FunctionClass<P>,
    moments: &ClassMoments,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<PhiProfile> {
    if replicates < 2 || n == 0 {
        return Err(Error::BadParams("need n > 0 and at least two replicates".into()));
    }
    let (order, thresholds) = MinimalSetProfile::ordering(&moments.excess());
    let runs: Vec<Vec<f64>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let sample = oracle.draw(n, seed, &[r as u64]);
            let risks = class.empirical_risks(&sample)?;
            let dev: Vec<f64> = risks.iter().zip(&moments.risks).map(|(a, b)| a - b).collect();
            Ok(prefix_spread(&order, &dev))
        })
        .collect::<Result<_>>()?;
    let m = class.len();
    let mut mean = Vec::with_capacity(m);
    let mut stderr = Vec::with_capacity(m);
    let mut column = vec![0.0; replicates];
    for k in 0..m {
        for (c, run) in column.iter_mut().zip(&runs) {
            *c = run[k];
        }
        let e = Estimate::from_samples(&column);
        mean.push(e.mean);
        stderr.push(e.stderr);
    }
    Ok(PhiProfile {
        mean: MinimalSetProfile { order, thresholds, values: mean, slack: moments.accuracy },
        stderr,
        replicates,
    })
}

/// `phi_n(delta)` for a single `delta`.
pub fn phi_n<P: Send + Sync>(
    oracle: &dyn OracleDistribution<P>,
    class: &FunctionClass<P>,
    n: usize,
    delta: f64,
    replicates: usize,
    seed: u64,
) -> Result<Estimate> {
    let moments = oracle.moments(class)?;
    Ok(phi_n_profile(oracle, class, &moments, n, replicates, seed)?.at(delta))
}

/// `D(delta) = sup_{f, g in F(delta)} rho_P(f, g)` for every `delta`.
pub fn diameter_profile(moments: &ClassMoments, metric: MetricKind) -> MinimalSetProfile {
    let (order, thresholds) = MinimalSetProfile::ordering(&moments.excess());
    let values = prefix_diameter(&order, |i, j| moments.dist2(i, j, metric));
    MinimalSetProfile { order, thresholds, values, slack: moments.accuracy }
}

/// Largest distance between members of `indices` under `dist2`.
pub fn diameter(indices: &[usize], dist2: impl Fn(usize, usize) -> f64) -> f64 {
    let mut best: f64 = 0.0;
    for (k, &i) in indices.iter().enumerate() {
        for &j in &indices[k + 1..] {
            best = best.max(dist2(i, j));
        }
    }
    best.sqrt()
}

fn rademacher_averages(matrix: &EvaluationMatrix, draw: &RademacherDraw) -> Vec<f64> {
    let n = matrix.n() as f64;
    (0..matrix.m())
        .map(|j| matrix.column(j).iter().zip(&draw.signs).map(|(v, s)| v * s).sum::<f64>() / n)
        .collect()
}

/// `sup_{f, g in F_n(delta)} |R_n(f - g)|` over the empirical delta-minimal
/// set, averaged over the supplied sign vectors.
pub fn phi_hat(matrix: &EvaluationMatrix, draws: &[RademacherDraw], delta: f64) -> Result<f64> {
    check_draws(matrix, draws)?;
    let set = delta_minimal(&matrix.means(), delta, 0.0)?;
    let total: f64 = draws
        .iter()
        .map(|d| *prefix_spread(&set, &rademacher_averages(matrix, d)).last().expect("nonempty set"))
        .sum();
    Ok(total / draws.len() as f64)
}

fn check_draws(matrix: &EvaluationMatrix, draws: &[RademacherDraw]) -> Result<()> {
    if draws.is_empty() || draws.iter().any(|d| d.signs.len() != matrix.n()) {
        return Err(Error::BadParams("sign vectors must be nonempty and match the sample size".into()));
    }
    Ok(())
}

/// Data-dependent profiles over the empirical delta-minimal sets.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalProfiles {
    /// `phi_hat_n(delta)`.
    pub phi_hat: MinimalSetProfile,
    /// `D_hat_n(delta) = sup rho_{P_n}(f, g)`.
    pub d_hat: MinimalSetProfile,
    pub empirical_risks: Vec<f64>,
}

pub fn empirical_profiles(matrix: &EvaluationMatrix, draws: &[RademacherDraw]) -> Result<EmpiricalProfiles> {
    check_draws(matrix, draws)?;
    let risks = matrix.means();
    let best = risks.iter().copied().fold(f64::INFINITY, f64::min);
    let excess: Vec<f64> = risks.iter().map(|r| r - best).collect();
    let (order, thresholds) = MinimalSetProfile::ordering(&excess);
    let mut phi = vec![0.0; matrix.m()];
    for d in draws {
        for (acc, v) in phi.iter_mut().zip(prefix_spread(&order, &rademacher_averages(matrix, d))) {
            *acc += v / draws.len() as f64;
        }
    }
    let gram = matrix.gram();
    let diam = prefix_diameter(&order, |i, j| (gram[[i, i]] + gram[[j, j]] - 2.0 * gram[[i, j]]).max(0.0));
    Ok(EmpiricalProfiles {
        phi_hat: MinimalSetProfile { order: order.clone(), thresholds: thresholds.clone(), values: phi, slack: 0.0 },
        d_hat: MinimalSetProfile { order, thresholds, values: diam, slack: 0.0 },
        empirical_risks: risks,
    })
}

/// `r_check(sigma, delta) = sup_{f in F(delta)} inf_{g in F(sigma)} rho_P(f, g)`.
pub fn r_check(moments: &ClassMoments, sigma: f64, delta: f64, metric: MetricKind) -> Result<f64> {
    if sigma < 0.0 || delta < 0.0 {
        return Err(Error::BadParams("sigma and delta must be nonnegative".into()));
    }
    let near = delta_minimal(&moments.risks, sigma, moments.accuracy)?;
    if near.is_empty() {
        return Err(Error::EmptyMinimalSet(sigma));
    }
    let far = delta_minimal(&moments.risks, delta, moments.accuracy)?;
    Ok(far
        .iter()
        .map(|&f| near.iter().map(|&g| moments.dist2(f, g, metric)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
        .sqrt())
}
