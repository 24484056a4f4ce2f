use rand::Rng;
use rayon::prelude::*;

use crate::class::{ClassMoments, EvaluationMatrix, FunctionClass, MetricKind, OracleDistribution};
use crate::error::{Error, Result};
use crate::rng;
use crate::stats::Estimate;
use crate::transform::ComplexityCurve;

/// Largest `log2` of the sign-vector count enumerated exhaustively.
pub const EXHAUSTIVE_LOG2_CAP: usize = 16;

/// Monte Carlo sign draws used past the exhaustive cap.
pub const DEFAULT_SIGN_DRAWS: usize = 512;

/// One vector of Rademacher signs, stored as `+-1.0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RademacherDraw {
    pub signs: Vec<f64>,
    pub stream: u64,
}

impl RademacherDraw {
    pub fn sample(n: usize, seed: u64, path: &[u64]) -> Self {
        let stream = rng::stream_key(seed, path);
        let mut g = rng::stream(stream, &[]);
        let signs = (0..n).map(|_| if g.random::<bool>() { 1.0 } else { -1.0 }).collect();
        Self { signs, stream }
    }
}

/// A collection of sign vectors; exhaustive sets give exact expectations.
#[derive(Debug, Clone, PartialEq)]
pub struct SignSet {
    pub draws: Vec<RademacherDraw>,
    pub exhaustive: bool,
}

impl SignSet {
    /// All `2^n` sign vectors.
    pub fn exhaustive(n: usize) -> Result<Self> {
        if n > EXHAUSTIVE_LOG2_CAP {
            return Err(Error::BadParams(format!("2^{n} sign vectors exceed the enumeration cap")));
        }
        let draws = (0..1u64 << n)
            .map(|code| RademacherDraw {
                signs: (0..n).map(|i| if code >> i & 1 == 1 { 1.0 } else { -1.0 }).collect(),
                stream: code,
            })
            .collect();
        Ok(Self { draws, exhaustive: true })
    }

    pub fn monte_carlo(n: usize, draws: usize, seed: u64) -> Self {
        let draws = (0..draws as u64).map(|k| RademacherDraw::sample(n, seed, &[k])).collect();
        Self { draws, exhaustive: false }
    }

    /// Exhaustive when `2^n` is within the cap, otherwise
    /// [`DEFAULT_SIGN_DRAWS`] Monte Carlo draws.
    pub fn auto(n: usize, seed: u64) -> Self {
        Self::exhaustive(n).unwrap_or_else(|_| Self::monte_carlo(n, DEFAULT_SIGN_DRAWS, seed))
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.draws.is_empty() || self.draws.iter().any(|d| d.signs.len() != n) {
            return Err(Error::BadParams("sign vectors must be nonempty and match the sample size".into()));
        }
        Ok(())
    }

    fn estimate(&self, values: &[f64]) -> Estimate {
        let e = Estimate::from_samples(values);
        if self.exhaustive {
            Estimate::exact(e.mean)
        } else {
            e
        }
    }
}

/// `R_n(f_j) = n^{-1} sum_i eps_i f_j(X_i)` for every member.
pub fn rademacher_averages(matrix: &EvaluationMatrix, draw: &RademacherDraw) -> Vec<f64> {
    let n = matrix.n() as f64;
    (0..matrix.m())
        .map(|j| matrix.column(j).iter().zip(&draw.signs).map(|(v, s)| v * s).sum::<f64>() / n)
        .collect()
}

/// `E_eps sup_f |R_n(f)|`.
pub fn rademacher_sup(matrix: &EvaluationMatrix, signs: &SignSet) -> Result<Estimate> {
    signs.check(matrix.n())?;
    let sups: Vec<f64> = signs
        .draws
        .iter()
        .map(|d| rademacher_averages(matrix, d).iter().fold(0.0_f64, |a, r| a.max(r.abs())))
        .collect();
    Ok(signs.estimate(&sups))
}

/// Distance used to localize the Rademacher modulus.
#[derive(Debug, Clone, Copy)]
pub enum ModulusMetric<'a> {
    /// `P_n (f - g)^2`.
    Empirical,
    /// `rho_P(f, g)^2` from the oracle.
    True(&'a ClassMoments, MetricKind),
}

/// Pairs `(i, j)`, `i < j`, sorted by squared distance.
fn sorted_pairs(matrix: &EvaluationMatrix, metric: ModulusMetric<'_>) -> Vec<(f64, usize, usize)> {
    let m = matrix.m();
    let gram = matches!(metric, ModulusMetric::Empirical).then(|| matrix.gram());
    let mut pairs = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        for j in i + 1..m {
            let d2 = match (&gram, metric) {
                (Some(g), _) => (g[[i, i]] + g[[j, j]] - 2.0 * g[[i, j]]).max(0.0),
                (None, ModulusMetric::True(mo, kind)) => mo.dist2(i, j, kind),
                (None, ModulusMetric::Empirical) => unreachable!(),
            };
            pairs.push((d2, i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// Step values of `E_eps sup_{d(f, g) <= delta} |R_n(f - g)|` at every
/// distinct pair distance.
fn modulus_steps(matrix: &EvaluationMatrix, signs: &SignSet, metric: ModulusMetric<'_>) -> Vec<(f64, f64)> {
    let pairs = sorted_pairs(matrix, metric);
    let mut acc = vec![0.0; pairs.len()];
    for draw in &signs.draws {
        let r = rademacher_averages(matrix, draw);
        let mut best: f64 = 0.0;
        for (slot, &(_, i, j)) in acc.iter_mut().zip(&pairs) {
            best = best.max((r[i] - r[j]).abs());
            *slot += best;
        }
    }
    let k = signs.draws.len() as f64;
    let mut steps: Vec<(f64, f64)> = Vec::new();
    for (&(d2, _, _), total) in pairs.iter().zip(acc) {
        match steps.last_mut() {
            Some(last) if last.0 == d2 => last.1 = total / k,
            _ => steps.push((d2, total / k)),
        }
    }
    steps
}

/// `omega_hat(delta) = E_eps sup { |R_n(f - g)| : d(f, g) <= delta }` with
/// `d` the squared metric.
pub fn rademacher_modulus(
    matrix: &EvaluationMatrix,
    signs: &SignSet,
    delta: f64,
    metric: ModulusMetric<'_>,
) -> Result<Estimate> {
    signs.check(matrix.n())?;
    let pairs: Vec<(usize, usize)> =
        sorted_pairs(matrix, metric).into_iter().filter(|p| p.0 <= delta).map(|p| (p.1, p.2)).collect();
    let sups: Vec<f64> = signs
        .draws
        .iter()
        .map(|d| {
            let r = rademacher_averages(matrix, d);
            pairs.iter().fold(0.0_f64, |a, &(i, j)| a.max((r[i] - r[j]).abs()))
        })
        .collect();
    Ok(signs.estimate(&sups))
}

/// The modulus as a step curve in `delta`, with no domain cap.
pub fn modulus_curve(matrix: &EvaluationMatrix, signs: &SignSet, metric: ModulusMetric<'_>) -> Result<ComplexityCurve<f64>> {
    signs.check(matrix.n())?;
    if matrix.m() < 2 {
        return Ok(ComplexityCurve::constant(0.0).unbounded());
    }
    let mut steps = modulus_steps(matrix, signs, metric);
    if steps[0].0 == 0.0 {
        steps[0].0 = f64::MIN_POSITIVE;
    }
    Ok(ComplexityCurve::steps(steps)?.unbounded())
}

fn average_curves(runs: Vec<Vec<(f64, f64)>>) -> Result<ComplexityCurve<f64>> {
    let k = runs.len() as f64;
    let mut knots: Vec<f64> = runs.iter().flat_map(|r| r.iter().map(|s| s.0)).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let value = |run: &[(f64, f64)], x: f64| match run.partition_point(|s| s.0 <= x) {
        0 => 0.0,
        i => run[i - 1].1,
    };
    let mut steps: Vec<(f64, f64)> =
        knots.iter().map(|&x| (x, runs.iter().map(|r| value(r, x)).sum::<f64>() / k)).collect();
    if let Some(first) = steps.first_mut() {
        if first.0 == 0.0 {
            first.0 = f64::MIN_POSITIVE;
        }
    }
    Ok(ComplexityCurve::steps(steps)?.unbounded())
}

/// `theta_n(delta) = E sup { |(P_n - P)(g - f_bar)| : rho_P(g, f_bar)^2 <= delta }`
/// with `f_bar` the risk minimizer, by Monte Carlo.
pub fn theta_n_curve<P: Send + Sync>(
    oracle: &dyn OracleDistribution<P>,
    class: &FunctionClass<P>,
    moments: &ClassMoments,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<ComplexityCurve<f64>> {
    let best = crate::class::argmin(&moments.risks)?;
    let mut order: Vec<(f64, usize)> =
        (0..class.len()).map(|g| (moments.dist2(g, best, MetricKind::L2), g)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let runs = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let sample = oracle.draw(n, seed, &[r as u64]);
            let risks = class.empirical_risks(&sample)?;
            let dev = |g: usize| (risks[g] - moments.risks[g]) - (risks[best] - moments.risks[best]);
            let mut top: f64 = 0.0;
            let mut run: Vec<(f64, f64)> = Vec::new();
            for &(d2, g) in &order {
                top = top.max(dev(g).abs());
                match run.last_mut() {
                    Some(last) if last.0 == d2 => last.1 = top,
                    _ => run.push((d2, top)),
                }
            }
            Ok(run)
        })
        .collect::<Result<Vec<_>>>()?;
    average_curves(runs)
}

/// `omega_bar_n(delta) = E sup { |R_n(f - g)| : rho_P(f, g)^2 <= delta }`,
/// averaging one sign vector per fresh sample.
pub fn omega_bar_curve<P: Send + Sync>(
    oracle: &dyn OracleDistribution<P>,
    class: &FunctionClass<P>,
    moments: &ClassMoments,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<ComplexityCurve<f64>> {
    if class.len() < 2 {
        return Ok(ComplexityCurve::constant(0.0).unbounded());
    }
    let runs = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let sample = oracle.draw(n, seed, &[r as u64, 0]);
            let matrix = class.evaluate(&sample)?;
            let signs = SignSet { draws: vec![RademacherDraw::sample(n, seed, &[r as u64, 1])], exhaustive: false };
            Ok(modulus_steps(&matrix, &signs, ModulusMetric::True(moments, MetricKind::L2)))
        })
        .collect::<Result<Vec<_>>>()?;
    average_curves(runs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_member_on_two_points() {
        let m = EvaluationMatrix::from_columns(&[vec![1.0, 1.0]]).unwrap();
        let e = rademacher_sup(&m, &SignSet::exhaustive(2).unwrap()).unwrap();
        assert_eq!(e, Estimate::exact(0.5));
    }

    #[test]
    fn zero_class_has_zero_complexity() {
        let m = EvaluationMatrix::from_columns(&[vec![0.0; 3], vec![0.0; 3]]).unwrap();
        assert_eq!(rademacher_sup(&m, &SignSet::exhaustive(3).unwrap()).unwrap().mean, 0.0);
    }

    #[test]
    fn monte_carlo_reports_error() {
        let m = EvaluationMatrix::from_columns(&[vec![1.0; 40]]).unwrap();
        let signs = SignSet::auto(40, 7);
        assert!(!signs.exhaustive);
        assert_eq!(signs.draws.len(), DEFAULT_SIGN_DRAWS);
        assert!(rademacher_sup(&m, &signs).unwrap().stderr > 0.0);
    }

    #[test]
    fn modulus_matches_difference_sup() {
        let m = EvaluationMatrix::from_columns(&[vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let signs = SignSet::exhaustive(2).unwrap();
        assert_eq!(rademacher_modulus(&m, &signs, 0.5, ModulusMetric::Empirical).unwrap().mean, 0.0);
        assert_eq!(rademacher_modulus(&m, &signs, 1.0, ModulusMetric::Empirical).unwrap().mean, 0.5);
        let curve = modulus_curve(&m, &signs, ModulusMetric::Empirical).unwrap();
        assert_eq!(curve.eval(0.99), 0.0);
        assert_eq!(curve.eval(1.0), 0.5);
    }
}
