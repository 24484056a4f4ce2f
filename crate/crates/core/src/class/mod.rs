//! Finite function classes, samples, empirical risk minimization and
//! localized suprema over delta-minimal sets.

mod moduli;
mod oracle;

use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, ArrayView1, ShapeBuilder};

use crate::error::{Error, Result};

pub use moduli::{
    diameter, diameter_profile, empirical_profiles, phi_hat, phi_n, phi_n_profile, r_check, EmpiricalProfiles,
    MinimalSetProfile, PhiProfile,
};
pub use oracle::{monte_carlo_moments, ClassMoments, FiniteSupport, MetricKind, MonteCarloMoments, OracleDistribution};

type Eval<P> = Arc<dyn Fn(&P) -> f64 + Send + Sync>;

/// A labelled member `f: S -> [0, 1]`.
///
/// `params` optionally records the parameters the member was built from, so
/// that analytic oracles can compute exact moments.
pub struct Member<P> {
    label: String,
    params: Option<Vec<f64>>,
    f: Eval<P>,
}

impl<P> Member<P> {
    pub fn new(label: impl Into<String>, f: impl Fn(&P) -> f64 + Send + Sync + 'static) -> Self {
        Self { label: label.into(), params: None, f: Arc::new(f) }
    }

    pub fn with_params(mut self, params: Vec<f64>) -> Self {
        self.params = Some(params);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn params(&self) -> Option<&[f64]> {
        self.params.as_deref()
    }

    pub fn eval(&self, p: &P) -> f64 {
        (self.f)(p)
    }
}

/// Ordered finite collection of members with distinct labels.
pub struct FunctionClass<P> {
    members: Vec<Arc<Member<P>>>,
}

impl<P> Clone for FunctionClass<P> {
    fn clone(&self) -> Self {
        Self { members: self.members.clone() }
    }
}

impl<P> fmt::Debug for FunctionClass<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.members.iter().map(|m| &m.label)).finish()
    }
}

impl<P> FunctionClass<P> {
    pub fn new(members: Vec<Member<P>>) -> Result<Self> {
        Self::from_shared(members.into_iter().map(Arc::new).collect())
    }

    fn from_shared(members: Vec<Arc<Member<P>>>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::BadParams("function class is empty".into()));
        }
        let mut labels: Vec<&str> = members.iter().map(|m| m.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadParams("member labels must be distinct".into()));
        }
        Ok(Self { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, i: usize) -> &Member<P> {
        &self.members[i]
    }

    pub(crate) fn shared(&self, i: usize) -> Arc<Member<P>> {
        self.members[i].clone()
    }

    pub fn members(&self) -> impl Iterator<Item = &Member<P>> {
        self.members.iter().map(|m| m.as_ref())
    }

    pub fn labels(&self) -> Vec<&str> {
        self.members.iter().map(|m| m.label.as_str()).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.members.iter().position(|m| m.label == label)
    }

    /// Subclass with the given member indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::from_shared(indices.iter().map(|&i| self.members[i].clone()).collect())
    }

    /// Members of all parts, in order.
    pub fn concat(parts: &[Self]) -> Result<Self> {
        Self::from_shared(parts.iter().flat_map(|c| c.members.iter().cloned()).collect())
    }

    /// Every member evaluated at every sample point.
    pub fn evaluate(&self, sample: &Sample<P>) -> Result<EvaluationMatrix> {
        let (n, m) = (sample.len(), self.len());
        let mut data = Vec::with_capacity(n * m);
        for member in &self.members {
            for p in &sample.points {
                let v = member.eval(p);
                check_unit(v, &member.label)?;
                data.push(v);
            }
        }
        let values = Array2::from_shape_vec((n, m).f(), data).expect("shape matches data");
        Ok(EvaluationMatrix { values })
    }

    /// Empirical risks `P_n f` without storing the evaluation matrix.
    pub fn empirical_risks(&self, sample: &Sample<P>) -> Result<Vec<f64>> {
        if sample.is_empty() {
            return Err(Error::BadParams("sample is empty".into()));
        }
        let n = sample.len() as f64;
        self.members
            .iter()
            .map(|member| {
                let mut acc = 0.0;
                for p in &sample.points {
                    let v = member.eval(p);
                    check_unit(v, &member.label)?;
                    acc += v;
                }
                Ok(acc / n)
            })
            .collect()
    }
}

fn check_unit(v: f64, label: &str) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::RangeViolation(format!("member {label} takes value {v}")))
    }
}

/// An i.i.d. sample together with the random stream that produced it.
#[derive(Debug, Clone)]
pub struct Sample<P> {
    pub points: Vec<P>,
    pub stream: u64,
}

impl<P> Sample<P> {
    pub fn new(points: Vec<P>, stream: u64) -> Self {
        Self { points, stream }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `n x m` matrix of member values at sample points, stored column-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationMatrix {
    values: Array2<f64>,
}

impl EvaluationMatrix {
    /// Builds a matrix from member columns; every value must lie in `[0, 1]`.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let m = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if m == 0 || n == 0 || columns.iter().any(|c| c.len() != n) {
            return Err(Error::BadParams("columns must be nonempty and of equal length".into()));
        }
        let data: Vec<f64> = columns.concat();
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::RangeViolation(format!("value {v}")));
        }
        Ok(Self { values: Array2::from_shape_vec((n, m).f(), data).expect("shape matches data") })
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn m(&self) -> usize {
        self.values.ncols()
    }

    pub fn column(&self, j: usize) -> ArrayView1<'_, f64> {
        self.values.column(j)
    }

    pub fn values(&self) -> &Array2<f64> {
        &self.values
    }

    /// Empirical risks `P_n f_j`.
    pub fn means(&self) -> Vec<f64> {
        let n = self.n() as f64;
        (0..self.m()).map(|j| self.column(j).sum() / n).collect()
    }

    /// `P_n (f_i f_j)` for all pairs.
    pub fn gram(&self) -> Array2<f64> {
        self.values.t().dot(&self.values) / self.n() as f64
    }

    /// `P_n (f_i - f_j)^2`.
    pub fn dist2(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.column(i), self.column(j));
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / self.n() as f64
    }

    /// True when every value is 0 or 1.
    pub fn is_binary(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0 || *v == 1.0)
    }
}

/// Index of the smallest risk, lowest index on ties.
pub fn argmin(risks: &[f64]) -> Result<usize> {
    if risks.is_empty() || risks.iter().any(|r| r.is_nan()) {
        return Err(Error::BadParams("risks must be nonempty and not NaN".into()));
    }
    Ok(risks
        .iter()
        .enumerate()
        .fold(0, |best, (i, r)| if *r < risks[best] { i } else { best }))
}

/// Empirical risk minimizer of an evaluation matrix.
pub fn erm(matrix: &EvaluationMatrix) -> usize {
    argmin(&matrix.means()).expect("finite matrix")
}

/// Indices whose risk is within `delta + slack` of the minimum.
pub fn delta_minimal(risks: &[f64], delta: f64, slack: f64) -> Result<Vec<usize>> {
    if delta < 0.0 {
        return Err(Error::BadParams(format!("delta = {delta} must be nonnegative")));
    }
    let best = risks[argmin(risks)?];
    Ok((0..risks.len()).filter(|&i| risks[i] - best <= delta + slack).collect())
}

/// Empirical and true risks of a class and the excess risk of its ERM.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct RiskReport {
    pub empirical: Vec<f64>,
    pub truth: Vec<f64>,
    pub erm: usize,
    pub excess: f64,
}

impl RiskReport {
    pub fn new(empirical: Vec<f64>, truth: Vec<f64>) -> Result<Self> {
        if empirical.len() != truth.len() {
            return Err(Error::BadParams("risk vectors differ in length".into()));
        }
        let erm = argmin(&empirical)?;
        let best = truth[argmin(&truth)?];
        let excess = truth[erm] - best;
        Ok(Self { empirical, truth, erm, excess })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn indicator_class() -> FunctionClass<f64> {
        FunctionClass::new(vec![
            Member::new("half", |x: &f64| if *x >= 0.5 { 1.0 } else { 0.0 }),
            Member::new("zero", |_: &f64| 0.0),
        ])
        .unwrap()
    }

    #[test]
    fn erm_breaks_ties_low() {
        assert_eq!(argmin(&[0.4, 0.2, 0.2]).unwrap(), 1);
        assert_eq!(argmin(&[0.3]).unwrap(), 0);
    }

    #[test]
    fn range_violation_detected() {
        let class = FunctionClass::new(vec![Member::new("big", |_: &f64| 1.5)]).unwrap();
        let sample = Sample::new(vec![0.1], 0);
        assert!(matches!(class.evaluate(&sample), Err(Error::RangeViolation(_))));
        assert!(matches!(class.empirical_risks(&sample), Err(Error::RangeViolation(_))));
    }

    #[test]
    fn duplicate_labels_rejected() {
        let r = FunctionClass::new(vec![Member::new("a", |_: &f64| 0.0), Member::new("a", |_: &f64| 1.0)]);
        assert!(r.is_err());
    }

    #[test]
    fn matrix_statistics() {
        let class = indicator_class();
        let sample = Sample::new(vec![0.1, 0.6, 0.7, 0.2], 0);
        let m = class.evaluate(&sample).unwrap();
        assert_eq!(m.means(), vec![0.5, 0.0]);
        assert!((m.dist2(0, 1) - 0.5).abs() < 1e-15);
        assert!((m.gram()[[0, 0]] - 0.5).abs() < 1e-15);
        assert!(m.is_binary());
        assert_eq!(erm(&m), 1);
        assert_eq!(class.empirical_risks(&sample).unwrap(), vec![0.5, 0.0]);
    }

    #[test]
    fn minimal_sets_nest() {
        let r = [0.3, 0.1, 0.2, 0.5];
        assert_eq!(delta_minimal(&r, 0.0, 0.0).unwrap(), vec![1]);
        assert_eq!(delta_minimal(&r, 0.15, 0.0).unwrap(), vec![1, 2]);
        assert_eq!(delta_minimal(&r, 1.0, 0.0).unwrap().len(), 4);
    }
}
