use serde::{Deserialize, Serialize};

use super::family::ModelFamily;
use crate::error::{Error, Result};

/// Selection procedure tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Erm,
    V1,
    V2,
    Dimension,
    Shattering,
    Kernel,
    Rademacher,
    Massart,
    Comparison,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Erm => "erm",
            Method::V1 => "v1",
            Method::V2 => "v2",
            Method::Dimension => "dimension",
            Method::Shattering => "shattering",
            Method::Kernel => "kernel",
            Method::Rademacher => "rademacher",
            Method::Massart => "massart",
            Method::Comparison => "comparison",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = [
            Method::Erm,
            Method::V1,
            Method::V2,
            Method::Dimension,
            Method::Shattering,
            Method::Kernel,
            Method::Rademacher,
            Method::Massart,
            Method::Comparison,
        ];
        all.into_iter().find(|m| m.name() == s).ok_or_else(|| Error::BadParams(format!("unknown method {s:?}")))
    }
}

/// Per-model entry of a selection report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub min_risk: f64,
    pub penalty: f64,
    pub delta_hat: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reference_penalty: Option<f64>,
}

/// Oracle-side and threshold information attached to a selection.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub k_star: Option<usize>,
    pub k_bar: Option<usize>,
    pub k_tilde: Option<usize>,
    /// `c_hat * max_{j <= l} delta_hat_j` for each `l` (comparison method).
    pub thresholds: Option<Vec<f64>>,
    /// `k_tilde <= k_hat <= k_bar <= k_star` when all indices are known.
    pub ordered: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub method: Method,
    pub k_hat: usize,
    pub per_model: Vec<ModelSummary>,
    /// Data-driven upper bound on the risk of the selected minimizer.
    pub certificate: f64,
    pub diagnostics: Diagnostics,
}

fn check_lengths(lens: &[usize]) -> Result<usize> {
    let k = lens[0];
    if k == 0 || lens.iter().any(|l| *l != k) {
        return Err(Error::BadParams(format!("per-model vectors must be nonempty and equal length, got {lens:?}")));
    }
    Ok(k)
}

/// `k_hat = argmin_k (m_k + pi_hat_k)`, lowest index on ties; the certificate
/// is the attained minimum.
pub fn select_penalized(
    method: Method,
    mins: &[f64],
    penalties: &[f64],
    delta_hat: Option<&[f64]>,
) -> Result<SelectionResult> {
    check_lengths(&[mins.len(), penalties.len(), delta_hat.map_or(mins.len(), <[f64]>::len)])?;
    let totals: Vec<f64> = mins.iter().zip(penalties).map(|(m, p)| m + p).collect();
    let k_hat = crate::class::argmin(&totals)?;
    let per_model = (0..mins.len())
        .map(|k| ModelSummary {
            min_risk: mins[k],
            penalty: penalties[k],
            delta_hat: delta_hat.map(|d| d[k]),
            reference_penalty: None,
        })
        .collect();
    Ok(SelectionResult { method, k_hat, per_model, certificate: totals[k_hat], diagnostics: Diagnostics::default() })
}

/// Running maxima `max_{j <= l} delta_j`.
pub fn cumulative_max(deltas: &[f64]) -> Vec<f64> {
    deltas
        .iter()
        .scan(f64::NEG_INFINITY, |m, d| {
            *m = m.max(*d);
            Some(*m)
        })
        .collect()
}

/// Smallest `k` with `m_k - m_l <= c * delta(l)` for every `l > k`, where
/// `delta` is already cumulative. The last index always qualifies.
pub fn comparison_index(mins: &[f64], cum_delta: &[f64], c: f64) -> Result<usize> {
    let k = check_lengths(&[mins.len(), cum_delta.len()])?;
    Ok((0..k).find(|&i| (i + 1..k).all(|l| mins[i] - mins[l] <= c * cum_delta[l])).unwrap_or(0))
}

/// Smallest `k` whose minimum equals every later minimum up to `tol`.
pub fn k_star(true_mins: &[f64], tol: f64) -> Result<usize> {
    let k = check_lengths(&[true_mins.len()])?;
    Ok((0..k).find(|&i| (i + 1..k).all(|l| (true_mins[i] - true_mins[l]).abs() <= tol)).unwrap_or(0))
}

/// Constants `c_bar <= c_hat <= c_tilde` of the comparison method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonConstants {
    pub c_bar: f64,
    pub c_hat: f64,
    pub c_tilde: f64,
}

impl Default for ComparisonConstants {
    fn default() -> Self {
        Self { c_bar: 0.5, c_hat: 3.0, c_tilde: 8.0 }
    }
}

/// Distribution-side inputs enabling the comparison diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonOracle<'a> {
    pub true_mins: &'a [f64],
    pub delta_bar: &'a [f64],
    pub delta_tilde: &'a [f64],
    /// Accuracy of the true minima.
    pub tol: f64,
}

/// Comparison method on a nested family. The certificate is
/// `m_k_hat + c_hat max_{j <= k_hat} delta_hat_j`.
pub fn select_comparison<P>(
    family: &ModelFamily<P>,
    mins: &[f64],
    delta_hat: &[f64],
    consts: ComparisonConstants,
    oracle: Option<ComparisonOracle<'_>>,
) -> Result<SelectionResult> {
    if !family.is_nested() {
        return Err(Error::NotNested);
    }
    check_lengths(&[family.len(), mins.len(), delta_hat.len()])?;
    if !(0.0 < consts.c_bar && consts.c_bar <= consts.c_hat && consts.c_hat <= consts.c_tilde) {
        return Err(Error::BadParams("need 0 < c_bar <= c_hat <= c_tilde".into()));
    }
    let cum_hat = cumulative_max(delta_hat);
    let k_hat = comparison_index(mins, &cum_hat, consts.c_hat)?;
    let thresholds: Vec<f64> = cum_hat.iter().map(|d| consts.c_hat * d).collect();
    let mut diagnostics = Diagnostics { thresholds: Some(thresholds.clone()), ..Default::default() };
    if let Some(o) = oracle {
        check_lengths(&[mins.len(), o.true_mins.len(), o.delta_bar.len(), o.delta_tilde.len()])?;
        let ks = k_star(o.true_mins, o.tol)?;
        let kb = comparison_index(o.true_mins, &cumulative_max(o.delta_bar), consts.c_bar)?;
        let kt = comparison_index(o.true_mins, &cumulative_max(o.delta_tilde), consts.c_tilde)?;
        diagnostics.k_star = Some(ks);
        diagnostics.k_bar = Some(kb);
        diagnostics.k_tilde = Some(kt);
        diagnostics.ordered = Some(kt <= k_hat && k_hat <= kb && kb <= ks);
    }
    let per_model = (0..mins.len())
        .map(|k| ModelSummary { min_risk: mins[k], penalty: thresholds[k], delta_hat: Some(delta_hat[k]), reference_penalty: None })
        .collect();
    Ok(SelectionResult {
        method: Method::Comparison,
        k_hat,
        per_model,
        certificate: mins[k_hat] + thresholds[k_hat],
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::class::{FunctionClass, Member};

    fn nested(k: usize) -> ModelFamily<f64> {
        let classes = (1..=k)
            .map(|m| FunctionClass::new((0..m).map(|i| Member::new(format!("c{i}"), move |_: &f64| i as f64 / 10.0)).collect()).unwrap())
            .collect();
        ModelFamily::uniform(classes, 1.0).unwrap()
    }

    #[test]
    fn penalized_examples() {
        let r = select_penalized(Method::V1, &[0.30, 0.20, 0.19], &[0.01, 0.05, 0.20], None).unwrap();
        assert_eq!(r.k_hat, 1);
        assert!((r.certificate - 0.25).abs() < 1e-15);
        let r = select_penalized(Method::V1, &[0.3, 0.1, 0.1], &[0.2; 3], None).unwrap();
        assert_eq!(r.k_hat, 1);
        assert_eq!(select_penalized(Method::V1, &[0.4], &[0.0], None).unwrap().k_hat, 0);
    }

    #[test]
    fn comparison_examples() {
        let c = ComparisonConstants::default();
        let r = select_comparison(&nested(3), &[0.2; 3], &[0.01; 3], c, None).unwrap();
        assert_eq!(r.k_hat, 0);
        let c1 = ComparisonConstants { c_bar: 0.5, c_hat: 1.0, c_tilde: 8.0 };
        let r = select_comparison(&nested(2), &[0.7, 0.2], &[0.05, 0.1], c1, None).unwrap();
        assert_eq!(r.k_hat, 1);
        assert_eq!(select_comparison(&nested(1), &[0.3], &[0.1], c, None).unwrap().k_hat, 0);
    }

    #[test]
    fn comparison_needs_nesting() {
        let a = FunctionClass::new(vec![Member::new("a", |_: &f64| 0.0)]).unwrap();
        let b = FunctionClass::new(vec![Member::new("b", |_: &f64| 0.0)]).unwrap();
        let fam = ModelFamily::uniform(vec![a, b], 1.0).unwrap();
        let r = select_comparison(&fam, &[0.1, 0.1], &[0.1, 0.1], ComparisonConstants::default(), None);
        assert_eq!(r.unwrap_err(), Error::NotNested);
    }

    #[test]
    fn diagnostics_order() {
        let truth = [0.5, 0.2, 0.2, 0.2];
        let oracle = ComparisonOracle { true_mins: &truth, delta_bar: &[0.01; 4], delta_tilde: &[0.05; 4], tol: 1e-12 };
        let r = select_comparison(&nested(4), &[0.52, 0.21, 0.2, 0.19], &[0.02; 4], ComparisonConstants::default(), Some(oracle))
            .unwrap();
        assert_eq!(r.k_hat, 1);
        assert_eq!(r.diagnostics.k_star, Some(1));
        assert_eq!(r.diagnostics.ordered, Some(true));
    }

    #[test]
    fn json_keys() {
        let r = select_penalized(Method::V1, &[0.3, 0.2], &[0.01, 0.05], Some(&[0.1, 0.2])).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["method", "k_hat", "per_model", "certificate", "diagnostics"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["method"], "v1");
        assert!(v["per_model"][0].get("delta_hat").is_some());
    }
}
