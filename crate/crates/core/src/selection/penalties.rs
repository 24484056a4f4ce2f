use serde::{Deserialize, Serialize};

use super::link::ConvexLink;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::transform::{sharp, ComplexityCurve};

fn same_len(lens: &[usize]) -> Result<usize> {
    let k = lens[0];
    if k == 0 || lens.iter().any(|l| *l != k) {
        return Err(Error::BadParams(format!("per-model inputs must be nonempty and equal length, got {lens:?}")));
    }
    Ok(k)
}

fn ratio<T: Real>(t: T, n: usize) -> Result<T> {
    if n == 0 || t < T::zero() {
        return Err(Error::BadParams(format!("need n > 0 and t >= 0, got n = {n}, t = {t}")));
    }
    Ok(t / T::count(n))
}

/// Version-1 penalties `K [delta_k + sqrt((t_k/n) m_k) + t_k/n]`.
///
/// With empirical minima and `delta_hat` this is `pi_hat`; with true minima,
/// `delta_tilde` and `K_tilde` it is the reference penalty `pi_tilde`.
pub fn penalty_v1<T: Real>(k: T, deltas: &[T], mins: &[T], t: &[T], n: usize) -> Result<Vec<T>> {
    same_len(&[deltas.len(), mins.len(), t.len()])?;
    deltas
        .iter()
        .zip(mins)
        .zip(t)
        .map(|((d, m), tk)| {
            let r = ratio(*tk, n)?;
            Ok(k * (*d + (r * m.max(T::zero())).sqrt() + r))
        })
        .collect()
}

/// Version-2 penalties with their reference counterparts and constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltyV2<T> {
    pub hat: Vec<T>,
    pub tilde: Option<Vec<T>>,
    /// `A(eps) = 5/2 - phi(sqrt eps)` per model.
    pub a: Vec<T>,
    /// `C(eps) = (1 + phi(sqrt eps)) / (1 - phi(sqrt eps))` for the first link.
    pub c: T,
}

/// `pi_hat(k) = A(eps) delta_hat_k + phi*(sqrt(2 t_k / (eps n))) + t_k / n`.
///
/// `links` holds either one link shared by all models or one per model; in
/// the latter case the links must be pointwise nonincreasing in `k`. When
/// `delta_tilde` is given the reference penalties are
/// `[A delta_tilde + 2 phi*(.) + 2 t/n] / (1 + phi(sqrt eps))`.
pub fn penalty_v2<T: Real>(
    links: &[ConvexLink<T>],
    eps: T,
    delta_hat: &[T],
    delta_tilde: Option<&[T]>,
    t: &[T],
    n: usize,
) -> Result<PenaltyV2<T>> {
    let k = same_len(&[delta_hat.len(), t.len(), delta_tilde.map_or(delta_hat.len(), <[T]>::len)])?;
    if !(eps > T::zero()) {
        return Err(Error::BadParams(format!("eps = {eps} must be positive")));
    }
    if links.len() != 1 && links.len() != k {
        return Err(Error::BadParams("need one link or one link per model".into()));
    }
    if links.windows(2).any(|w| !w[0].dominates(&w[1])) {
        return Err(Error::BadParams("per-model links must be nonincreasing".into()));
    }
    let link = |j: usize| &links[j.min(links.len() - 1)];
    let root = eps.sqrt();
    let first = link(0).phi(root);
    if first >= T::one() {
        return Err(Error::LinkDegenerate { value: first.as_f64() });
    }
    let (two, half5) = (T::lit(2.0), T::lit(2.5));
    let mut hat = Vec::with_capacity(k);
    let mut tilde = delta_tilde.map(|_| Vec::with_capacity(k));
    let mut a = Vec::with_capacity(k);
    for j in 0..k {
        let r = ratio(t[j], n)?;
        let l = link(j);
        let phi_root = l.phi(root);
        let aj = half5 - phi_root;
        let conj = l.conjugate((two * r / eps).sqrt());
        hat.push(aj * delta_hat[j] + conj + r);
        if let (Some(out), Some(dt)) = (tilde.as_mut(), delta_tilde) {
            out.push((aj * dt[j] + two * conj + two * r) / (T::one() + phi_root));
        }
        a.push(aj);
    }
    Ok(PenaltyV2 { hat, tilde, a, c: (T::one() + first) / (T::one() - first) })
}

/// Shattering penalties
/// `K [sqrt(m_k (log Delta_k + t_k) / n) + (log Delta_k + t_k) / n]`.
///
/// `log_delta` holds natural logs of the shattering numbers; passing expected
/// logs and true minima yields the reference penalties.
pub fn shattering_penalty<T: Real>(k: T, log_delta: &[T], mins: &[T], t: &[T], n: usize) -> Result<Vec<T>> {
    same_len(&[log_delta.len(), mins.len(), t.len()])?;
    log_delta
        .iter()
        .zip(mins)
        .zip(t)
        .map(|((ld, m), tk)| {
            let r = ratio(*ld + *tk, n)?;
            Ok(k * ((m.max(T::zero()) * r).sqrt() + r))
        })
        .collect()
}

/// Constants of the variance-condition penalties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassartConstants<T> {
    /// Dilation `K` inside `theta_sharp(eps / (K D))`.
    pub k: T,
    /// Multiplier of the `D t / (eps n)` term.
    pub k_hat: T,
}

impl<T: Real> Default for MassartConstants<T> {
    fn default() -> Self {
        Self { k: T::lit(4.0), k_hat: T::lit(4.0) }
    }
}

/// Per-model localized bounds and penalties of the variance-condition path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassartPenalty<T> {
    /// `delta_k = D_k^{-1} theta_k_sharp(eps / (K D_k))`.
    pub delta: Vec<T>,
    /// `3 delta_k + K_hat D_k t_k / (eps n)`.
    pub penalty: Vec<T>,
}

pub fn massart_penalty<T: Real>(
    d: &[T],
    theta: &[ComplexityCurve<T>],
    eps: T,
    consts: MassartConstants<T>,
    t: &[T],
    n: usize,
) -> Result<MassartPenalty<T>> {
    same_len(&[d.len(), theta.len(), t.len()])?;
    if !(eps > T::zero()) || !(consts.k > T::zero()) || !(consts.k_hat > T::zero()) {
        return Err(Error::BadParams("eps, K and K_hat must be positive".into()));
    }
    if d.iter().any(|x| !(*x >= T::one())) {
        return Err(Error::BadParams("variance constants must be at least 1".into()));
    }
    if let Some(j) = d.windows(2).position(|w| w[1] < w[0]) {
        return Err(Error::BadOrdering(format!("D[{}] = {} exceeds D[{}] = {}", j, d[j], j + 1, d[j + 1])));
    }
    let mut delta = Vec::with_capacity(d.len());
    let mut penalty = Vec::with_capacity(d.len());
    for ((dj, curve), tj) in d.iter().zip(theta).zip(t) {
        let r = ratio(*tj, n)?;
        let dl = sharp(curve, eps / (consts.k * *dj))? / *dj;
        penalty.push(T::lit(3.0) * dl + consts.k_hat * *dj * r / eps);
        delta.push(dl);
    }
    Ok(MassartPenalty { delta, penalty })
}

/// `K (d_k + t_k + 1) / n`.
pub fn dimension_penalty<T: Real>(k: T, dims: &[usize], t: &[T], n: usize) -> Result<Vec<T>> {
    same_len(&[dims.len(), t.len()])?;
    dims.iter().zip(t).map(|(d, tk)| Ok(k * ratio(T::count(*d) + *tk + T::one(), n)?)).collect()
}

/// `K (gamma_hat_k_sharp(1) + (t_k + 1) / n)` from empirical Mendelson curves.
pub fn kernel_penalty<T: Real>(k: T, gamma_hat: &[ComplexityCurve<T>], t: &[T], n: usize) -> Result<Vec<T>> {
    same_len(&[gamma_hat.len(), t.len()])?;
    gamma_hat
        .iter()
        .zip(t)
        .map(|(g, tk)| Ok(k * (sharp(g, T::one())? + ratio(*tk + T::one(), n)?)))
        .collect()
}

/// `K (omega_hat_k_sharp(1/K) + (t_k + 1) / n)` from empirical moduli.
pub fn rademacher_penalty<T: Real>(k: T, omega_hat: &[ComplexityCurve<T>], t: &[T], n: usize) -> Result<Vec<T>> {
    same_len(&[omega_hat.len(), t.len()])?;
    if !(k > T::zero()) {
        return Err(Error::BadParams(format!("K = {k} must be positive")));
    }
    omega_hat
        .iter()
        .zip(t)
        .map(|(w, tk)| Ok(k * (sharp(w, T::one() / k)? + ratio(*tk + T::one(), n)?)))
        .collect()
}
