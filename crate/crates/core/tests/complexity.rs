use riskbound::class::{EvaluationMatrix, FunctionClass, OracleDistribution};
use riskbound::complexity::{
    mendelson_curves, omega_bar_curve, rademacher_modulus, shattering_number, theta_n_curve, KernelSpec,
    ModulusMetric, SignSet,
};
use riskbound::rng;
use riskbound::scenarios::{
    cosine_features, finite_dim_regression, linear_value, sobolev_eigenvalues, threshold_grid, threshold_member,
    NetSpec, TsybakovOracle,
};
use riskbound::transform::sharp;
use rand::Rng;

const DIM: usize = 4;

/// Finite net of the RKHS ball: `1/2 + (1/4) sum_j a_j sqrt(lambda_j) phi_j`
/// with `a_j` in `{-1, -1/2, 0, 1/2, 1}`.
fn ball_net(lambda: &[f64]) -> Vec<Vec<f64>> {
    let levels = [-1.0, -0.5, 0.0, 0.5, 1.0];
    (0..levels.len().pow(DIM as u32))
        .map(|mut idx| {
            let mut c: Vec<f64> = (0..DIM)
                .map(|j| {
                    let a = levels[idx % levels.len()];
                    idx /= levels.len();
                    0.25 * a * lambda[j].sqrt()
                })
                .collect();
            c[0] += 0.5;
            c
        })
        .collect()
}

/// `omega_hat(delta) / gamma_hat(delta)` at `delta = 2^{-k}`, `k = 1..=8`.
fn modulus_ratios(seed: u64) -> Vec<f64> {
    let n = 200;
    let lambda = sobolev_eigenvalues(DIM);
    let mut g = rng::stream(seed, &[0]);
    let xs: Vec<Vec<f64>> = (0..n).map(|_| cosine_features(g.random::<f64>(), DIM)).collect();
    let cols: Vec<Vec<f64>> = ball_net(&lambda).iter().map(|c| xs.iter().map(|x| linear_value(c, x)).collect()).collect();
    let matrix = EvaluationMatrix::from_columns(&cols).unwrap();
    let signs = SignSet::monte_carlo(n, 200, seed);
    let l = lambda.clone();
    let kernel = KernelSpec::new(move |a: &Vec<f64>, b: &Vec<f64>| (0..DIM).map(|j| l[j] * a[j] * b[j]).sum());
    let gamma = mendelson_curves(&kernel, &xs).unwrap().empirical;
    (1..=8)
        .map(|k| {
            let delta = 0.5_f64.powi(k);
            let omega = rademacher_modulus(&matrix, &signs, delta, ModulusMetric::Empirical).unwrap().mean;
            omega / gamma.eval(delta)
        })
        .collect()
}

#[test]
fn mendelson_bracket_is_stable() {
    let bracket = |r: &[f64]| r.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), v| (a.min(*v), b.max(*v)));
    let (c1, c2) = bracket(&modulus_ratios(0));
    println!("bracket [{c1:.4}, {c2:.4}]");
    assert!(c1 > 0.0 && c2 / c1 < 20.0, "bracket [{c1}, {c2}]");
    for seed in 1..4 {
        let (lo, hi) = bracket(&modulus_ratios(seed));
        assert!((lo / c1 - 1.0).abs() <= 0.2 && (hi / c2 - 1.0).abs() <= 0.2, "seed {seed}: [{lo}, {hi}] vs [{c1}, {c2}]");
    }
}

#[test]
fn modulus_is_monotone_and_saturates() {
    let mut g = rng::stream(9, &[]);
    let cols: Vec<Vec<f64>> = (0..6).map(|_| (0..12).map(|_| g.random::<f64>()).collect()).collect();
    let m = EvaluationMatrix::from_columns(&cols).unwrap();
    let signs = SignSet::exhaustive(12).unwrap();
    let at = |d: f64| rademacher_modulus(&m, &signs, d, ModulusMetric::Empirical).unwrap().mean;
    let values: Vec<f64> = (0..=20).map(|k| 0.02 * k as f64).collect::<Vec<_>>().iter().map(|d| at(*d)).collect();
    assert!(values.windows(2).all(|w| w[0] <= w[1]));
    let full = at(1.0);
    let diffs: Vec<Vec<f64>> = (0..6)
        .flat_map(|i| (0..6).map(move |j| (i, j)))
        .map(|(i, j)| (0..12).map(|r| cols[i][r] - cols[j][r]).collect())
        .collect();
    let direct = signs
        .draws
        .iter()
        .map(|d| diffs.iter().map(|c| c.iter().zip(&d.signs).map(|(v, s)| v * s).sum::<f64>().abs() / 12.0).fold(0.0, f64::max))
        .sum::<f64>()
        / signs.draws.len() as f64;
    assert!((full - direct).abs() < 1e-12);
}

#[test]
fn theta_sharp_is_below_omega_bar_sharp() {
    let s = finite_dim_regression(2, NetSpec::adaptive(256)).unwrap();
    let moments = s.oracle.moments(s.class()).unwrap();
    let theta = theta_n_curve(s.oracle.as_ref(), s.class(), &moments, 256, 200, 5).unwrap();
    let omega = omega_bar_curve(s.oracle.as_ref(), s.class(), &moments, 256, 200, 6).unwrap();
    for eps in [0.05, 0.1, 0.2, 0.5, 1.0] {
        let t = sharp(&theta, eps).unwrap();
        let w = sharp(&omega, eps / 2.0).unwrap();
        assert!(t <= w * 1.05 + 1e-6, "eps {eps}: {t} > {w}");
    }
}

#[test]
fn log_shattering_concentrates() {
    let oracle = TsybakovOracle::new(1.0, 0.8).unwrap();
    let class: FunctionClass<_> = FunctionClass::new(threshold_grid(64).into_iter().map(threshold_member).collect()).unwrap();
    let trials = 500;
    let logs: Vec<f64> = (0..trials)
        .map(|r| {
            let sample = oracle.draw(100, 31, &[r]);
            (shattering_number(&class.evaluate(&sample).unwrap()).unwrap() as f64).ln()
        })
        .collect();
    let mean = logs.iter().sum::<f64>() / trials as f64;
    for t in [1.0, 2.0, 3.0] {
        let p = f64::exp(-t);
        let freq = logs.iter().filter(|l| **l > 2.0 * mean + 2.0 * t).count() as f64 / trials as f64;
        assert!(freq <= p + 3.0 * (p * (1.0 - p) / trials as f64).sqrt(), "t = {t}: {freq}");
    }
}
