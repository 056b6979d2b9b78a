use super::{SamplePool, TestReport};
use crate::error::{Error, Result};

/// Smallest per-side size accepted by [`ks_two_sample`].
pub const KS_MIN_SAMPLES: usize = 50;

/// Default minimum p-value for a standalone KS comparison.
const KS_DEFAULT_THRESHOLD: f64 = 0.001;

fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    v
}

/// `sup |F_x - F_y|` over the pooled sample, ties handled exactly.
pub fn ks_statistic(xs: &[f64], ys: &[f64]) -> f64 {
    let xs = sorted(xs);
    let ys = sorted(ys);
    let (n, m) = (xs.len() as u128, ys.len() as u128);
    let (mut i, mut j) = (0usize, 0usize);
    // gap scaled by n*m, kept integral so D is one correctly rounded division
    let mut best: u128 = 0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        best = best.max((i as u128 * m).abs_diff(j as u128 * n));
    }
    if n == 0 || m == 0 {
        return 0.0;
    }
    best as f64 / (n * m) as f64
}

/// `P(K > lambda)` for the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // P(K <= l) = sqrt(2 pi)/l * sum_k exp(-(2k-1)^2 pi^2 / (8 l^2))
        let c = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let cdf: f64 = (1..=6)
            .map(|k| {
                let odd = (2 * k - 1) as f64;
                (odd * odd * c).exp()
            })
            .sum::<f64>()
            * (2.0 * std::f64::consts::PI).sqrt()
            / lambda;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        let mut sign = 1.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sum += sign * term;
            if term < 1e-300 {
                break;
            }
            sign = -sign;
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// Two-sample KS with the asymptotic p-value, both sides at least [`KS_MIN_SAMPLES`].
pub fn ks_two_sample(xs: &SamplePool, ys: &SamplePool) -> Result<TestReport> {
    ks_two_sample_min(xs, ys, KS_MIN_SAMPLES)
}

/// [`ks_two_sample`] with an explicit minimum sample size.
pub fn ks_two_sample_min(xs: &SamplePool, ys: &SamplePool, min_n: usize) -> Result<TestReport> {
    if xs.dim() != 1 || ys.dim() != 1 {
        return Err(Error::Unsupported("KS needs univariate pools".into()));
    }
    if xs.is_weighted() || ys.is_weighted() {
        return Err(Error::Unsupported("KS does not accept weighted pools".into()));
    }
    let (n, m) = (xs.len(), ys.len());
    if n < min_n.max(1) || m < min_n.max(1) {
        return Err(Error::Insufficient(format!(
            "KS needs at least {min_n} observations per side, got {n} and {m}"
        )));
    }
    let d = ks_statistic(xs.values(), ys.values());
    let n_eff = (n as f64 * m as f64) / (n + m) as f64;
    let p = kolmogorov_survival(n_eff.sqrt() * d);
    Ok(TestReport::p_value_test("ks", d, p, n, m, KS_DEFAULT_THRESHOLD))
}

/// One-sample KS of `xs` against a continuous CDF, asymptotic p-value.
pub fn ks_one_sample(xs: &[f64], cdf: impl Fn(f64) -> f64) -> Result<TestReport> {
    if xs.is_empty() {
        return Err(Error::Insufficient("KS needs at least one observation".into()));
    }
    let v = sorted(xs);
    let n = v.len() as f64;
    let d = v.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    });
    let p = kolmogorov_survival(n.sqrt() * d);
    Ok(TestReport::p_value_test("ks_one_sample", d, p, v.len(), 0, KS_DEFAULT_THRESHOLD))
}
