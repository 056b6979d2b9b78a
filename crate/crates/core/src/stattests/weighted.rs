use statrs::function::erf::erfc;

use super::{SamplePool, TestReport};
use crate::error::{Error, Result};

/// `P(|N(0,1)| > |z|)`.
pub fn normal_two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

fn mean_and_se(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = values.clone().sum::<f64>() / nf;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nf - 1.0);
    (mean, (var / nf).sqrt())
}

/// Compares `E[lhs]` with `E[w * rhs]`; rows excluded by the event carry weight 0.
///
/// Passes iff `|mean_lhs - mean(w * rhs)| <= k_sigma * sqrt(se_lhs^2 + se_rhs^2)`.
pub fn weighted_mean_compare(
    lhs: &SamplePool,
    rhs: &SamplePool,
    k_sigma: f64,
) -> Result<TestReport> {
    if lhs.dim() != 1 || rhs.dim() != 1 {
        return Err(Error::Unsupported("weighted comparison needs univariate pools".into()));
    }
    if lhs.is_empty() || rhs.is_empty() {
        return Err(Error::Insufficient("weighted comparison needs nonempty pools".into()));
    }
    if lhs.weights().is_some_and(|w| w.iter().any(|&v| v != 1.0)) {
        return Err(Error::Unsupported("left pool must be unweighted".into()));
    }
    if !(k_sigma >= 0.0) {
        return Err(Error::config(format!("k_sigma must be nonnegative, got {k_sigma}")));
    }
    let unit = vec![1.0; rhs.len()];
    let w = rhs.weights().unwrap_or(&unit);
    if w.iter().all(|&v| v == 0.0) {
        return Err(Error::domain("all right-hand weights are zero"));
    }
    let (m_l, se_l) = mean_and_se(lhs.values().iter().copied(), lhs.len());
    let weighted = rhs.values().iter().zip(w).map(|(v, w)| v * w);
    let (m_r, se_r) = mean_and_se(weighted, rhs.len());
    let diff = m_l - m_r;
    let se = (se_l * se_l + se_r * se_r).sqrt();
    let z = if se > 0.0 { diff / se } else if diff == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(TestReport {
        test_name: "weighted_mean".into(),
        statistic: diff,
        p_value: None,
        n_lhs: lhs.len(),
        n_rhs: rhs.len(),
        pass: diff.abs() <= k_sigma * se,
        threshold: k_sigma,
        details: Default::default(),
    }
    .detail("mean_lhs", m_l)
    .detail("mean_rhs", m_r)
    .detail("se_lhs", se_l)
    .detail("se_rhs", se_r)
    .detail("z", if z.is_finite() { z } else { f64::MAX })
    .detail("z_p_value", normal_two_sided_p(z))
    .detail("weight_sum", w.iter().sum::<f64>()))
}

/// Family-wise aggregation: passes iff `min p >= family_alpha / count`.
pub fn bonferroni(reports: &[TestReport], family_alpha: f64) -> Result<TestReport> {
    if reports.is_empty() {
        return Err(Error::Insufficient("Bonferroni needs at least one report".into()));
    }
    let mut min_p = f64::INFINITY;
    let mut argmin = String::new();
    for r in reports {
        let p = r.p_value.ok_or_else(|| {
            Error::Unsupported(format!("{} is not a p-value test", r.test_name))
        })?;
        if p < min_p {
            min_p = p;
            argmin = r.test_name.clone();
        }
    }
    let m = reports.len();
    let threshold = family_alpha / m as f64;
    Ok(TestReport::p_value_test(
        "bonferroni",
        min_p,
        min_p,
        reports.iter().map(|r| r.n_lhs).max().unwrap_or(0),
        reports.iter().map(|r| r.n_rhs).max().unwrap_or(0),
        threshold,
    )
    .detail("family_alpha", family_alpha)
    .detail("count", m)
    .detail("adjusted_min_p", (min_p * m as f64).min(1.0))
    .detail("argmin", argmin))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(v: Vec<f64>) -> SamplePool {
        SamplePool::univariate(v).unwrap()
    }

    fn with_p(p: f64) -> TestReport {
        TestReport::p_value_test("t", 0.0, p, 100, 100, 0.001)
    }

    #[test]
    fn identical_unit_weight_pools_pass() {
        let v: Vec<f64> = (0..50).map(|i| (i as f64).cos()).collect();
        let r = weighted_mean_compare(&pool(v.clone()), &pool(v.clone()).with_weights(vec![1.0; 50]).unwrap(), 3.0)
            .unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.pass);
        let r0 = weighted_mean_compare(&pool(v.clone()), &pool(v.clone()), 0.0).unwrap();
        assert!(r0.pass);
    }

    #[test]
    fn zero_sigma_fails_unless_equal() {
        let r = weighted_mean_compare(&pool(vec![1.0, 2.0]), &pool(vec![1.0, 2.5]), 0.0).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn all_zero_weights_rejected() {
        let rhs = SamplePool::univariate(vec![1.0, 2.0]).unwrap();
        assert!(rhs.clone().with_weights(vec![0.0, 0.0]).is_err());
        let lhs = pool(vec![1.0]).with_weights(vec![2.0]).unwrap();
        assert!(weighted_mean_compare(&lhs, &rhs, 3.0).is_err());
    }

    #[test]
    fn bonferroni_examples() {
        assert!(bonferroni(&[with_p(0.5)], 0.05).unwrap().pass);
        let five = |min_p| {
            let mut v: Vec<TestReport> = (0..4).map(|_| with_p(0.6)).collect();
            v.push(with_p(min_p));
            v
        };
        assert!(!bonferroni(&five(0.009), 0.05).unwrap().pass);
        assert!(bonferroni(&five(0.02), 0.05).unwrap().pass);
        assert!(bonferroni(&[], 0.05).is_err());
        let ci = weighted_mean_compare(&pool(vec![1.0, 2.0]), &pool(vec![1.0, 2.0]), 3.0).unwrap();
        assert!(bonferroni(&[ci], 0.05).is_err());
    }

    #[test]
    fn normal_p_values() {
        assert!((normal_two_sided_p(1.959_963_985) - 0.05).abs() < 1e-9);
        assert_eq!(normal_two_sided_p(0.0), 1.0);
        assert!(normal_two_sided_p(6.0) < 1e-8);
    }
}
