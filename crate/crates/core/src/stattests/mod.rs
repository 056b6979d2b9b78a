//! Two-sample distribution-equality machinery.

mod energy;
mod ks;
mod weighted;

use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

pub use energy::{energy_distance_test, energy_statistic, MIN_PERMUTATIONS};
pub use ks::{
    kolmogorov_survival, ks_one_sample, ks_statistic, ks_two_sample, ks_two_sample_min,
    KS_MIN_SAMPLES,
};
pub use weighted::{bonferroni, normal_two_sided_p, weighted_mean_compare};

use crate::error::{Error, Result};

/// An `n_samples x dim` matrix of observations, optionally weighted.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePool {
    dim: usize,
    data: Vec<f64>,
    weights: Option<Vec<f64>>,
}

impl SamplePool {
    /// Row-major data with `dim` columns.
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("sample pool needs at least one column"));
        }
        if data.len() % dim != 0 {
            return Err(Error::config(format!(
                "{} values do not fill rows of width {dim}",
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite observation at flat index {i}")));
        }
        Ok(SamplePool { dim, data, weights: None })
    }

    pub fn univariate(values: Vec<f64>) -> Result<Self> {
        SamplePool::new(1, values)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(1, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::config("ragged rows in sample pool"));
        }
        SamplePool::new(dim, rows.concat())
    }

    /// Attaches nonnegative weights, not all zero.
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.len() {
            return Err(Error::config(format!(
                "{} weights for {} observations",
                weights.len(),
                self.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::domain("weights must be finite and nonnegative"));
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::domain("all weights are zero"));
        }
        self.weights = Some(weights);
        Ok(self)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// Values of a univariate pool.
    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    /// The first `n` rows (or all, if fewer).
    pub fn head(&self, n: usize) -> SamplePool {
        let n = n.min(self.len());
        SamplePool {
            dim: self.dim,
            data: self.data[..n * self.dim].to_vec(),
            weights: self.weights.as_ref().map(|w| w[..n].to_vec()),
        }
    }

    /// Keeps the listed columns, in order.
    pub fn select(&self, cols: &[usize]) -> Result<SamplePool> {
        let mut data = Vec::with_capacity(self.len() * cols.len());
        for r in self.rows() {
            data.extend(cols.iter().map(|&c| r[c]));
        }
        let mut out = SamplePool::new(cols.len(), data)?;
        out.weights = self.weights.clone();
        Ok(out)
    }
}

/// Outcome of one statistical comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub test_name: String,
    pub statistic: f64,
    /// Absent for confidence-interval style tests.
    pub p_value: Option<f64>,
    pub n_lhs: usize,
    pub n_rhs: usize,
    pub pass: bool,
    /// Minimum p-value for p-value tests, `k_sigma` for interval tests.
    pub threshold: f64,
    pub details: BTreeMap<String, Value>,
}

impl TestReport {
    pub fn p_value_test(
        name: impl Into<String>,
        statistic: f64,
        p_value: f64,
        n_lhs: usize,
        n_rhs: usize,
        threshold: f64,
    ) -> Self {
        TestReport {
            test_name: name.into(),
            statistic,
            p_value: Some(p_value),
            n_lhs,
            n_rhs,
            pass: p_value >= threshold,
            threshold,
            details: BTreeMap::new(),
        }
    }

    /// Re-evaluates `pass` for a new minimum p-value; interval tests are unchanged.
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        if let Some(p) = self.p_value {
            self.threshold = threshold;
            self.pass = p >= threshold;
        }
        self
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.test_name = name.into();
        self
    }

    pub fn detail(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }

    pub fn is_p_value_test(&self) -> bool {
        self.p_value.is_some()
    }
}
