use rayon::prelude::*;

use super::ExperimentSpec;
use crate::error::{Error, Result};
use crate::functionals::{exp_quad_a, QuadRule};
use crate::pathcore::{sample_bm, AugmentedPath, RngStream, TimeGrid};
use crate::stattests::{
    bonferroni, energy_distance_test, ks_two_sample, weighted_mean_compare, SamplePool, TestReport,
};

pub(super) const ROLE_LHS: u64 = 0;
pub(super) const ROLE_RHS: u64 = 1;
const ROLE_PERMUTATION: u64 = 0xff;

/// Individual KS floor.
pub(super) const KS_THRESHOLD: f64 = 0.001;
pub(super) const ENERGY_THRESHOLD: f64 = 0.01;
pub(super) const K_SIGMA: f64 = 3.0;

pub(super) const RULE: QuadRule = QuadRule::Trapezoid;

/// `ordinal | role | index` packed into 8, 8 and 48 bits.
pub(super) fn stream_id(ordinal: u64, role: u64, index: u64) -> u64 {
    debug_assert!(role < 256 && index < 1 << 48);
    (ordinal << 56) | (role << 48) | index
}

pub(super) fn bm_aug(grid: &TimeGrid<f64>, drift: f64, rng: &mut RngStream) -> Result<AugmentedPath<f64>> {
    exp_quad_a(&sample_bm(grid, drift, rng), RULE)
}

/// Column summary attached to KS reports.
fn moments(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, var)
}

pub(super) struct Ctx<'a> {
    pub spec: &'a ExperimentSpec,
    pub grid: TimeGrid<f64>,
    ordinal: u64,
    energy_tests: u64,
    pub tests: Vec<TestReport>,
}

impl<'a> Ctx<'a> {
    pub fn new(spec: &'a ExperimentSpec) -> Result<Self> {
        Ok(Ctx {
            spec,
            grid: TimeGrid::new(spec.t_horizon, spec.n_steps)?,
            ordinal: spec.id.ordinal(),
            energy_tests: 0,
            tests: Vec::new(),
        })
    }

    /// Grid nodes of the configured marginal fractions, optionally keeping only `frac >= lo`
    /// and `frac < hi`.
    pub fn marginals(&self, lo: f64, hi: f64) -> Vec<(String, usize)> {
        self.spec
            .marginal_times
            .iter()
            .filter(|&&f| f >= lo - 1e-12 && f < hi)
            .map(|&f| (format!("s={f}"), self.grid.nearest_index(f)))
            .collect()
    }

    /// Runs `f` once per path on its own substream; the output order is the path order.
    pub fn simulate<R, F>(&self, role: u64, n: usize, f: F) -> Result<Vec<R>>
    where
        R: Send,
        F: Fn(&mut RngStream) -> Result<R> + Sync,
    {
        let seed = self.spec.seed;
        let ordinal = self.ordinal;
        let out: Vec<Result<R>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = RngStream::new(seed, stream_id(ordinal, role, i as u64));
                f(&mut rng).map_err(|e| match e {
                    Error::Overflow { .. } | Error::Domain(_) => {
                        Error::PathOverflow { path: i, source: Box::new(e) }
                    }
                    other => other,
                })
            })
            .collect();
        out.into_iter().collect()
    }

    pub fn ks(&self, name: &str, lhs: &[f64], rhs: &[f64]) -> Result<TestReport> {
        let (ml, vl) = moments(lhs);
        let (mr, vr) = moments(rhs);
        Ok(ks_two_sample(&SamplePool::univariate(lhs.to_vec())?, &SamplePool::univariate(rhs.to_vec())?)?
            .named(format!("ks:{name}"))
            .with_threshold(KS_THRESHOLD)
            .detail("mean_lhs", ml)
            .detail("var_lhs", vl)
            .detail("mean_rhs", mr)
            .detail("var_rhs", vr))
    }

    pub fn energy(&mut self, name: &str, lhs: &[Vec<f64>], rhs: &[Vec<f64>], logs: &[bool]) -> Result<TestReport> {
        let take = |rows: &[Vec<f64>]| -> Vec<Vec<f64>> {
            rows.iter()
                .take(self.spec.energy_sample)
                .map(|r| r.iter().zip(logs).map(|(&v, &l)| if l { v.ln() } else { v }).collect())
                .collect()
        };
        let xs = SamplePool::from_rows(&take(lhs))?;
        let ys = SamplePool::from_rows(&take(rhs))?;
        let k = self.energy_tests;
        self.energy_tests += 1;
        let rng = RngStream::new(self.spec.seed, stream_id(self.ordinal, ROLE_PERMUTATION, k << 32));
        Ok(energy_distance_test(&xs, &ys, self.spec.n_permutations, &rng)?
            .named(format!("energy:{name}"))
            .with_threshold(ENERGY_THRESHOLD))
    }

    /// Marginal KS per coordinate, their Bonferroni aggregate, and the joint energy test.
    pub fn battery(
        &mut self,
        names: &[String],
        lhs: &[Vec<f64>],
        rhs: &[Vec<f64>],
        logs: &[bool],
    ) -> Result<()> {
        let mut ks = Vec::with_capacity(names.len());
        for (j, name) in names.iter().enumerate() {
            let l: Vec<f64> = lhs.iter().map(|r| r[j]).collect();
            let r: Vec<f64> = rhs.iter().map(|r| r[j]).collect();
            ks.push(self.ks(name, &l, &r)?);
        }
        if ks.len() > 1 {
            let b = bonferroni(&ks, self.spec.family_alpha)?;
            self.tests.extend(ks);
            self.tests.push(b);
        } else {
            self.tests.extend(ks);
        }
        if names.len() > 1 {
            let e = self.energy("joint", lhs, rhs, logs)?;
            self.tests.push(e);
        }
        Ok(())
    }

    /// `E[lhs]` against `E[w * rhs]` at `K_SIGMA` standard errors.
    pub fn weighted(&mut self, name: &str, lhs: Vec<f64>, rhs: Vec<f64>, w: Vec<f64>) -> Result<()> {
        let l = SamplePool::univariate(lhs)?;
        let r = SamplePool::univariate(rhs)?.with_weights(w)?;
        let rep = weighted_mean_compare(&l, &r, K_SIGMA)?.named(format!("weighted:{name}"));
        self.tests.push(rep);
        Ok(())
    }
}
