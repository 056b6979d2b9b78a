use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{SamplePool, TestReport};
use crate::error::{Error, Result};
use crate::pathcore::RngStream;

/// Fewest permutations accepted by [`energy_distance_test`].
pub const MIN_PERMUTATIONS: usize = 200;

/// Default minimum p-value for a standalone energy test.
const ENERGY_DEFAULT_THRESHOLD: f64 = 0.01;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `2 E|X-Y| - E|X-X'| - E|Y-Y'|`, within-sample means over distinct pairs.
pub fn energy_statistic(xs: &SamplePool, ys: &SamplePool) -> Result<f64> {
    let pooled = PairwiseDistances::new(xs, ys)?;
    let labels: Vec<f64> = (0..pooled.n).map(|i| if i < xs.len() { 0.0 } else { 1.0 }).collect();
    Ok(pooled.statistic(&labels, xs.len()))
}

/// Packed upper triangle of the pooled distance matrix.
struct PairwiseDistances {
    n: usize,
    /// Row `i` holds distances to `j > i`.
    offsets: Vec<usize>,
    packed: Vec<f64>,
    row_sums: Vec<f64>,
    total: f64,
}

impl PairwiseDistances {
    fn new(xs: &SamplePool, ys: &SamplePool) -> Result<Self> {
        if xs.dim() != ys.dim() {
            return Err(Error::config(format!(
                "dimension mismatch: {} vs {}",
                xs.dim(),
                ys.dim()
            )));
        }
        if xs.len() < 2 || ys.len() < 2 {
            return Err(Error::Insufficient("energy test needs two rows per side".into()));
        }
        let rows: Vec<&[f64]> = xs.rows().chain(ys.rows()).collect();
        let n = rows.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut acc = 0;
        for i in 0..n {
            offsets.push(acc);
            acc += n - i - 1;
        }
        offsets.push(acc);
        let row_blocks: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| rows[i + 1..].iter().map(|r| dist(rows[i], r)).collect())
            .collect();
        let row_sums: Vec<f64> = row_blocks.iter().map(|r| r.iter().sum()).collect();
        let total = row_sums.iter().sum();
        let packed = row_blocks.concat();
        Ok(PairwiseDistances { n, offsets, packed, row_sums, total })
    }

    /// Statistic for a 0/1 labelling with `n0` zeros.
    fn statistic(&self, labels: &[f64], n0: usize) -> f64 {
        let n1 = self.n - n0;
        let mut s00 = 0.0;
        let mut cross = 0.0;
        for i in 0..self.n {
            let row = &self.packed[self.offsets[i]..self.offsets[i + 1]];
            let to_ones: f64 = row.iter().zip(&labels[i + 1..]).map(|(d, l)| d * l).sum();
            if labels[i] == 0.0 {
                cross += to_ones;
                s00 += self.row_sums[i] - to_ones;
            } else {
                cross += self.row_sums[i] - to_ones;
            }
        }
        let s11 = self.total - cross - s00;
        let (n0f, n1f) = (n0 as f64, n1 as f64);
        2.0 * cross / (n0f * n1f)
            - 2.0 * s00 / (n0f * (n0f - 1.0))
            - 2.0 * s11 / (n1f * (n1f - 1.0))
    }
}

/// Permutation test on the energy distance; the observed labelling counts as
/// one member of the null set. Permutation `k` draws from stream
/// `rng.stream_id() + k`, so the p-value does not depend on thread count.
pub fn energy_distance_test(
    xs: &SamplePool,
    ys: &SamplePool,
    n_permutations: usize,
    rng: &RngStream,
) -> Result<TestReport> {
    if n_permutations < MIN_PERMUTATIONS {
        return Err(Error::config(format!(
            "energy test needs at least {MIN_PERMUTATIONS} permutations, got {n_permutations}"
        )));
    }
    let d = PairwiseDistances::new(xs, ys)?;
    let n0 = xs.len();
    let base: Vec<f64> = (0..d.n).map(|i| if i < n0 { 0.0 } else { 1.0 }).collect();
    let observed = d.statistic(&base, n0);
    let exceed = (0..n_permutations as u64)
        .into_par_iter()
        .map(|k| {
            let mut stream = rng.sibling(rng.stream_id().wrapping_add(k));
            let mut labels = base.clone();
            labels.shuffle(&mut stream);
            usize::from(d.statistic(&labels, n0) >= observed)
        })
        .sum::<usize>();
    let p = (1 + exceed) as f64 / (1 + n_permutations) as f64;
    Ok(TestReport::p_value_test("energy", observed, p, n0, ys.len(), ENERGY_DEFAULT_THRESHOLD)
        .detail("n_permutations", n_permutations)
        .detail("dim", xs.dim()))
}
