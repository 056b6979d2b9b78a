//! Oracles shared by the integration targets.
#![allow(dead_code)]

use bmtransform::functionals::{exp_quad_a, QuadRule};
use bmtransform::pathcore::{AugmentedPath, Path, RngStream, TimeGrid};
use bmtransform::stattests::{ks_two_sample, SamplePool};
use bmtransform::transforms::t_tilde;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

pub fn deterministic(n: usize, rule: QuadRule, f: impl Fn(f64) -> f64) -> AugmentedPath<f64> {
    let g = TimeGrid::new(1.0, n).unwrap();
    exp_quad_a(&Path::from_fn(g, f).unwrap(), rule).unwrap()
}

/// Inserts conditionally exact midpoints: the bridge between neighbours at
/// spacing `dt` has midpoint variance `dt / 4`.
pub fn refine(values: &[f64], dt: f64, rng: &mut RngStream) -> Vec<f64> {
    let sd = (dt / 4.0).sqrt();
    let mut out = Vec::with_capacity(2 * values.len() - 1);
    for w in values.windows(2) {
        out.push(w[0]);
        let z: f64 = StandardNormal.sample(rng);
        out.push(0.5 * (w[0] + w[1]) + sd * z);
    }
    out.push(*values.last().unwrap());
    out
}

/// Brownian path on `[0,1]` at `n0 * 2^k` steps for `k = 0..=levels`, every level
/// a refinement of the previous one.
pub fn refined_levels(n0: usize, levels: usize, rng: &mut RngStream) -> Vec<Vec<f64>> {
    let g = TimeGrid::new(1.0, n0).unwrap();
    let mut cur = bmtransform::pathcore::sample_bm(&g, 0.0, rng).into_values();
    let mut out = vec![cur.clone()];
    let mut dt = 1.0 / n0 as f64;
    for _ in 0..levels {
        cur = refine(&cur, dt, rng);
        dt /= 2.0;
        out.push(cur.clone());
    }
    out
}

fn trap(values: &[f64]) -> AugmentedPath<f64> {
    let g = TimeGrid::new(1.0, values.len() - 1).unwrap();
    exp_quad_a(&Path::new(g, values.to_vec()).unwrap(), QuadRule::Trapezoid).unwrap()
}

/// RMS over paths of `|A_t(n) - A_t(2n)|` for `n = n0 * 2^k`, `k < levels`.
pub fn refinement_rms(paths: usize, n0: usize, levels: usize, seed: u64) -> Vec<f64> {
    let sq: Vec<Vec<f64>> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let lv = refined_levels(n0, levels, &mut RngStream::new(seed, i));
            let a: Vec<f64> = lv.iter().map(|v| trap(v).terminal_a()).collect();
            a.windows(2).map(|w| (w[0] - w[1]).powi(2)).collect()
        })
        .collect();
    (0..levels)
        .map(|k| (sq.iter().map(|r| r[k]).sum::<f64>() / paths as f64).sqrt())
        .collect()
}

/// RMS relative gap at `s = t` between rule-propagated and re-quadratured `A`
/// after the involution, at a coarse and a fine resolution of the same paths.
pub fn propagation_gap_rms(paths: usize, coarse: usize, fine: usize, seed: u64) -> (f64, f64) {
    let levels = (fine / coarse).trailing_zeros() as usize;
    let gap = |v: &[f64]| {
        let t = t_tilde(&trap(v)).unwrap();
        let re = exp_quad_a(t.path(), QuadRule::Trapezoid).unwrap();
        ((re.terminal_a() - t.terminal_a()) / t.terminal_a()).powi(2)
    };
    let sq: Vec<(f64, f64)> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let lv = refined_levels(coarse, levels, &mut RngStream::new(seed, i));
            (gap(&lv[0]), gap(&lv[levels]))
        })
        .collect();
    let n = paths as f64;
    (
        (sq.iter().map(|p| p.0).sum::<f64>() / n).sqrt(),
        (sq.iter().map(|p| p.1).sum::<f64>() / n).sqrt(),
    )
}

/// Fraction of null KS p-values below 0.1 over `reps` pairs of N(0,1) pools.
pub fn ks_null_fraction(reps: usize, n: usize, seed: u64) -> f64 {
    let small = (0..reps as u64)
        .into_par_iter()
        .filter(|&k| {
            let mut r = RngStream::new(seed, 2 * k);
            let mut q = RngStream::new(seed, 2 * k + 1);
            let a: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut r)).collect();
            let b: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut q)).collect();
            let rep = ks_two_sample(&SamplePool::univariate(a).unwrap(), &SamplePool::univariate(b).unwrap()).unwrap();
            rep.p_value.unwrap() < 0.1
        })
        .count();
    small as f64 / reps as f64
}
