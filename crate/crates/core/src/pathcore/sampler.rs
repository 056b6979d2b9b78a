use rand::Rng;

use crate::error::{Error, Result};
use crate::pathcore::{Path, TimeGrid};
use crate::scalar::Real;

/// Brownian motion with drift, `B_s + drift * s`, sampled exactly on the grid.
pub fn sample_bm<T: Real, R: Rng + ?Sized>(grid: &TimeGrid<T>, drift: T, rng: &mut R) -> Path<T> {
    let dt = grid.step();
    let sd = dt.sqrt();
    let mean = drift * dt;
    let mut values = Vec::with_capacity(grid.len());
    let mut cur = T::zero();
    values.push(cur);
    for _ in 0..grid.n_steps() {
        cur = cur + mean + sd * T::standard_normal(rng);
        values.push(cur);
    }
    Path::from_raw(*grid, values)
}

/// Brownian bridge from 0 to `endpoint_x` over the grid horizon.
///
/// Built as `B_s - (s/t) B_t + (s/t) x` from a driftless Brownian path, so
/// the last value equals `endpoint_x` exactly.
pub fn sample_bridge<T: Real, R: Rng + ?Sized>(
    grid: &TimeGrid<T>,
    endpoint_x: T,
    rng: &mut R,
) -> Path<T> {
    let b = sample_bm(grid, T::zero(), rng);
    let bt = b.terminal();
    let values = b
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let r = grid.fraction(i);
            v - r * bt + r * endpoint_x
        })
        .collect();
    Path::from_raw(*grid, values)
}

/// One draw of `beta(a) = sqrt(a) * N(0, 1)` for an independent Brownian motion `beta`.
pub fn gaussian_at_random_time<T: Real, R: Rng + ?Sized>(a: T, rng: &mut R) -> Result<T> {
    if !(a > T::zero()) || !a.is_finite() {
        return Err(Error::domain(format!("time change must be positive, got {a}")));
    }
    Ok(a.sqrt() * T::standard_normal(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathcore::RngStream;

    #[test]
    fn bm_starts_at_zero_and_is_deterministic() {
        let grid = TimeGrid::<f64>::new(1.0, 64).unwrap();
        let a = sample_bm(&grid, 0.3, &mut RngStream::new(5, 9));
        let b = sample_bm(&grid, 0.3, &mut RngStream::new(5, 9));
        assert_eq!(a.at(0), 0.0);
        assert_eq!(a.values().len(), 65);
        let bytes_a: Vec<u64> = a.values().iter().map(|v| v.to_bits()).collect();
        let bytes_b: Vec<u64> = b.values().iter().map(|v| v.to_bits()).collect();
        assert_eq!(bytes_a, bytes_b);
    }

    #[test]
    fn bridge_endpoints_are_pinned() {
        let grid = TimeGrid::new(1.0, 100).unwrap();
        for (k, x) in [0.0, 3.0, -1.25].into_iter().enumerate() {
            let b = sample_bridge(&grid, x, &mut RngStream::new(1, k as u64));
            assert_eq!(b.at(0), 0.0);
            assert_eq!(b.terminal(), x);
        }
    }

    #[test]
    fn random_time_gaussian_rejects_nonpositive() {
        let mut rng = RngStream::new(0, 0);
        assert!(gaussian_at_random_time(0.0_f64, &mut rng).is_err());
        assert!(gaussian_at_random_time(-1.0_f64, &mut rng).is_err());
        assert!(gaussian_at_random_time(f64::NAN, &mut rng).is_err());
        assert!(gaussian_at_random_time(2.0_f64, &mut rng).unwrap().is_finite());
    }

    #[test]
    fn f32_sampler_works() {
        let grid = TimeGrid::new(1.0_f32, 8).unwrap();
        let p = sample_bm(&grid, 0.0_f32, &mut RngStream::new(3, 3));
        assert_eq!(p.values().len(), 9);
    }
}
