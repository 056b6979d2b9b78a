//! Exact samplers for the auxiliary random variables: gamma variables,
//! Dufresne's limit `1/(2 gamma_mu)`, first-passage times of drifted
//! Brownian motion.

use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Shape of a unit-rate gamma law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParam<T> {
    mu: T,
}

impl<T: Real> GammaParam<T> {
    pub fn new(mu: T) -> Result<Self> {
        if !(mu > T::zero()) || !mu.is_finite() {
            return Err(Error::domain(format!("gamma shape must be positive, got {mu}")));
        }
        Ok(GammaParam { mu })
    }

    #[inline]
    pub fn mu(&self) -> T {
        self.mu
    }
}

/// Draw from `x^{mu-1} e^{-x} / Gamma(mu)`.
///
/// Marsaglia–Tsang squeeze/rejection for `mu >= 1`; for `mu < 1` the
/// `gamma_{mu+1} * U^{1/mu}` boost.
pub fn gamma_sample<T: Real, R: Rng + ?Sized>(p: GammaParam<T>, rng: &mut R) -> T {
    let one = T::one();
    if p.mu < one {
        let boosted = marsaglia_tsang(p.mu + one, rng);
        let u = T::open01(rng);
        return boosted * u.powf(one / p.mu);
    }
    marsaglia_tsang(p.mu, rng)
}

fn marsaglia_tsang<T: Real, R: Rng + ?Sized>(shape: T, rng: &mut R) -> T {
    let one = T::one();
    let d = shape - one / T::lit(3.0);
    let c = one / (T::lit(9.0) * d).sqrt();
    loop {
        let (x, v) = loop {
            let x = T::standard_normal(rng);
            let v = one + c * x;
            if v > T::zero() {
                break (x, v * v * v);
            }
        };
        let u = T::open01(rng);
        let x2 = x * x;
        if u < one - T::lit(0.0331) * x2 * x2 {
            return d * v;
        }
        if u.ln() < T::lit(0.5) * x2 + d * (one - v + v.ln()) {
            return d * v;
        }
    }
}

/// `1/(2 gamma_mu)`, the law of `int_0^inf exp(2 B^{(-mu)}_s) ds`.
pub fn dufresne_limit_sample<T: Real, R: Rng + ?Sized>(p: GammaParam<T>, rng: &mut R) -> T {
    T::one() / (T::lit(2.0) * gamma_sample(p, rng))
}

/// First hitting time of `level_a > 0` by Brownian motion with drift `drift_nu > 0`.
///
/// The law is inverse Gaussian with mean `a/nu` and shape `a^2`; sampled by
/// the Michael–Schucany–Haas transformation.
pub fn hitting_time_sample<T: Real, R: Rng + ?Sized>(
    level_a: T,
    drift_nu: T,
    rng: &mut R,
) -> Result<T> {
    if !(level_a > T::zero()) || !level_a.is_finite() {
        return Err(Error::domain(format!("hitting level must be positive, got {level_a}")));
    }
    if !(drift_nu > T::zero()) || !drift_nu.is_finite() {
        return Err(Error::domain(format!("drift must be positive, got {drift_nu}")));
    }
    let mean = level_a / drift_nu;
    let shape = level_a * level_a;
    Ok(inverse_gaussian(mean, shape, rng))
}

fn inverse_gaussian<T: Real, R: Rng + ?Sized>(mean: T, shape: T, rng: &mut R) -> T {
    let two = T::lit(2.0);
    let n = T::standard_normal(rng);
    let y = mean * n * n;
    // Smaller root of the quadratic, written to avoid cancellation for large y.
    let disc = (T::lit(4.0) * shape * y + y * y).sqrt();
    let x = mean * (two * shape) / (two * shape + y + disc);
    let u = T::open01(rng);
    if u * (mean + x) <= mean {
        x
    } else {
        mean * mean / x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pathcore::RngStream;

    #[test]
    fn gamma_rejects_nonpositive_shape() {
        assert!(GammaParam::new(0.0_f64).is_err());
        assert!(GammaParam::new(-2.0_f64).is_err());
        assert!(GammaParam::new(f64::NAN).is_err());
    }

    #[test]
    fn hitting_time_rejects_bad_arguments() {
        let mut rng = RngStream::new(0, 0);
        assert!(hitting_time_sample(1.0_f64, -1.0, &mut rng).is_err());
        assert!(hitting_time_sample(0.0_f64, 1.0, &mut rng).is_err());
        assert!(hitting_time_sample(1.0_f64, 0.0, &mut rng).is_err());
    }

    #[test]
    fn samplers_are_deterministic_and_positive() {
        let g = GammaParam::new(0.4_f64).unwrap();
        let run = |id| {
            let mut rng = RngStream::new(9, id);
            (0..200)
                .map(|_| {
                    let a = gamma_sample(g, &mut rng);
                    let b = dufresne_limit_sample(g, &mut rng);
                    let c = hitting_time_sample(1.5, 0.7, &mut rng).unwrap();
                    (a, b, c)
                })
                .collect::<Vec<_>>()
        };
        let a = run(1);
        assert_eq!(a, run(1));
        assert_ne!(a, run(2));
        assert!(a.iter().all(|&(x, y, z)| x > 0.0 && y > 0.0 && z > 0.0));
    }

    #[test]
    fn inverse_gaussian_large_mean_is_finite() {
        let mut rng = RngStream::new(3, 3);
        for _ in 0..1000 {
            let t = hitting_time_sample(1.0_f64, 1e-6, &mut rng).unwrap();
            assert!(t.is_finite() && t > 0.0);
        }
    }
}
