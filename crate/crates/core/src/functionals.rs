//! The exponential functional `A_s(phi) = int_0^s exp(2 phi_u) du` and the
//! companion functional `Z_s = exp(-phi_s) A_s`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::pathcore::{AProvenance, AugmentedPath, Path};
use crate::scalar::Real;

/// Path values above this make `exp(2 phi)` leave the double range.
pub const OVERFLOW_GUARD: f64 = 350.0;

/// Step-wise quadrature rule for `exp(2 phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum QuadRule {
    LeftRiemann,
    Trapezoid,
    /// Exact integral of `exp(2 phi)` for `phi` linear on each step.
    PiecewiseLinearExact,
}

impl QuadRule {
    /// Integral of `exp(2 phi)` over one step of width `dt` with endpoint
    /// values `lo = phi_i`, `hi = phi_{i+1}`; `e_lo`, `e_hi` are `exp(2 lo)`, `exp(2 hi)`.
    #[inline]
    fn increment<T: Real>(self, dt: T, lo: T, hi: T, e_lo: T, e_hi: T) -> T {
        match self {
            QuadRule::LeftRiemann => dt * e_lo,
            QuadRule::Trapezoid => dt * (e_lo + e_hi) / T::lit(2.0),
            QuadRule::PiecewiseLinearExact => {
                let h = hi - lo;
                if h.abs() < T::lit(1e-12) {
                    dt * e_lo
                } else {
                    let two_h = h + h;
                    dt * e_lo * two_h.exp_m1() / two_h
                }
            }
        }
    }
}

/// Cumulative quadrature of `exp(2 phi)` over the grid.
pub fn exp_quad_a<T: Real>(path: &Path<T>, rule: QuadRule) -> Result<AugmentedPath<T>> {
    let guard = T::lit(OVERFLOW_GUARD);
    let phi = path.values();
    if let Some(i) = phi.iter().position(|&v| !(v <= guard)) {
        return Err(Error::Overflow { what: "exp(2 phi)", node: i });
    }
    let dt = path.grid().step();
    let mut a = Vec::with_capacity(phi.len());
    a.push(T::zero());
    let mut acc = T::zero();
    let mut e_lo = (phi[0] + phi[0]).exp();
    for i in 0..phi.len() - 1 {
        let e_hi = (phi[i + 1] + phi[i + 1]).exp();
        acc = acc + rule.increment(dt, phi[i], phi[i + 1], e_lo, e_hi);
        if !acc.is_finite() {
            return Err(Error::Overflow { what: "exponential functional", node: i + 1 });
        }
        a.push(acc);
        e_lo = e_hi;
    }
    Ok(AugmentedPath::from_raw(path.clone(), a, AProvenance::Quadrature(rule)))
}

/// `Z_s = exp(-phi_s) A_s` at every node; `Z_0 = 0`.
pub fn z_of<T: Real>(aug: &AugmentedPath<T>) -> Vec<T> {
    aug.phi()
        .iter()
        .zip(aug.a())
        .map(|(&p, &a)| (-p).exp() * a)
        .collect()
}

/// Discrete check of `d/ds (1/A_s) = -1/Z_s^2` in relative form.
///
/// The derivative of `1/A` is taken as `-A'(s)/A_s^2` with `A'` a central
/// difference, which keeps the node next to the origin usable. Returns the
/// max over interior nodes of `|D_s + 1/Z_s^2| * Z_s^2`.
pub fn deriv_residual<T: Real>(aug: &AugmentedPath<T>) -> T {
    let a = aug.a();
    let phi = aug.phi();
    let two_dt = aug.grid().step() * T::lit(2.0);
    let mut worst = T::zero();
    for i in 1..a.len() - 1 {
        let a_prime = (a[i + 1] - a[i - 1]) / two_dt;
        let d_inv_a = -a_prime / (a[i] * a[i]);
        let z = (-phi[i]).exp() * a[i];
        let r = ((d_inv_a + T::one() / (z * z)) * z * z).abs();
        if r > worst || r.is_nan() {
            worst = r;
        }
    }
    worst
}
