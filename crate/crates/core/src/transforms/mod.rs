//! Anticipative transformations acting on augmented paths.
//!
//! Every map carries `A` along by its closed-form rule instead of
//! re-integrating, so the algebraic laws between the maps hold on the
//! discrete representation up to rounding.

mod laws;

pub use laws::{law_residual, residual, LawId, LawParams};

use crate::error::{Error, Result};
use crate::pathcore::{AProvenance, AugmentedPath, Path};
use crate::scalar::Real;

/// `T_z`: `phi_s - log(1 + (A_s/A_t)(e^z - 1))`, with `1/A'_s = 1/A_s + (e^z - 1)/A_t`.
pub fn t_z<T: Real>(aug: &AugmentedPath<T>, z: T) -> Result<AugmentedPath<T>> {
    if !z.is_finite() {
        return Err(Error::domain(format!("transform parameter must be finite, got {z}")));
    }
    let em1 = z.exp_m1();
    let a_t = aug.terminal_a();
    let n = aug.grid().len();
    let mut phi = Vec::with_capacity(n);
    let mut a = Vec::with_capacity(n);
    for (i, (&p, &ai)) in aug.phi().iter().zip(aug.a()).enumerate() {
        let w = (ai / a_t) * em1;
        let p_new = p - w.ln_1p();
        let a_new = ai / (T::one() + w);
        if !p_new.is_finite() || !a_new.is_finite() {
            return Err(Error::Overflow { what: "T_z", node: i });
        }
        phi.push(p_new);
        a.push(a_new);
    }
    Ok(AugmentedPath::from_raw(
        Path::from_raw(*aug.grid(), phi),
        a,
        AProvenance::RulePropagated,
    ))
}

/// The involution `T_{2 phi_t}`.
pub fn t_tilde<T: Real>(aug: &AugmentedPath<T>) -> Result<AugmentedPath<T>> {
    let pt = aug.terminal_phi();
    t_z(aug, pt + pt)
}

/// The non-anticipative `T_alpha(phi)_s = phi_s - log(1 + alpha A_s)`, computed
/// as `T_z` with `z = log(1 + alpha A_t)`.
pub fn t_alpha<T: Real>(aug: &AugmentedPath<T>, alpha: T) -> Result<AugmentedPath<T>> {
    if !(alpha >= T::zero()) || !alpha.is_finite() {
        return Err(Error::domain(format!("alpha must be nonnegative, got {alpha}")));
    }
    t_z(aug, (alpha * aug.terminal_a()).ln_1p())
}

/// Time reversal `R(phi)_s = phi_{t-s} - phi_t`, `A'_s = e^{-2 phi_t}(A_t - A_{t-s})`.
pub fn reverse<T: Real>(aug: &AugmentedPath<T>) -> Result<AugmentedPath<T>> {
    let n = aug.n_steps();
    let pt = aug.terminal_phi();
    let a_t = aug.terminal_a();
    let scale = -(pt + pt);
    let scale = scale.exp();
    let phi: Vec<T> = (0..=n).map(|i| aug.phi()[n - i] - pt).collect();
    let a: Vec<T> = (0..=n).map(|i| scale * (a_t - aug.a()[n - i])).collect();
    if let Some(i) = a.iter().position(|v| !v.is_finite()) {
        return Err(Error::Overflow { what: "time reversal", node: i });
    }
    Ok(AugmentedPath::from_raw(
        Path::from_raw(*aug.grid(), phi),
        a,
        AProvenance::RulePropagated,
    ))
}

/// Both sides of the composition law for the involution at two durations:
/// `T~^t(T~^{t+u}(phi))` and `T^t_{phi_t + T~^{t+u}(phi)(t)}(phi)` on `[0, t]`.
#[derive(Debug, Clone)]
pub struct DurationSides<T> {
    pub composed: AugmentedPath<T>,
    pub single: AugmentedPath<T>,
}

/// Evaluates both sides of the two-duration composition with `t = s_split`.
pub fn compose_durations<T: Real>(
    aug_long: &AugmentedPath<T>,
    split: usize,
) -> Result<DurationSides<T>> {
    if split < 2 || split > aug_long.n_steps() {
        return Err(Error::domain(format!(
            "split node {split} must lie in 2..={}",
            aug_long.n_steps()
        )));
    }
    let long = t_tilde(aug_long)?;
    let composed = t_tilde(&long.prefix(split)?)?;
    let z = aug_long.phi()[split] + long.phi()[split];
    let single = t_z(&aug_long.prefix(split)?, z)?;
    Ok(DurationSides { composed, single })
}

/// Same as [`compose_durations`] with the split given as a time.
pub fn compose_durations_at<T: Real>(
    aug_long: &AugmentedPath<T>,
    t: T,
) -> Result<DurationSides<T>> {
    let k = aug_long
        .grid()
        .index_of(t)
        .ok_or_else(|| Error::domain(format!("{t} is not a grid node")))?;
    compose_durations(aug_long, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::{exp_quad_a, QuadRule};
    use crate::pathcore::{sample_bm, RngStream, TimeGrid};

    fn det(n: usize, f: impl Fn(f64) -> f64) -> AugmentedPath<f64> {
        let p = Path::from_fn(TimeGrid::new(1.0, n).unwrap(), f).unwrap();
        exp_quad_a(&p, QuadRule::PiecewiseLinearExact).unwrap()
    }

    fn bm(seed: u64, n: usize) -> AugmentedPath<f64> {
        let g = TimeGrid::new(1.0, n).unwrap();
        exp_quad_a(&sample_bm(&g, 0.0, &mut RngStream::new(seed, 0)), QuadRule::Trapezoid).unwrap()
    }

    #[test]
    fn t_zero_is_identity_exactly() {
        let aug = bm(1, 256);
        let out = t_z(&aug, 0.0).unwrap();
        assert_eq!(out.phi(), aug.phi());
        assert_eq!(out.a(), aug.a());
        assert_eq!(out.provenance(), AProvenance::RulePropagated);
    }

    #[test]
    fn t_z_on_zero_path() {
        let aug = det(8, |_| 0.0);
        for z in [-1.5, 0.4, 2.0] {
            let out = t_z(&aug, z).unwrap();
            for i in 0..=8 {
                let s = aug.grid().node(i);
                let want = -(1.0 + s * (f64::exp(z) - 1.0)).ln();
                assert!((out.phi()[i] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn t_z_endpoint() {
        let aug = bm(2, 512);
        let out = t_z(&aug, 0.7).unwrap();
        assert!((out.terminal_phi() - (aug.terminal_phi() - 0.7)).abs() <= 1e-12);
        let want = (-0.7_f64).exp() * aug.terminal_a();
        assert!((out.terminal_a() - want).abs() / want <= 1e-12);
    }

    #[test]
    fn tilde_cases() {
        let mut aug = bm(3, 128);
        // Force phi_t = 0.
        let (p, _, _) = aug.clone().into_parts();
        let mut v = p.into_values();
        let last = *v.last().unwrap();
        let g = *aug.grid();
        for (i, x) in v.iter_mut().enumerate() {
            *x -= g.fraction(i) * last;
        }
        aug = exp_quad_a(&Path::new(g, v).unwrap(), QuadRule::Trapezoid).unwrap();
        let out = t_tilde(&aug).unwrap();
        assert_eq!(out.phi(), aug.phi());

        let r = det(64, |s| s);
        let out = t_tilde(&r).unwrap();
        assert!((out.terminal_phi() + 1.0).abs() <= 1e-12);

        let b = bm(4, 1024);
        let back = t_tilde(&t_tilde(&b).unwrap()).unwrap();
        assert!(residual(&back, &b) <= 1e-9);
    }

    #[test]
    fn t_alpha_cases() {
        let aug = bm(5, 256);
        assert_eq!(t_alpha(&aug, 0.0).unwrap().phi(), aug.phi());
        assert!(t_alpha(&aug, -0.1).is_err());

        let zero = det(16, |_| 0.0);
        let out = t_alpha(&zero, 1.0).unwrap();
        for i in 0..=16 {
            let s = zero.grid().node(i);
            assert!((out.phi()[i] + (1.0 + s).ln()).abs() < 1e-14);
        }

        // Direct formula against the T_z route.
        let alpha = 0.5;
        let out = t_alpha(&aug, alpha).unwrap();
        for i in 0..=256 {
            let direct = aug.phi()[i] - (1.0 + alpha * aug.a()[i]).ln();
            assert!((out.phi()[i] - direct).abs() <= 1e-12);
        }
    }

    #[test]
    fn reverse_cases() {
        let aug = bm(6, 200);
        let rr = reverse(&reverse(&aug).unwrap()).unwrap();
        let phi0 = aug.phi()[0];
        for i in 0..=200 {
            assert!((rr.phi()[i] - (aug.phi()[i] - phi0)).abs() <= 1e-13);
        }

        let zero = det(10, |_| 0.0);
        let r = reverse(&zero).unwrap();
        assert_eq!(r.phi(), zero.phi());
        for i in 0..=10 {
            assert!((r.a()[i] - zero.a()[i]).abs() < 1e-15);
        }

        let ramp = det(10, |s| s);
        let r = reverse(&ramp).unwrap();
        for i in 0..=10 {
            let s = ramp.grid().node(i);
            assert!((r.phi()[i] + s).abs() < 1e-15);
            let want = (-2.0_f64).exp() * (ramp.terminal_a() - ramp.a()[10 - i]);
            assert!((r.a()[i] - want).abs() < 1e-15);
        }
        assert!(r.a().windows(2).all(|w| w[0] < w[1]));
        assert_eq!(r.a()[0], 0.0);
    }

    #[test]
    fn duration_composition_cases() {
        // u = 0: single side has z = 0.
        let ramp = det(16, |s| s);
        let d = compose_durations(&ramp, 16).unwrap();
        assert!(residual(&d.composed, &ramp) <= 1e-12);
        assert!(residual(&d.single, &ramp) <= 1e-15);

        let d = compose_durations_at(&det(64, |s| s), 0.5).unwrap();
        assert!(residual(&d.composed, &d.single) <= 1e-9);

        let b = bm(7, 1024);
        let d = compose_durations(&b, 700).unwrap();
        assert!(residual(&d.composed, &d.single) <= 1e-9);

        assert!(compose_durations_at(&b, 0.50001).is_err());
        assert!(compose_durations(&b, 1).is_err());
    }

    #[test]
    fn extreme_parameter_overflow_is_reported() {
        let aug = bm(8, 64);
        assert!(t_z(&aug, f64::INFINITY).is_err());
        assert!(t_z(&aug, 800.0).is_err());
    }
}
