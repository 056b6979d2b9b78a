use serde::{Deserialize, Serialize};

use super::{compose_durations, reverse, t_alpha, t_tilde, t_z};
use crate::error::{Error, Result};
use crate::functionals::z_of;
use crate::pathcore::AugmentedPath;
use crate::scalar::Real;

/// The algebraic laws with a residual validator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LawId {
    /// `T_z(phi)(t) = phi_t - z` and `A_t(T_z phi) = e^{-z} A_t`.
    Endpoint,
    /// `1/A_s(T_z phi) = 1/A_s + (e^z - 1)/A_t`.
    InverseA,
    /// `Z o T_z = Z`.
    ZInvariance,
    /// `T_z o T_z' = T_{z+z'}` and `T_z o T_{-z} = Id`.
    Semigroup,
    /// `T_z o R o T_z = R` and `R o T_z = T_{-z} o R`.
    RConjugation,
    TildeEndpoint,
    TildeInverseA,
    TildeZInvariance,
    /// `T~ o T~ = Id`.
    TildeInvolution,
    /// `T~ o T_z o T~ o T_z = Id`.
    TildeFourFold,
    /// `T~(T_z phi) = T_{2 phi_t - z}(phi)`.
    ComptRelation,
    /// `R o T~ = T~ o R` for paths with `phi_0 = 0`.
    RCommute,
    /// `T~^t o T~^{t+u} = T^t_{phi_t + T~^{t+u}(phi)(t)}`.
    DurationComposition,
    /// `T~(T_alpha phi) = T_{log(e^{2 phi_t}/(1 + alpha A_t))}(phi)`.
    LexprCt,
    /// `T_alpha(T~ phi) = T_{log(e^{2 phi_t} + alpha A_t)}(phi)`.
    LexprTa,
    /// Undoing `T_{log(e^{2 psi_t} - 2x A_t)}` by `T_{log(e^{2 phi_t}/(1 + 2x A_t))}`.
    Pcac1,
    /// Undoing `T_{log(e^{2 psi_t}/(1 - 2x A_t))}` by `T_{log(e^{2 phi_t} + 2x A_t)}`.
    Pcac2,
}

impl LawId {
    pub const ALL: [LawId; 17] = [
        LawId::Endpoint,
        LawId::InverseA,
        LawId::ZInvariance,
        LawId::Semigroup,
        LawId::RConjugation,
        LawId::TildeEndpoint,
        LawId::TildeInverseA,
        LawId::TildeZInvariance,
        LawId::TildeInvolution,
        LawId::TildeFourFold,
        LawId::ComptRelation,
        LawId::RCommute,
        LawId::DurationComposition,
        LawId::LexprCt,
        LawId::LexprTa,
        LawId::Pcac1,
        LawId::Pcac2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LawId::Endpoint => "Endpoint",
            LawId::InverseA => "InverseA",
            LawId::ZInvariance => "ZInvariance",
            LawId::Semigroup => "Semigroup",
            LawId::RConjugation => "RConjugation",
            LawId::TildeEndpoint => "TildeEndpoint",
            LawId::TildeInverseA => "TildeInverseA",
            LawId::TildeZInvariance => "TildeZInvariance",
            LawId::TildeInvolution => "TildeInvolution",
            LawId::TildeFourFold => "TildeFourFold",
            LawId::ComptRelation => "ComptRelation",
            LawId::RCommute => "RCommute",
            LawId::DurationComposition => "DurationComposition",
            LawId::LexprCt => "LexprCt",
            LawId::LexprTa => "LexprTa",
            LawId::Pcac1 => "Pcac1",
            LawId::Pcac2 => "Pcac2",
        }
    }
}

/// Parameters consumed by the validators; each law reads only what it needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawParams<T> {
    pub z: T,
    pub z_prime: T,
    pub alpha: T,
    pub x: T,
    /// Split node for [`LawId::DurationComposition`]; `None` means the last node.
    pub split: Option<usize>,
}

impl<T: Real> Default for LawParams<T> {
    fn default() -> Self {
        LawParams { z: T::zero(), z_prime: T::zero(), alpha: T::zero(), x: T::zero(), split: None }
    }
}

/// Max absolute difference on `phi` plus max relative difference on `A` over `s_i > 0`.
pub fn residual<T: Real>(lhs: &AugmentedPath<T>, rhs: &AugmentedPath<T>) -> T {
    assert_eq!(lhs.grid().len(), rhs.grid().len(), "residual needs matching grids");
    let mut phi_err = T::zero();
    for (&a, &b) in lhs.phi().iter().zip(rhs.phi()) {
        phi_err = nan_max(phi_err, (a - b).abs());
    }
    phi_err + rel_max(&lhs.a()[1..], &rhs.a()[1..])
}

#[inline]
fn nan_max<T: Real>(acc: T, v: T) -> T {
    if v > acc || v.is_nan() {
        v
    } else {
        acc
    }
}

fn rel_max<T: Real>(got: &[T], want: &[T]) -> T {
    got.iter()
        .zip(want)
        .fold(T::zero(), |acc, (&g, &w)| nan_max(acc, ((g - w) / w).abs()))
}

fn inverse_a_residual<T: Real>(aug: &AugmentedPath<T>, out: &AugmentedPath<T>, z: T) -> T {
    let a_t = aug.terminal_a();
    let shift = z.exp_m1() / a_t;
    let want: Vec<T> = aug.a()[1..].iter().map(|&a| T::one() / a + shift).collect();
    let got: Vec<T> = out.a()[1..].iter().map(|&a| T::one() / a).collect();
    rel_max(&got, &want)
}

fn z_residual<T: Real>(aug: &AugmentedPath<T>, out: &AugmentedPath<T>) -> T {
    let za = z_of(aug);
    let zb = z_of(out);
    nan_max(zb[0].abs(), rel_max(&zb[1..], &za[1..]))
}

fn endpoint_residual<T: Real>(aug: &AugmentedPath<T>, out: &AugmentedPath<T>, z: T) -> T {
    let phi_err = (out.terminal_phi() - (aug.terminal_phi() - z)).abs();
    let want_a = (-z).exp() * aug.terminal_a();
    phi_err + ((out.terminal_a() - want_a) / want_a).abs()
}

/// Residual between the two sides of `law` on `aug`, all `A` rule-propagated.
pub fn law_residual<T: Real>(law: LawId, aug: &AugmentedPath<T>, p: &LawParams<T>) -> Result<T> {
    let two = T::lit(2.0);
    let pt = aug.terminal_phi();
    let a_t = aug.terminal_a();
    let e2pt = (pt + pt).exp();
    let r = match law {
        LawId::Endpoint => endpoint_residual(aug, &t_z(aug, p.z)?, p.z),
        LawId::InverseA => inverse_a_residual(aug, &t_z(aug, p.z)?, p.z),
        LawId::ZInvariance => z_residual(aug, &t_z(aug, p.z)?),
        LawId::Semigroup => {
            let lhs = t_z(&t_z(aug, p.z_prime)?, p.z)?;
            let rhs = t_z(aug, p.z + p.z_prime)?;
            let back = t_z(&t_z(aug, -p.z)?, p.z)?;
            residual(&lhs, &rhs) + residual(&back, aug)
        }
        LawId::RConjugation => {
            let rev = reverse(aug)?;
            let conj = t_z(&reverse(&t_z(aug, p.z)?)?, p.z)?;
            let lhs = reverse(&t_z(aug, p.z)?)?;
            let rhs = t_z(&rev, -p.z)?;
            residual(&conj, &rev) + residual(&lhs, &rhs)
        }
        LawId::TildeEndpoint => endpoint_residual(aug, &t_tilde(aug)?, pt + pt),
        LawId::TildeInverseA => inverse_a_residual(aug, &t_tilde(aug)?, pt + pt),
        LawId::TildeZInvariance => z_residual(aug, &t_tilde(aug)?),
        LawId::TildeInvolution => residual(&t_tilde(&t_tilde(aug)?)?, aug),
        LawId::TildeFourFold => {
            let four = t_z(&t_tilde(&t_z(aug, p.z)?)?, p.z)?;
            residual(&t_tilde(&four)?, aug)
        }
        LawId::ComptRelation => {
            residual(&t_tilde(&t_z(aug, p.z)?)?, &t_z(aug, pt + pt - p.z)?)
        }
        LawId::RCommute => {
            if aug.phi()[0] != T::zero() {
                return Err(Error::domain("R and T~ commute only for paths starting at 0"));
            }
            residual(&reverse(&t_tilde(aug)?)?, &t_tilde(&reverse(aug)?)?)
        }
        LawId::DurationComposition => {
            let split = p.split.unwrap_or(aug.n_steps());
            let sides = compose_durations(aug, split)?;
            residual(&sides.composed, &sides.single)
        }
        LawId::LexprCt => {
            let lhs = t_tilde(&t_alpha(aug, p.alpha)?)?;
            let z = pt + pt - (p.alpha * a_t).ln_1p();
            residual(&lhs, &t_z(aug, z)?)
        }
        LawId::LexprTa => {
            let lhs = t_alpha(&t_tilde(aug)?, p.alpha)?;
            residual(&lhs, &t_z(aug, (e2pt + p.alpha * a_t).ln())?)
        }
        LawId::Pcac1 => {
            let gap = e2pt - two * p.x * a_t;
            if !(gap > T::zero()) {
                return Err(Error::domain(format!(
                    "guard e^(2 psi_t) - 2 x A_t > 0 violated ({gap})"
                )));
            }
            let phi = t_z(aug, gap.ln())?;
            let ppt = phi.terminal_phi();
            let z = ppt + ppt - (two * p.x * phi.terminal_a()).ln_1p();
            residual(&t_z(&phi, z)?, aug)
        }
        LawId::Pcac2 => {
            let gap = T::one() - two * p.x * a_t;
            if !(gap > T::zero()) {
                return Err(Error::domain(format!("guard 1 - 2 x A_t > 0 violated ({gap})")));
            }
            let phi = t_z(aug, pt + pt - gap.ln())?;
            let ppt = phi.terminal_phi();
            let z = ((ppt + ppt).exp() + two * p.x * phi.terminal_a()).ln();
            residual(&t_z(&phi, z)?, aug)
        }
    };
    Ok(r)
}
