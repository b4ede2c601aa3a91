//! Radial kernels built from Bessel functions: the nonsingular general
//! solution of the n-dimensional Helmholtz equation and the fundamental
//! solution of the modified Helmholtz equation.

use super::bessel::{bessel_k, j_over_pow, HalfOrder};
use crate::error::{Error, Result};
use crate::{lit, Scalar};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// Nonsingular general solution of ∇²u + λ²u = 0.
    GeneralSolution,
    /// Fundamental solution of ∇²u − λ²u = −δ.
    ModifiedHelmholtz,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec<T> {
    pub dimension: usize,
    pub wavenumber: T,
    pub kind: KernelKind,
}

/// Value and first radial derivative of a radial profile, plus φ'(r)/r which
/// stays finite at the origin for n ≥ 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialValue<T> {
    pub value: T,
    pub d_dr: T,
    pub d_dr_over_r: T,
}

impl<T: Scalar> KernelSpec<T> {
    pub fn new(dimension: usize, wavenumber: T, kind: KernelKind) -> Result<Self> {
        if dimension < 1 {
            return Err(Error::Domain("kernel dimension must be >= 1".into()));
        }
        if !(wavenumber >= T::zero()) || !wavenumber.is_finite() {
            return Err(Error::Domain("kernel wavenumber must be finite and >= 0".into()));
        }
        if kind == KernelKind::ModifiedHelmholtz && wavenumber == T::zero() {
            return Err(Error::Domain("modified Helmholtz kernel needs wavenumber > 0".into()));
        }
        Ok(KernelSpec {
            dimension,
            wavenumber,
            kind,
        })
    }

    pub fn general(dimension: usize, wavenumber: T) -> Result<Self> {
        Self::new(dimension, wavenumber, KernelKind::GeneralSolution)
    }

    pub fn modified(dimension: usize, wavenumber: T) -> Result<Self> {
        Self::new(dimension, wavenumber, KernelKind::ModifiedHelmholtz)
    }

    /// Bessel order n/2 − 1 as twice-order, valid for n ≥ 2.
    fn bessel_order(&self) -> HalfOrder {
        HalfOrder(self.dimension as u32 - 2)
    }

    /// Evaluate the kernel selected by `kind`.
    pub fn eval(&self, r: T) -> Result<T> {
        match self.kind {
            KernelKind::GeneralSolution => general_solution(self, r),
            KernelKind::ModifiedHelmholtz => modified_kernel(self, r),
        }
    }

    /// General-solution profile with its radial derivative.
    ///
    /// For n = 1 the profile sin(λr)/(2λ) has a kink at r = 0, so
    /// `d_dr_over_r` is infinite there; callers handle the one-sided limit.
    pub fn general_radial(&self, r: T) -> RadialValue<T> {
        let lam = self.wavenumber;
        if lam == T::zero() {
            return RadialValue {
                value: T::one(),
                d_dr: T::zero(),
                d_dr_over_r: T::zero(),
            };
        }
        if self.dimension == 1 {
            let (s, c) = (lam * r).sin_cos();
            let half_c = c / lit(2.0);
            return RadialValue {
                value: s / (lam + lam),
                d_dr: half_c,
                d_dr_over_r: half_c / r,
            };
        }
        let order = self.bessel_order();
        let nu: T = lit::<T>(order.0 as f64) / lit(2.0);
        let lam2 = lam * lam;
        let pref = (lam2 / (lit::<T>(2.0) * T::PI())).powf(nu) / lit(4.0);
        let z = lam * r;
        let value = pref * j_over_pow(order, z);
        let d_dr_over_r = -lam2 * pref * j_over_pow(HalfOrder(order.0 + 2), z);
        RadialValue {
            value,
            d_dr: d_dr_over_r * r,
            d_dr_over_r,
        }
    }
}

/// Nonsingular general solution φ_n(λr) of the n-dimensional Helmholtz
/// equation:
///
/// * λ = 0: the constant 1,
/// * n = 1: sin(λr)/(2λ),
/// * n ≥ 2: ¼ (λ/(2πr))^(n/2−1) J_(n/2−1)(λr), evaluated at r = 0 through
///   its analytic limit (λ²/(4π))^(n/2−1) / (4Γ(n/2)).
pub fn general_solution<T: Scalar>(spec: &KernelSpec<T>, r: T) -> Result<T> {
    if spec.kind != KernelKind::GeneralSolution {
        return Err(Error::Domain("general_solution needs a GeneralSolution kernel".into()));
    }
    if !(r >= T::zero()) {
        return Err(Error::Domain(format!("radius must be >= 0, got {:?}", r)));
    }
    Ok(spec.general_radial(r).value)
}

/// Fundamental solution g_n(λr) = (1/(2π)) (λ/(2πr))^(n/2−1) K_(n/2−1)(λr) of
/// the modified Helmholtz operator.
///
/// For n = 1 this is e^(−λr)/(2λ), which is finite at r = 0; for n ≥ 2 the
/// origin is a singularity and is rejected.
pub fn modified_kernel<T: Scalar>(spec: &KernelSpec<T>, r: T) -> Result<T> {
    if spec.kind != KernelKind::ModifiedHelmholtz {
        return Err(Error::Domain("modified_kernel needs a ModifiedHelmholtz kernel".into()));
    }
    let lam = spec.wavenumber;
    if !(r >= T::zero()) {
        return Err(Error::Domain(format!("radius must be >= 0, got {:?}", r)));
    }
    if spec.dimension == 1 {
        return Ok((-lam * r).exp() / (lam + lam));
    }
    if r == T::zero() {
        return Err(Error::Singularity(format!(
            "modified Helmholtz kernel in {} dimensions",
            spec.dimension
        )));
    }
    let two_pi = lit::<T>(2.0) * T::PI();
    let nu: T = lit::<T>((spec.dimension - 2) as f64) / lit(2.0);
    let z = lam * r;
    Ok((lam / (two_pi * r)).powf(nu) * bessel_k(nu, z)? / two_pi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kernel_spec_invariants() {
        assert!(KernelSpec::<f64>::general(0, 1.0).is_err());
        assert!(KernelSpec::<f64>::general(2, -1.0).is_err());
        assert!(KernelSpec::<f64>::modified(2, 0.0).is_err());
        assert!(KernelSpec::<f64>::general(2, 0.0).is_ok());
    }

    #[test]
    fn general_solution_examples() {
        let s1 = KernelSpec::general(1, PI).unwrap();
        assert!((general_solution(&s1, 0.5).unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
        let s2 = KernelSpec::general(2, 3.7).unwrap();
        assert_eq!(general_solution(&s2, 0.0).unwrap(), 0.25);
        let s3 = KernelSpec::general(3, 2.0).unwrap();
        let v = general_solution(&s3, 1.0).unwrap();
        assert!((v - 2.0_f64.sin() / (4.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn zero_wavenumber_is_constant_branch() {
        for n in 1..5 {
            let s = KernelSpec::general(n, 0.0).unwrap();
            assert_eq!(general_solution(&s, 0.7).unwrap(), 1.0);
        }
    }

    #[test]
    fn origin_limit_matches_sinc() {
        let s3 = KernelSpec::general(3, 2.0).unwrap();
        assert!((general_solution(&s3, 0.0).unwrap() - 2.0 / (4.0 * PI)).abs() < 1e-15);
        // continuity into r > 0
        let near = general_solution(&s3, 1e-7).unwrap();
        assert!((near - 2.0 / (4.0 * PI)).abs() < 1e-12);
    }

    #[test]
    fn modified_kernel_examples() {
        let s = KernelSpec::modified(3, 1.0).unwrap();
        assert!((modified_kernel(&s, 1.0).unwrap() - (-1.0_f64).exp() / (4.0 * PI)).abs() < 1e-15);
        let s = KernelSpec::modified(3, 2.0).unwrap();
        assert!((modified_kernel(&s, 0.5).unwrap() - (-1.0_f64).exp() / (2.0 * PI)).abs() < 1e-15);
        let s = KernelSpec::modified(1, 1.0).unwrap();
        assert!(modified_kernel(&s, 800.0).unwrap() < 1e-300);
        assert_eq!(modified_kernel(&s, 0.0).unwrap(), 0.5);
        let s = KernelSpec::modified(2, 1.0).unwrap();
        assert!(matches!(modified_kernel(&s, 0.0), Err(Error::Singularity(_))));
    }
}
