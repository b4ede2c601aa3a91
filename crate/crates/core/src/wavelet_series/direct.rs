//! Closed-form coefficient integrals.
//!
//! Without within-scale orthonormalization the coefficient of atom (j, k) is
//!
//! * n = 1: α_jk = c·(2η_j/R) ∫ f(ζ) sin(η_j r) dζ,
//! * n ≥ 2: α_jk = c·8 / (S_n R² J_{n/2}(η_j R)²) · (η_j/2π)^(1−n/2)
//!   ∫ r^(1−n/2) J_{n/2−1}(η_j r) f(ζ) dΩ,
//!
//! with r = ‖ζ − x̄_k‖ and the integral over Ω ∩ B(x̄_k, R); the constant
//! term is α_0 = c_0·(2/|B_R|) ∫_Ω f (with 2/R in place of 2/|B_R| for
//! n = 1). The factors c, c_0 come from [`CALIBRATION`]. The formulas assume
//! atoms are orthogonal across translations, which only holds for a single
//! center; with an orthonormalized basis the coefficients are plain L²
//! projections instead.

use rayon::prelude::*;

use super::{FitMethod, SeriesExpansion, WaveletBasis};
use crate::error::{Error, Result};
use crate::geometry::{distance, gauss_legendre, unit_ball_volume, unit_sphere_area, Domain, QuadratureRule, Shape};
use crate::special_fn::{bessel_j, j_over_pow, HalfOrder, KernelKind, KernelSpec};

/// Frozen calibration table `(n, c, c_0)`. Reproduced by [`calibrate`],
/// which expands a single atom (and the constant 1) on the unit ball.
pub const CALIBRATION: [(usize, f64, f64); 3] = [(1, 1.0, 0.5), (2, 1.0, 1.0), (3, 1.0, 1.0)];

/// Calibration factors for dimension n; dimensions beyond the table use 1.
pub fn calibration(n: usize) -> (f64, f64) {
    CALIBRATION
        .iter()
        .find(|(d, _, _)| *d == n)
        .map_or((1.0, 1.0), |(_, c, c0)| (*c, *c0))
}

fn measure_factor(n: usize, radius: f64) -> Result<f64> {
    Ok(if n == 1 {
        2.0 / radius
    } else {
        2.0 / (unit_ball_volume::<f64>(n)? * radius.powi(n as i32))
    })
}

/// Uncalibrated prefactor and radial weight w(r) of the α_jk integral.
fn kernel_factor(n: usize, eta: f64, radius: f64) -> Result<(f64, impl Fn(f64) -> f64)> {
    let pre = if n == 1 {
        2.0 * eta / radius
    } else {
        let nu = n as f64 / 2.0;
        let jn = bessel_j(nu, eta * radius)?;
        8.0 / (unit_sphere_area::<f64>(n)? * radius * radius * jn * jn)
            * (eta / (2.0 * std::f64::consts::PI)).powf(1.0 - nu)
    };
    let order = HalfOrder(n.saturating_sub(2) as u32);
    let weight = move |r: f64| {
        if n == 1 {
            (eta * r).sin()
        } else {
            // r^(−ν) J_ν(ηr) = η^ν · J_ν(z)/z^ν
            eta.powf(n as f64 / 2.0 - 1.0) * j_over_pow(order, eta * r)
        }
    };
    Ok((pre, weight))
}

/// Recompute `(c, c_0)` for dimension n by expanding φ_n(η_1 r) and the
/// constant 1 about the center of the unit ball, with radial Gauss–Legendre
/// quadrature.
pub fn calibrate(n: usize) -> Result<(f64, f64)> {
    let eta = crate::special_fn::radial_profile_zero(n, 1)?;
    let spec = KernelSpec::general(n, eta)?;
    let (x, w) = gauss_legendre(64);
    // ∫_B g(r) dΩ = shell(n) ∫_0^1 r^(n−1) g(r) dr
    let shell = if n == 1 { 2.0 } else { unit_sphere_area::<f64>(n)? };
    let radial = |g: &dyn Fn(f64) -> f64| -> f64 {
        x.iter()
            .zip(&w)
            .map(|(t, wt)| {
                let r = 0.5 * (t + 1.0);
                0.5 * wt * r.powi(n as i32 - 1) * g(r)
            })
            .sum::<f64>()
            * shell
    };
    let (pre, weight) = kernel_factor(n, eta, 1.0)?;
    let alpha = pre * radial(&|r| weight(r) * spec.general_radial(r).value);
    let a0 = 0.5 * measure_factor(n, 1.0)? * radial(&|_| 1.0);
    Ok((1.0 / alpha, 1.0 / a0))
}

fn is_ball_about(domain: &Domain, center: &[f64], radius: f64) -> bool {
    let centered = distance(domain.centroid(), center) <= 1e-9 * radius.max(1.0);
    match domain.shape() {
        Some(Shape::Interval { a, b }) => centered && ((b - a) / 2.0 - radius).abs() <= 1e-9 * radius,
        Some(Shape::Disk { radius: r }) | Some(Shape::Ball { radius: r }) => {
            centered && (r - radius).abs() <= 1e-9 * radius
        }
        _ => false,
    }
}

/// Coefficients by the closed-form integrals (or by L² projection when the
/// basis is orthonormalized within scales).
pub fn expand_direct(
    f: &(dyn Fn(&[f64]) -> f64 + Sync),
    basis: &WaveletBasis,
    domain: &Domain,
    quad: &QuadratureRule,
) -> Result<SeriesExpansion> {
    if basis.kernel != KernelKind::GeneralSolution {
        return Err(Error::Unsupported(
            "direct coefficients need the general-solution kernel".into(),
        ));
    }
    let n = basis.dimension;
    let radius = basis.radius;
    for (j, eta) in basis.scales.iter().enumerate() {
        let spec = KernelSpec::general(n, *eta)?;
        if spec.general_radial(radius).value.abs() > 1e-10 {
            return Err(Error::param(
                format!("scales[{j}]"),
                "direct coefficients need scales at profile zeros of the basis radius",
            ));
        }
    }
    let (c, c0) = calibration(n);
    let fv: Vec<f64> = quad.nodes.par_iter().map(|x| f(x)).collect();
    let a0 = 0.5 * c0 * measure_factor(n, radius)? * quad.sum_values(&fv);
    let k = basis.centers.len();
    let mut flat = vec![0.0; basis.atom_count()];
    let mut warnings = Vec::new();
    if basis.ortho.is_some() {
        let rows: Vec<Vec<f64>> = quad.nodes.par_iter().map(|x| basis.atoms(x)).collect();
        for (a, slot) in flat.iter_mut().enumerate() {
            *slot = rows
                .iter()
                .zip(&fv)
                .zip(&quad.weights)
                .map(|((r, f), w)| w * f * r[a])
                .sum();
        }
    } else {
        if k > 1 {
            warnings
                .push("several centers per scale without orthonormalization: translation orthogonality assumed".into());
        }
        for (j, eta) in basis.scales.iter().enumerate() {
            let (pre, weight) = kernel_factor(n, *eta, radius)?;
            for (m, center) in basis.centers.iter().enumerate() {
                let integral: f64 = quad
                    .nodes
                    .iter()
                    .zip(&quad.weights)
                    .zip(&fv)
                    .map(|((x, w), f)| {
                        let r = distance(x, center);
                        if r <= radius {
                            w * f * weight(r)
                        } else {
                            0.0
                        }
                    })
                    .sum();
                flat[j * k + m] = c * pre * integral;
            }
        }
    }
    if !basis.centers.iter().all(|ctr| is_ball_about(domain, ctr, radius)) {
        warnings.push("direct formulas assume a ball of the basis radius about each center".into());
    }
    let mut exp = SeriesExpansion::from_flat(basis.clone(), a0, &flat, FitMethod::Direct);
    exp.fit_residual = quad
        .nodes
        .par_iter()
        .zip(fv.par_iter())
        .map(|(x, f)| (exp.eval(x) - f).abs())
        .reduce(|| 0.0, f64::max);
    exp.warnings = warnings;
    Ok(exp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_matches_recomputed_constants() {
        for (n, c, c0) in CALIBRATION {
            let (rc, rc0) = calibrate(n).unwrap();
            assert!((rc - c).abs() < 1e-10, "n={n}: {rc}");
            assert!((rc0 - c0).abs() < 1e-12, "n={n}: {rc0}");
        }
    }
}
