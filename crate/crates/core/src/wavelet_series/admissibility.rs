//! Admissibility constant C_g = ∫_0^∞ |ĥ(ω)|² dω/ω.
//!
//! ĥ is the Fourier transform of the odd extension of the radial profile,
//! ĥ(ω) = 2∫_0^∞ p(r) sin(ωr) dr (up to the factor i). The odd extension
//! makes ĥ(0) = 0, without which no radial kernel of nonzero mean could be
//! admissible.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::gauss_legendre;
use crate::special_fn::{KernelKind, KernelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Admissibility {
    /// C_g, infinite when the integral diverges.
    pub value: f64,
    pub converged: bool,
    /// Estimated contribution of the truncated ω tails.
    pub tail: f64,
}

impl Admissibility {
    fn divergent() -> Self {
        Admissibility {
            value: f64::INFINITY,
            converged: false,
            tail: f64::INFINITY,
        }
    }
}

const PANEL: usize = 16;
/// Profile magnitude, relative to its peak, below which the tail is cut.
const CUTOFF: f64 = 1e-15;
/// ω samples per decade and decades on each side of 1/L.
const PER_DECADE: usize = 24;
const DECADES: i32 = 3;

/// C_g of a kernel's radial profile at its own wavenumber.
pub fn admissibility_constant(kernel: &KernelSpec<f64>) -> Result<Admissibility> {
    if !(kernel.wavenumber > 0.0) {
        return Err(Error::Domain("admissibility needs a positive wavenumber".into()));
    }
    let k = *kernel;
    let profile = move |r: f64| match k.kind {
        KernelKind::GeneralSolution => k.general_radial(r).value,
        KernelKind::ModifiedHelmholtz => k.eval(r).unwrap_or(0.0),
    };
    Ok(admissibility_profile(&profile, 1.0 / kernel.wavenumber))
}

/// C_g of an arbitrary radial profile with characteristic length `length`.
pub fn admissibility_profile(profile: &(dyn Fn(f64) -> f64 + Sync), length: f64) -> Admissibility {
    let Some(rmax) = support(profile, length) else {
        return Admissibility::divergent();
    };
    let n = 2 * DECADES as usize * PER_DECADE + 1;
    let step = std::f64::consts::LN_10 / PER_DECADE as f64;
    let s0 = -(DECADES as f64) * std::f64::consts::LN_10 - length.ln();
    // integrand in s = ln ω is |ĥ(e^s)|²
    let h: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| sine_transform(profile, (s0 + step * i as f64).exp(), length, rmax).powi(2))
        .collect();
    let body: f64 = step * (h.iter().sum::<f64>() - 0.5 * (h[0] + h[n - 1]));
    // exponential tails h ~ A e^(∓q s), extrapolated from the end samples
    let tail = |a: f64, b: f64| -> Option<f64> {
        if a <= 0.0 {
            return Some(0.0);
        }
        let q = (b / a).ln() / step;
        (q > 0.05).then(|| a / q)
    };
    match (tail(h[0], h[1]), tail(h[n - 1], h[n - 2])) {
        (Some(lo), Some(hi)) => {
            let value = body + lo + hi;
            Admissibility {
                value,
                converged: value > 0.0 && lo + hi <= 1e-3 * value,
                tail: lo + hi,
            }
        }
        _ => Admissibility::divergent(),
    }
}

/// Radius beyond which |p| stays below CUTOFF·peak, or `None` when the
/// profile does not decay that far within 2^40 lengths.
fn support(profile: &(dyn Fn(f64) -> f64 + Sync), length: f64) -> Option<f64> {
    let window = |a: f64| {
        (0..64)
            .map(|i| profile(a * (1.0 + i as f64 / 64.0)).abs())
            .fold(0.0, f64::max)
    };
    let peak = (0..40).map(|i| window(length * 2f64.powi(i - 20))).fold(0.0, f64::max);
    if !(peak > 0.0 && peak.is_finite()) {
        return None;
    }
    (0..40)
        .map(|k| length * 2f64.powi(k))
        .find(|&a| window(a) <= CUTOFF * peak && window(2.0 * a) <= CUTOFF * peak)
}

/// 2∫_0^rmax p(r) sin(ωr) dr with panels no wider than a quarter period or
/// half a length, graded geometrically towards r = 0 for singular profiles.
fn sine_transform(profile: &(dyn Fn(f64) -> f64 + Sync), omega: f64, length: f64, rmax: f64) -> f64 {
    let (x, w) = gauss_legendre(PANEL);
    let panel = |a: f64, b: f64| -> f64 {
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        x.iter()
            .zip(&w)
            .map(|(t, wt)| {
                let r = m + h * t;
                wt * profile(r) * (omega * r).sin()
            })
            .sum::<f64>()
            * h
    };
    let width = (0.5 * length).min(0.25 * std::f64::consts::TAU / omega);
    let mut total = 0.0;
    let mut a = width;
    for _ in 0..60 {
        total += panel(a * 0.5, a);
        a *= 0.5;
    }
    let mut a = width;
    while a < rmax {
        total += panel(a, a + width);
        a += width;
    }
    2.0 * total
}
