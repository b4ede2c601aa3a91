//! Algebraic eigenproblem with a small shift δ.
//!
//! With v = Σ c_m ‖x − y_m‖^p + Σ β_s G_s(x) where the G_s are boundary-knot
//! columns at wavenumber δ, the shifted operator (∇² + δ²) annihilates the G_s
//! and maps each polyharmonic term to the known Ψ_m = p(p+n−2)r^(p−2) + δ²r^p.
//! Eliminating β through the boundary conditions gives, at the interior
//! centres, Ψ c = μ P c with μ = δ² − λ², a standard eigenproblem for P⁻¹Ψ.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{self, Source};
use super::{
    boundary_block, default_budget, merge_clusters, orthonormalize, plausible, polyharmonic, screen, Eigenpair,
    Representation, Scheme, Spectrum, SpectrumDiagnostics,
};
use crate::error::{Error, Result};
use crate::geometry::{distance, domain_quadrature, Domain};
use crate::linalg::{eigenvalues, pinv, svd};
use crate::special_fn::KernelSpec;
use crate::Point;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgebraicOptions {
    /// Odd polyharmonic power p of the particular-solution basis.
    pub power: u32,
    /// Relative singular-value cut for the boundary elimination.
    pub pinv_rtol: f64,
    /// |Im μ| / max(|μ|, δ²) above which an eigenvalue counts as complex.
    pub imag_tol: f64,
    pub bc_tol: f64,
    /// Only eigenvalues with λ ≤ this are returned.
    pub lambda_max: Option<f64>,
    pub quadrature_budget: Option<usize>,
}

impl Default for AlgebraicOptions {
    fn default() -> Self {
        AlgebraicOptions {
            power: 3,
            pinv_rtol: 1e-13,
            imag_tol: 1e-8,
            bc_tol: 1e-2,
            lambda_max: None,
            quadrature_budget: None,
        }
    }
}

pub fn eigen_algebraic(domain: &Domain, delta: f64, n_interior: usize) -> Result<Spectrum> {
    eigen_algebraic_with(domain, delta, n_interior, &AlgebraicOptions::default())
}

/// Every `stride`-th interior node so a subset still covers the domain.
fn pick_interior(domain: &Domain, count: usize) -> Vec<Point> {
    let all = domain.interior();
    if count >= all.len() {
        return all.to_vec();
    }
    (0..count).map(|i| all[i * all.len() / count].clone()).collect()
}

pub fn eigen_algebraic_with(
    domain: &Domain,
    delta: f64,
    n_interior: usize,
    opts: &AlgebraicOptions,
) -> Result<Spectrum> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Domain(format!("shift δ must be > 0, got {delta}")));
    }
    if n_interior < 1 || domain.interior().is_empty() {
        return Err(Error::param("n_interior", "needs at least one interior node"));
    }
    if opts.power.is_multiple_of(2) {
        return Err(Error::param("power", "must be odd"));
    }
    let n = domain.dimension();
    let p = opts.power;
    let centers = pick_interior(domain, n_interior);
    let m = centers.len();
    let nodes = domain.boundary();
    let sources: Vec<Source> = nodes.iter().map(Source::from_node).collect();
    let kernel = KernelSpec::general(n, delta)?;

    let phi_i = DMatrix::from_fn(m, m, |i, j| distance(&centers[i], &centers[j]).powi(p as i32));
    let lap = (p * (p + n as u32 - 2)) as f64;
    let psi_i = DMatrix::from_fn(m, m, |i, j| {
        let r = distance(&centers[i], &centers[j]);
        lap * r.powi(p as i32 - 2) + delta * delta * r.powi(p as i32)
    });
    let b_phi = DMatrix::from_fn(nodes.len(), m, |i, j| {
        let (v, g) = polyharmonic(p, &nodes[i].position, &centers[j]);
        basis::apply_bc(&nodes[i], v, &g)
    });
    let b_g = boundary_block(&kernel, &sources, nodes, 1.0);
    let g_i = DMatrix::from_fn(m, sources.len(), |i, s| {
        basis::column(&kernel, &sources[s], &centers[i]).0
    });

    // β = −E c
    let e = pinv(&b_g, opts.pinv_rtol) * &b_phi;
    let p_mat = &phi_i - &g_i * &e;
    let k = match p_mat.clone().lu().solve(&psi_i) {
        Some(k) if k.iter().all(|v| v.is_finite()) => k,
        _ => pinv(&p_mat, 1e-14) * &psi_i,
    };

    let d2 = delta * delta;
    let mut complex = 0;
    let mut lambdas: Vec<f64> = Vec::new();
    for (re, im) in eigenvalues(&k) {
        if im.abs() > opts.imag_tol * re.abs().max(d2) {
            complex += 1;
            continue;
        }
        if re < d2 {
            let lam = (d2 - re).sqrt();
            if opts.lambda_max.is_none_or(|top| lam <= top) {
                lambdas.push(lam);
            }
        }
    }
    lambdas.sort_by(f64::total_cmp);
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for lam in lambdas {
        match clusters.last_mut() {
            Some(c) if lam - c[0] <= 1e-4 * lam => c.push(lam),
            _ => clusters.push(vec![lam]),
        }
    }
    let candidates: usize = clusters.iter().map(Vec::len).sum();

    let quad = domain_quadrature(domain, opts.quadrature_budget.unwrap_or_else(|| default_budget(n)))?;
    let groups: Vec<Vec<Eigenpair>> = clusters
        .par_iter()
        .map(|cluster| {
            let lam = cluster.iter().sum::<f64>() / cluster.len() as f64;
            let shifted = &k - DMatrix::identity(m, m) * (d2 - lam * lam);
            let d = svd(&shifted);
            let pairs: Vec<Eigenpair> = (0..cluster.len())
                .map(|i| {
                    let c: DVector<f64> = d.v.column(m - 1 - i).into_owned();
                    let beta = -(&e * &c);
                    Eigenpair {
                        dimension: n,
                        wavenumber: lam,
                        beta: beta.iter().cloned().collect(),
                        sources: sources.clone(),
                        bc_residual: f64::NAN,
                        norm: f64::NAN,
                        representation: Representation::DualReciprocity {
                            delta,
                            power: p,
                            centers: centers.clone(),
                            weights: c.iter().cloned().collect(),
                        },
                    }
                })
                .filter(|p| plausible(p, domain, opts.bc_tol))
                .collect();
            let mut pairs = orthonormalize(pairs, &quad);
            screen(&mut pairs, domain, &quad, opts.bc_tol);
            pairs
        })
        .collect();
    let kept: usize = groups.iter().map(Vec::len).sum();
    let pairs = merge_clusters(groups);
    let top = pairs.last().map_or(delta, |p| p.wavenumber);
    Ok(Spectrum {
        pairs,
        scheme: Scheme::AlgebraicShift(delta),
        scan_range: (0.0, opts.lambda_max.unwrap_or(top)),
        diagnostics: SpectrumDiagnostics {
            candidates,
            rejected: candidates.saturating_sub(kept),
            complex_discarded: complex,
            undersampled: false,
        },
    })
}
