//! Steady lift w with ∇²w − μw = f and the boundary data, so that u − w
//! solves the homogeneous problem.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::EquationSpec;
use crate::bkm_eigen::{apply_bc, Eigenpair, Spectrum};
use crate::error::{Error, Result};
use crate::geometry::{distance, Domain, QuadratureRule};
use crate::linalg::lstsq;
use crate::special_fn::bessel_k;
use crate::Point;

/// Source offset outside the boundary, in enclosing radii.
const SOURCE_OFFSET: f64 = 0.5;

/// Fundamental solutions of ∇² − μ centred outside the domain plus a
/// constant (μ = 0 only).
#[derive(Debug, Clone)]
pub struct BoundaryLift {
    dimension: usize,
    mu: f64,
    sources: Vec<Point>,
    weights: Vec<f64>,
    constant: f64,
}

impl BoundaryLift {
    fn column(&self, x: &[f64], s: &[f64]) -> (f64, Point) {
        let n = self.dimension;
        let d: Point = x.iter().zip(s).map(|(a, b)| a - b).collect();
        let r = distance(x, s);
        // radial profile G(r) and G'(r)/r
        let (g, dg_r) = if self.mu > 0.0 {
            let k = self.mu.sqrt();
            if n == 1 {
                let e = (-k * r).exp();
                (e / (2.0 * k), -e / (2.0 * r))
            } else {
                let nu = (n as f64 - 2.0) / 2.0;
                let c = (k / (2.0 * std::f64::consts::PI)).powf(nu) / (2.0 * std::f64::consts::PI);
                let kz = |o: f64| bessel_k(o, k * r).unwrap_or(0.0);
                (c * r.powf(-nu) * kz(nu), -c * k * r.powf(-nu) * kz(nu + 1.0) / r)
            }
        } else {
            match n {
                1 => (r, 1.0 / r),
                2 => (r.ln(), 1.0 / (r * r)),
                _ => (r.powf(2.0 - n as f64), (2.0 - n as f64) * r.powf(-(n as f64))),
            }
        };
        (g, d.iter().map(|di| dg_r * di).collect())
    }

    pub fn value_grad(&self, x: &[f64]) -> (f64, Point) {
        let mut v = self.constant;
        let mut g = vec![0.0; self.dimension];
        for (w, s) in self.weights.iter().zip(&self.sources) {
            let (cv, cg) = self.column(x, s);
            v += w * cv;
            for (gi, ci) in g.iter_mut().zip(&cg) {
                *gi += w * ci;
            }
        }
        (v, g)
    }

    /// Least-squares fit to the boundary operator targets at the check nodes.
    fn fit(domain: &Domain, mu: f64, targets: &[f64]) -> Result<Self> {
        let n = domain.dimension();
        let radius = domain.enclosing_radius();
        let sources: Vec<Point> = domain
            .boundary()
            .iter()
            .map(|b| {
                b.position
                    .iter()
                    .zip(&b.normal)
                    .map(|(p, nn)| p + SOURCE_OFFSET * radius * nn)
                    .collect()
            })
            .collect();
        let mut lift = BoundaryLift {
            dimension: n,
            mu,
            sources,
            weights: Vec::new(),
            constant: 0.0,
        };
        let with_constant = mu == 0.0;
        let cols = lift.sources.len() + usize::from(with_constant);
        let nodes = domain.check_nodes();
        let rows: Vec<Vec<f64>> = nodes
            .par_iter()
            .map(|node| {
                let mut row: Vec<f64> = lift
                    .sources
                    .iter()
                    .map(|s| {
                        let (v, g) = lift.column(&node.position, s);
                        apply_bc(node, v, &g)
                    })
                    .collect();
                if with_constant {
                    row.push(apply_bc(node, 1.0, &vec![0.0; n]));
                }
                row
            })
            .collect();
        let a = DMatrix::from_fn(nodes.len(), cols, |i, j| rows[i][j]);
        let norms: Vec<f64> = (0..cols).map(|j| a.column(j).norm().max(f64::MIN_POSITIVE)).collect();
        let a = DMatrix::from_fn(nodes.len(), cols, |i, j| a[(i, j)] / norms[j]);
        let (x, _) = lstsq(&a, &DVector::from_column_slice(targets), 1e-12);
        let x: Vec<f64> = x.iter().zip(&norms).map(|(v, s)| v / s).collect();
        lift.weights = x[..lift.sources.len()].to_vec();
        if with_constant {
            lift.constant = x[lift.sources.len()];
        }
        Ok(lift)
    }
}

/// w = Σ c_j v_j + boundary lift.
#[derive(Debug, Clone)]
pub struct SteadyLift {
    pub modes: Vec<(Eigenpair, f64)>,
    pub boundary: Option<BoundaryLift>,
    /// Largest boundary-operator mismatch of w at the check nodes.
    pub bc_mismatch: f64,
    /// Fraction of ‖f‖² represented by the eigenfunction expansion.
    pub forcing_captured: f64,
}

impl SteadyLift {
    pub fn value_grad(&self, x: &[f64]) -> (f64, Point) {
        let (mut v, mut g) = match &self.boundary {
            Some(b) => b.value_grad(x),
            None => (0.0, vec![0.0; x.len()]),
        };
        for (pair, c) in &self.modes {
            let (pv, pg) = pair.value_grad(x);
            v += c * pv;
            for (gi, pi) in g.iter_mut().zip(&pg) {
                *gi += c * pi;
            }
        }
        (v, g)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.value_grad(x).0
    }

    /// Per-mode steady offsets −f_j/(λ_j² + μ), the expansion-path form of
    /// the particular solution.
    pub fn mode_offsets(&self) -> Vec<f64> {
        self.modes.iter().map(|(_, c)| *c).collect()
    }
}

/// Steady lift for the forcing and boundary data of `eq`; `None` when the
/// problem is already homogeneous.
pub fn lift_inhomogeneous(
    eq: &EquationSpec,
    domain: &Domain,
    spectrum: &Spectrum,
    quad: &QuadratureRule,
) -> Result<Option<SteadyLift>> {
    let zero = |f: &Option<crate::Field>| f.as_ref().is_none_or(|f| f.is_zero());
    if zero(&eq.forcing) && zero(&eq.dirichlet) && zero(&eq.neumann) {
        return Ok(None);
    }
    let mu = eq.family.shift();
    let mut modes = Vec::new();
    let mut forcing_captured = 1.0;
    if let Some(f) = eq.forcing.as_ref().filter(|f| !f.is_zero()) {
        if spectrum.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        let fv: Vec<f64> = quad.nodes.par_iter().map(|x| f.eval(x)).collect();
        let f_norm2 = quad.sum_values(&fv.iter().map(|v| v * v).collect::<Vec<_>>());
        let mut captured = 0.0;
        for pair in &spectrum.pairs {
            let vv: Vec<f64> = quad.nodes.par_iter().map(|x| pair.eval(x)).collect();
            let vn2 = quad.sum_values(&vv.iter().map(|v| v * v).collect::<Vec<_>>());
            let fj = quad.sum_values(&fv.iter().zip(&vv).map(|(a, b)| a * b).collect::<Vec<_>>()) / vn2;
            captured += fj * fj * vn2;
            let denom = pair.wavenumber * pair.wavenumber + mu;
            if denom.abs() <= 1e-12 * (1.0 + mu.abs()) {
                if fj.abs() > 1e-10 * f_norm2.sqrt() {
                    return Err(Error::Resonance(fj));
                }
                continue;
            }
            modes.push((pair.clone(), -fj / denom));
        }
        if f_norm2 > 0.0 {
            forcing_captured = captured / f_norm2;
        }
    }
    let mut lift = SteadyLift {
        modes,
        boundary: None,
        bc_mismatch: 0.0,
        forcing_captured,
    };
    let nodes = domain.check_nodes();
    let target = |lift: &SteadyLift| -> Vec<f64> {
        nodes
            .par_iter()
            .map(|node| {
                let data = if node.bc.is_dirichlet() {
                    &eq.dirichlet
                } else {
                    &eq.neumann
                };
                let d = data.as_ref().map_or(0.0, |f| f.eval(&node.position));
                let (v, g) = lift.value_grad(&node.position);
                d - apply_bc(node, v, &g)
            })
            .collect()
    };
    if !(zero(&eq.dirichlet) && zero(&eq.neumann)) {
        let t = target(&lift);
        lift.boundary = Some(BoundaryLift::fit(domain, mu, &t)?);
    }
    lift.bc_mismatch = target(&lift).iter().fold(0.0, |m, v| m.max(v.abs()));
    Ok(Some(lift))
}
