//! Helmholtz eigenpairs −∇²v = λ²v by the boundary knot method.
//!
//! Each eigenfunction is a combination of nonsingular general solutions
//! centred at boundary knots, so the PDE holds exactly and only the boundary
//! conditions are fitted. Two schemes are provided: a singular-value scan over
//! λ ([`eigen_scan`]) and a dual-reciprocity algebraic eigenproblem
//! ([`eigen_algebraic`]).

mod algebraic;
mod basis;
mod scan;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use algebraic::{eigen_algebraic, eigen_algebraic_with, AlgebraicOptions};
pub(crate) use basis::apply_bc;
pub use basis::{Source, SourceKind};
pub use scan::{eigen_scan, eigen_scan_with, scan_objective, Objective, ScanOptions};

use crate::error::{Error, Result};
use crate::geometry::{distance, dot, Domain, QuadratureRule};
use crate::linalg::lstsq;
use crate::special_fn::KernelSpec;
use crate::Point;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Representation {
    /// Σ β_s ψ_s(x) with columns at the pair's own wavenumber.
    Bkm,
    /// Σ w_k φ(λ‖x − y_k‖) with centres at interior nodes, refitted from the
    /// boundary-knot form; `beta` keeps the original coefficients.
    Recentred { centers: Vec<Point>, weights: Vec<f64> },
    /// The λ = 0 constant mode of a pure-Neumann domain.
    Constant { value: f64 },
    /// Σ c_m ‖x − y_m‖^p plus boundary-knot columns at wavenumber `delta`.
    DualReciprocity {
        delta: f64,
        power: u32,
        centers: Vec<Point>,
        weights: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Eigenpair {
    pub dimension: usize,
    pub wavenumber: f64,
    pub beta: Vec<f64>,
    pub sources: Vec<Source>,
    pub bc_residual: f64,
    pub norm: f64,
    pub representation: Representation,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    DetScan,
    AlgebraicShift(f64),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpectrumDiagnostics {
    /// Local minima (scan) or real algebraic eigenvalues found before filtering.
    pub candidates: usize,
    /// Candidates rejected by the acceptance or boundary-residual tests.
    pub rejected: usize,
    /// Complex algebraic eigenvalues discarded.
    pub complex_discarded: usize,
    /// The scan objective jumped by more than half its range between samples.
    pub undersampled: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub pairs: Vec<Eigenpair>,
    pub scheme: Scheme,
    pub scan_range: (f64, f64),
    pub diagnostics: SpectrumDiagnostics,
}

#[derive(Serialize)]
struct SpectrumRecord<'a> {
    lambda: f64,
    bc_residual: f64,
    scheme: &'a str,
    beta: &'a [f64],
}

impl Spectrum {
    pub fn wavenumbers(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.wavenumber).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Compact export: one `{lambda, bc_residual, scheme, beta}` record per pair.
    pub fn records_json(&self) -> String {
        let scheme = match self.scheme {
            Scheme::DetScan => "det_scan".to_string(),
            Scheme::AlgebraicShift(d) => format!("algebraic_shift({d})"),
        };
        let recs: Vec<SpectrumRecord> = self
            .pairs
            .iter()
            .map(|p| SpectrumRecord {
                lambda: p.wavenumber,
                bc_residual: p.bc_residual,
                scheme: &scheme,
                beta: &p.beta,
            })
            .collect();
        serde_json::to_string_pretty(&recs).expect("records serialize")
    }
}

impl Eigenpair {
    fn kernel(&self) -> KernelSpec<f64> {
        let k = match &self.representation {
            Representation::DualReciprocity { delta, .. } => *delta,
            _ => self.wavenumber,
        };
        KernelSpec::general(self.dimension, k).expect("stored wavenumber is valid")
    }

    /// v(x) and ∇v(x).
    pub fn value_grad(&self, x: &[f64]) -> (f64, Point) {
        let n = self.dimension;
        if let Representation::Constant { value } = self.representation {
            return (value, vec![0.0; n]);
        }
        let kernel = self.kernel();
        let mut v = 0.0;
        let mut g = vec![0.0; n];
        if let Representation::Recentred { centers, weights } = &self.representation {
            for (w, y) in weights.iter().zip(centers) {
                let rv = kernel.general_radial(distance(x, y));
                v += w * rv.value;
                for ((gi, xi), yi) in g.iter_mut().zip(x).zip(y) {
                    *gi += w * rv.d_dr_over_r * (xi - yi);
                }
            }
            return (v, g);
        }
        for (b, src) in self.beta.iter().zip(&self.sources) {
            let (cv, cg) = basis::column(&kernel, src, x);
            v += b * cv;
            for (gi, ci) in g.iter_mut().zip(&cg) {
                *gi += b * ci;
            }
        }
        if let Representation::DualReciprocity {
            power,
            centers,
            weights,
            ..
        } = &self.representation
        {
            for (c, y) in weights.iter().zip(centers) {
                let (pv, pg) = polyharmonic(*power, x, y);
                v += c * pv;
                for (gi, pi) in g.iter_mut().zip(&pg) {
                    *gi += c * pi;
                }
            }
        }
        (v, g)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.value_grad(x).0
    }

    pub fn gradient(&self, x: &[f64]) -> Point {
        self.value_grad(x).1
    }

    fn scale(&mut self, s: f64) {
        for b in &mut self.beta {
            *b *= s;
        }
        match &mut self.representation {
            Representation::Constant { value } => *value *= s,
            Representation::DualReciprocity { weights, .. } | Representation::Recentred { weights, .. } => {
                weights.iter_mut().for_each(|w| *w *= s)
            }
            Representation::Bkm => {}
        }
    }

    /// Subtract `c` times `other`, which must share this pair's representation.
    fn subtract(&mut self, c: f64, other: &Eigenpair) {
        for (b, o) in self.beta.iter_mut().zip(&other.beta) {
            *b -= c * o;
        }
        match (&mut self.representation, &other.representation) {
            (Representation::DualReciprocity { weights, .. }, Representation::DualReciprocity { weights: ow, .. })
            | (Representation::Recentred { weights, .. }, Representation::Recentred { weights: ow, .. }) => {
                for (w, o) in weights.iter_mut().zip(ow) {
                    *w -= c * o;
                }
            }
            _ => {}
        }
    }
}

/// ‖x − y‖^p and its gradient, p odd.
pub(crate) fn polyharmonic(p: u32, x: &[f64], y: &[f64]) -> (f64, Point) {
    let d: Point = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let r = dot(&d, &d).sqrt();
    let v = r.powi(p as i32);
    let g = p as f64 * r.powi(p as i32 - 2);
    (v, d.iter().map(|di| g * di).collect())
}

/// Eigenfunction values at each point.
pub fn eigenfunction_eval(pair: &Eigenpair, points: &[Point]) -> Vec<f64> {
    points.par_iter().map(|x| pair.eval(x)).collect()
}

/// Collocation matrix H(λ): row i applies node i's boundary operator to the
/// basis column of source s.
pub fn assemble_bkm_matrix(domain: &Domain, lambda: f64) -> Result<DMatrix<f64>> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::Domain(format!("assembly needs λ > 0, got {lambda}")));
    }
    if domain.boundary().len() < 2 {
        return Err(Error::InvalidGeometry("need at least 2 boundary nodes".into()));
    }
    let kernel = KernelSpec::general(domain.dimension(), lambda)?;
    let sources: Vec<Source> = domain.boundary().iter().map(Source::from_node).collect();
    Ok(boundary_block(&kernel, &sources, domain.boundary(), 1.0))
}

/// Boundary rows with derivative rows divided by `deriv_scale`.
pub(crate) fn boundary_block(
    kernel: &KernelSpec<f64>,
    sources: &[Source],
    nodes: &[crate::geometry::BoundaryNode],
    deriv_scale: f64,
) -> DMatrix<f64> {
    DMatrix::from_fn(nodes.len(), sources.len(), |i, s| {
        let (v, g) = basis::column(kernel, &sources[s], &nodes[i].position);
        let op = basis::apply_bc(&nodes[i], v, &g);
        if nodes[i].bc.is_dirichlet() {
            op
        } else {
            op / deriv_scale
        }
    })
}

/// Normalize a cluster of pairs sharing one wavenumber: Gram–Schmidt under the
/// L² inner product of `quad`, then unit norm. Pairs that collapse are dropped.
pub(crate) fn orthonormalize(mut pairs: Vec<Eigenpair>, quad: &QuadratureRule) -> Vec<Eigenpair> {
    let mut done: Vec<(Eigenpair, Vec<f64>)> = Vec::new();
    for mut p in pairs.drain(..) {
        let before = quad
            .sum_values(&values(&p, quad).iter().map(|v| v * v).collect::<Vec<_>>())
            .sqrt();
        for (q, qv) in &done {
            let pv = values(&p, quad);
            let c = quad.sum_values(&pv.iter().zip(qv).map(|(a, b)| a * b).collect::<Vec<_>>());
            p.subtract(c, q);
        }
        let pv = values(&p, quad);
        let norm = quad.sum_values(&pv.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
        if !(norm > 1e-8 * before) || norm == 0.0 {
            continue;
        }
        p.scale(1.0 / norm);
        let pv: Vec<f64> = pv.iter().map(|v| v / norm).collect();
        p.norm = quad.sum_values(&pv.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
        done.push((p, pv));
    }
    done.into_iter().map(|(p, _)| p).collect()
}

fn values(p: &Eigenpair, quad: &QuadratureRule) -> Vec<f64> {
    eigenfunction_eval(p, &quad.nodes)
}

/// Largest boundary-condition violation on the check set, with derivative
/// conditions scaled by 1/max(λ, 1).
fn bc_violation(pair: &Eigenpair, domain: &Domain) -> f64 {
    let scale = pair.wavenumber.max(1.0);
    domain
        .check_nodes()
        .par_iter()
        .map(|node| {
            let (v, g) = pair.value_grad(&node.position);
            let r = basis::apply_bc(node, v, &g).abs();
            if node.bc.is_dirichlet() {
                r
            } else {
                r / scale
            }
        })
        .reduce(|| 0.0, f64::max)
}

fn bc_residual(pair: &Eigenpair, domain: &Domain, quad: &QuadratureRule) -> (f64, f64) {
    let vmax = values(pair, quad).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    (bc_violation(pair, domain), vmax)
}

/// Cheap rejection before normalization: boundary violation against
/// max |v| over the interior nodes, with a tenfold margin.
pub(crate) fn plausible(pair: &Eigenpair, domain: &Domain, tol: f64) -> bool {
    let vmax = domain.interior().iter().fold(0.0_f64, |m, x| m.max(pair.eval(x).abs()));
    vmax > 0.0 && bc_violation(pair, domain) <= 10.0 * tol * vmax
}

/// Set each pair's residual and keep those within `tol·‖v‖_∞`.
pub(crate) fn screen(pairs: &mut Vec<Eigenpair>, domain: &Domain, quad: &QuadratureRule, tol: f64) {
    pairs.retain_mut(|p| {
        let (r, vmax) = bc_residual(p, domain, quad);
        p.bc_residual = r;
        r <= tol * vmax
    });
}

/// Refit a boundary-knot pair on λ-kernels centred at the interior nodes.
///
/// At an eigenvalue the boundary-knot coefficients grow like the inverse of
/// the distance to the nearest discrete singularity, so evaluating Σ β_s ψ_s
/// loses about log10‖β‖ digits to cancellation. The refit spans the same
/// Helmholtz solutions with modest weights. Only smooth kernels (n ≥ 2)
/// qualify; the pair is returned unchanged when the refit is not within
/// `1e-8·‖v‖_∞` of the original on the fit set.
pub(crate) fn recentre(pair: Eigenpair, domain: &Domain, quad: &QuadratureRule) -> Eigenpair {
    let centers = domain.interior();
    if pair.dimension < 2 || pair.representation != Representation::Bkm || centers.len() < 8 {
        return pair;
    }
    let kernel = pair.kernel();
    let stride = (quad.len() / (3 * centers.len())).max(1);
    let mut points: Vec<Point> = centers.to_vec();
    points.extend(quad.nodes.iter().step_by(stride).cloned());
    let checks = domain.check_nodes();
    let rows = points.len() + checks.len();
    let target: Vec<f64> = points
        .par_iter()
        .map(|x| pair.eval(x))
        .chain(checks.par_iter().map(|node| {
            let (v, g) = pair.value_grad(&node.position);
            basis::apply_bc(node, v, &g)
        }))
        .collect();
    let col = |x: &[f64], y: &[f64]| {
        let rv = kernel.general_radial(distance(x, y));
        let g: Point = x.iter().zip(y).map(|(a, b)| rv.d_dr_over_r * (a - b)).collect();
        (rv.value, g)
    };
    let a = DMatrix::from_fn(rows, centers.len(), |i, k| {
        if i < points.len() {
            col(&points[i], &centers[k]).0
        } else {
            let node = &checks[i - points.len()];
            let (v, g) = col(&node.position, &centers[k]);
            basis::apply_bc(node, v, &g)
        }
    });
    let b = nalgebra::DVector::from_vec(target.clone());
    let (w, _) = lstsq(&a, &b, 1e-13);
    let vmax = target[..points.len()].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if !((&a * &w - &b).amax() <= 1e-8 * vmax) {
        return pair;
    }
    Eigenpair {
        representation: Representation::Recentred {
            centers: centers.to_vec(),
            weights: w.iter().cloned().collect(),
        },
        ..pair
    }
}

/// Collapse wavenumbers within `1e-4·λ` of each other, keeping the earlier
/// group, and sort ascending.
pub(crate) fn merge_clusters(mut groups: Vec<Vec<Eigenpair>>) -> Vec<Eigenpair> {
    groups.retain(|g| !g.is_empty());
    groups.sort_by(|a, b| a[0].wavenumber.total_cmp(&b[0].wavenumber));
    let mut out: Vec<Vec<Eigenpair>> = Vec::new();
    for g in groups {
        let lam = g[0].wavenumber;
        match out.last() {
            Some(prev) if (lam - prev[0].wavenumber).abs() <= 1e-4 * lam.max(prev[0].wavenumber) => {
                if g.len() > prev.len() {
                    *out.last_mut().unwrap() = g;
                }
            }
            _ => out.push(g),
        }
    }
    out.into_iter().flatten().collect()
}

pub(crate) fn constant_pair(domain: &Domain, quad: &QuadratureRule) -> Eigenpair {
    let value = 1.0 / quad.measure().sqrt();
    Eigenpair {
        dimension: domain.dimension(),
        wavenumber: 0.0,
        beta: vec![value],
        sources: Vec::new(),
        bc_residual: 0.0,
        norm: 1.0,
        representation: Representation::Constant { value },
    }
}

/// Default quadrature budget for normalization in dimension n.
pub(crate) fn default_budget(n: usize) -> usize {
    match n {
        1 => 256,
        2 => 96 * 96,
        _ => 40_000,
    }
}
