//! Closed-form transient solutions u(x, t) = w(x) + Σ_j [A_j T_A^j(t) +
//! B_j ω_j T_B^j(t)] v_j(x) over the eigenpairs v_j of the domain.
//!
//! Each v_j is itself a combination Σ_k β_jk ψ_k of boundary-knot columns, so
//! the per-center amplitudes are A_jk = A_j β_jk ([`TransientSolution::a_matrix`]).

mod lift;
mod modes;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

pub use lift::{lift_inhomogeneous, BoundaryLift, SteadyLift};
pub use modes::{temporal_modes, Family, ModeValues, Regime, TemporalMode};

use crate::bkm_eigen::{Eigenpair, Representation, Spectrum};
use crate::error::{Error, Result};
use crate::geometry::{Domain, QuadratureRule};
use crate::io::csv_string;
use crate::linalg::lstsq;
use crate::{Field, Point};

/// Captured-energy fraction below which a truncation warning is issued.
const CAPTURE_WARN: f64 = 0.99;

#[derive(Debug, Clone)]
pub struct EquationSpec {
    pub family: Family,
    /// Static forcing f of the steady problem ∇²w − μw = f.
    pub forcing: Option<Field>,
    pub dirichlet: Option<Field>,
    /// Data for Neumann and Robin nodes.
    pub neumann: Option<Field>,
}

impl EquationSpec {
    pub fn homogeneous(family: Family) -> Self {
        EquationSpec {
            family,
            forcing: None,
            dirichlet: None,
            neumann: None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum InitialData {
    Function(Field),
    Samples(Vec<(Point, f64)>),
}

impl InitialData {
    pub fn zero() -> Self {
        InitialData::Function(Field::zero())
    }

    fn is_zero(&self) -> bool {
        match self {
            InitialData::Function(f) => f.is_zero(),
            InitialData::Samples(s) => s.iter().all(|(_, v)| *v == 0.0),
        }
    }

    fn shifted(&self, lift: &SteadyLift) -> InitialData {
        match self {
            InitialData::Function(f) => {
                let (f, lift) = (f.clone(), lift.clone());
                InitialData::Function(Field::new(&format!("{} - w", f.label()), move |x| {
                    f.eval(x) - lift.eval(x)
                }))
            }
            InitialData::Samples(s) => {
                InitialData::Samples(s.iter().map(|(x, v)| (x.clone(), v - lift.eval(x))).collect())
            }
        }
    }

    /// Points, weights (quadrature or uniform) and values used for fitting.
    fn sampled(&self, quad: &QuadratureRule) -> (Vec<Point>, Vec<f64>, Vec<f64>) {
        match self {
            InitialData::Function(f) => (
                quad.nodes.clone(),
                quad.weights.clone(),
                quad.nodes.par_iter().map(|x| f.eval(x)).collect(),
            ),
            InitialData::Samples(s) => (
                s.iter().map(|(x, _)| x.clone()).collect(),
                vec![1.0; s.len()],
                s.iter().map(|(_, v)| *v).collect(),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    Collocation,
    Direct,
}

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct FitDiagnostics {
    /// Max |û(x, 0) − φ(x)| over the fitting points.
    pub fit_residual: f64,
    /// Max |û_t(x, 0) − ψ(x)| over the fitting points.
    pub velocity_residual: f64,
    /// 1 − ‖φ − û(·, 0)‖²/‖φ‖².
    pub energy_captured: f64,
    pub velocity_energy_captured: f64,
    pub modes_used: usize,
    pub warnings: Vec<String>,
}

/// Fitted amplitudes: A_j on T_A, B_j on ω_j·T_B.
#[derive(Debug, Clone)]
pub struct Amplitudes {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// A_0 and B_0 of the constant mode in the ½A_0 + ½B_0·T convention.
    pub a0: f64,
    pub b0: f64,
    pub diagnostics: FitDiagnostics,
}

fn constant_value(pair: &Eigenpair) -> Option<f64> {
    match pair.representation {
        Representation::Constant { value } => Some(value),
        _ => None,
    }
}

/// Mode coefficients c_j with Σ c_j v_j ≈ data, plus the residual and the
/// captured fraction of the weighted norm.
fn project(
    pairs: &[Eigenpair],
    columns: &[Vec<f64>],
    weights: &[f64],
    values: &[f64],
    method: FitMethod,
) -> (Vec<f64>, f64, f64) {
    let m = values.len();
    let coeffs: Vec<f64> = match method {
        FitMethod::Direct => columns
            .iter()
            .map(|col| {
                let num: f64 = col.iter().zip(values).zip(weights).map(|((v, f), w)| w * v * f).sum();
                let den: f64 = col.iter().zip(weights).map(|(v, w)| w * v * v).sum();
                if den > 0.0 {
                    num / den
                } else {
                    0.0
                }
            })
            .collect(),
        FitMethod::Collocation => {
            let a = DMatrix::from_fn(m, pairs.len(), |i, j| columns[j][i]);
            let norms: Vec<f64> = (0..pairs.len())
                .map(|j| a.column(j).norm().max(f64::MIN_POSITIVE))
                .collect();
            let a = DMatrix::from_fn(m, pairs.len(), |i, j| a[(i, j)] / norms[j]);
            let (x, _) = lstsq(&a, &DVector::from_column_slice(values), 1e-12);
            x.iter().zip(&norms).map(|(v, s)| v / s).collect()
        }
    };
    let fitted: Vec<f64> = (0..m)
        .map(|i| coeffs.iter().zip(columns).map(|(c, col)| c * col[i]).sum())
        .collect();
    let residual = fitted
        .iter()
        .zip(values)
        .fold(0.0_f64, |r, (a, b)| r.max((a - b).abs()));
    let norm2: f64 = values.iter().zip(weights).map(|(v, w)| w * v * v).sum();
    let err2: f64 = fitted
        .iter()
        .zip(values)
        .zip(weights)
        .map(|((a, b), w)| w * (a - b) * (a - b))
        .sum();
    let captured = if norm2 > 0.0 {
        (1.0 - err2 / norm2).max(0.0)
    } else {
        1.0
    };
    (coeffs, residual, captured)
}

/// Fit φ (and ψ for second-order families) in the eigenfunctions of the
/// spectrum.
pub fn fit_initial_conditions(
    family: &Family,
    phi: &InitialData,
    psi: Option<&InitialData>,
    spectrum: &Spectrum,
    quad: &QuadratureRule,
    method: FitMethod,
) -> Result<Amplitudes> {
    if spectrum.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    family.validate()?;
    if family.is_first_order() && psi.is_some_and(|p| !p.is_zero()) {
        return Err(Error::FirstOrderVelocity);
    }
    let modes = spectrum
        .pairs
        .iter()
        .map(|p| temporal_modes(family, p.wavenumber))
        .collect::<Result<Vec<_>>>()?;
    let pairs = &spectrum.pairs;
    let mut diag = FitDiagnostics {
        modes_used: pairs.len(),
        velocity_energy_captured: 1.0,
        ..Default::default()
    };
    let fit = |data: &InitialData| -> Result<(Vec<f64>, f64, f64)> {
        if let (InitialData::Samples(_), FitMethod::Direct) = (data, method) {
            return Err(Error::Unsupported(
                "direct projection needs initial data as a function".into(),
            ));
        }
        if let InitialData::Samples(s) = data {
            if let Some((x, _)) = s.iter().find(|(x, _)| x.len() != quad_dimension(quad, pairs)) {
                return Err(Error::DimensionMismatch {
                    expected: quad_dimension(quad, pairs),
                    found: x.len(),
                });
            }
            if s.len() < pairs.len() {
                return Err(Error::TooFewSamples {
                    samples: s.len(),
                    atoms: pairs.len(),
                });
            }
        }
        if data.is_zero() {
            return Ok((vec![0.0; pairs.len()], 0.0, 1.0));
        }
        let (points, weights, values) = data.sampled(quad);
        let columns: Vec<Vec<f64>> = pairs
            .par_iter()
            .map(|p| points.iter().map(|x| p.eval(x)).collect())
            .collect();
        Ok(project(pairs, &columns, &weights, &values, method))
    };
    let (a, res, cap) = fit(phi)?;
    diag.fit_residual = res;
    diag.energy_captured = cap;
    let mut b = vec![0.0; pairs.len()];
    if let Some(psi) = psi.filter(|_| !family.is_first_order()) {
        let (vel, res, cap) = fit(psi)?;
        diag.velocity_residual = res;
        diag.velocity_energy_captured = cap;
        b = vel.iter().zip(&modes).map(|(v, m)| v / m.frequency()).collect();
    }
    if diag.energy_captured < CAPTURE_WARN {
        diag.warnings.push(format!(
            "fitted modes capture {:.4} of ‖φ‖²; the spectrum may be truncated",
            diag.energy_captured
        ));
    }
    if diag.velocity_energy_captured < CAPTURE_WARN {
        diag.warnings.push(format!(
            "fitted modes capture {:.4} of ‖ψ‖²; the spectrum may be truncated",
            diag.velocity_energy_captured
        ));
    }
    let (mut a0, mut b0) = (0.0, 0.0);
    for (j, p) in pairs.iter().enumerate() {
        if let Some(v) = constant_value(p) {
            a0 = 2.0 * a[j] * v;
            b0 = 2.0 * b[j] * v * modes[j].frequency();
        }
    }
    Ok(Amplitudes {
        a,
        b,
        a0,
        b0,
        diagnostics: diag,
    })
}

fn quad_dimension(quad: &QuadratureRule, pairs: &[Eigenpair]) -> usize {
    quad.nodes.first().map_or_else(|| pairs[0].dimension, |x| x.len())
}

#[derive(Debug, Clone)]
pub struct TransientSolution {
    pub equation: EquationSpec,
    pub pairs: Vec<Eigenpair>,
    pub modes: Vec<TemporalMode>,
    pub amplitudes: Amplitudes,
    pub steady: Option<SteadyLift>,
}

impl TransientSolution {
    /// Per-center amplitudes A_jk = A_j β_jk (empty rows for modes without
    /// a boundary-knot form).
    pub fn a_matrix(&self) -> Vec<Vec<f64>> {
        self.pairs
            .iter()
            .zip(&self.amplitudes.a)
            .map(|(p, a)| p.beta.iter().map(|b| a * b).collect())
            .collect()
    }

    pub fn b_matrix(&self) -> Vec<Vec<f64>> {
        self.pairs
            .iter()
            .zip(&self.amplitudes.b)
            .map(|(p, b)| p.beta.iter().map(|v| b * v).collect())
            .collect()
    }

    /// (u, u_t, ∇u) at (x, t).
    pub fn state(&self, x: &[f64], t: f64) -> (f64, f64, Point) {
        let (mut u, mut g) = match &self.steady {
            Some(w) => w.value_grad(x),
            None => (0.0, vec![0.0; x.len()]),
        };
        let mut ut = 0.0;
        for ((p, m), (a, b)) in self
            .pairs
            .iter()
            .zip(&self.modes)
            .zip(self.amplitudes.a.iter().zip(&self.amplitudes.b))
        {
            if *a == 0.0 && *b == 0.0 {
                continue;
            }
            let (ta, tb, dta, dtb) = m.values(t);
            let bw = b * m.frequency();
            let amp = a * ta + bw * tb;
            let (v, vg) = p.value_grad(x);
            u += amp * v;
            ut += (a * dta + bw * dtb) * v;
            for (gi, vi) in g.iter_mut().zip(&vg) {
                *gi += amp * vi;
            }
        }
        (u, ut, g)
    }

    pub fn value(&self, x: &[f64], t: f64) -> f64 {
        self.state(x, t).0
    }

    pub fn velocity(&self, x: &[f64], t: f64) -> f64 {
        self.state(x, t).1
    }

    /// E(t) = ½∫(u_t² + c²|∇u|²) for second-order families.
    pub fn energy(&self, quad: &QuadratureRule, t: f64) -> f64 {
        let c2 = match self.equation.family {
            Family::Wave { c } | Family::DampedWave { c, .. } | Family::TransmissionLine { c, .. } => c * c,
            Family::Diffusion { .. } => 0.0,
        };
        let vals: Vec<f64> = quad
            .nodes
            .par_iter()
            .map(|x| {
                let (_, ut, g) = self.state(x, t);
                0.5 * (ut * ut + c2 * g.iter().map(|v| v * v).sum::<f64>())
            })
            .collect();
        quad.sum_values(&vals)
    }
}

/// Fit and assemble the solution, lifting inhomogeneous data first.
pub fn solve_transient(
    eq: &EquationSpec,
    domain: &Domain,
    spectrum: &Spectrum,
    phi: &InitialData,
    psi: Option<&InitialData>,
    quad: &QuadratureRule,
    method: FitMethod,
) -> Result<TransientSolution> {
    eq.family.validate()?;
    let steady = lift_inhomogeneous(eq, domain, spectrum, quad)?;
    let shifted;
    let phi = match &steady {
        Some(w) => {
            shifted = phi.shifted(w);
            &shifted
        }
        None => phi,
    };
    let mut amplitudes = fit_initial_conditions(&eq.family, phi, psi, spectrum, quad, method)?;
    if let InitialData::Function(f) = phi {
        let vmax = quad.nodes.iter().fold(0.0_f64, |m, x| m.max(f.eval(x).abs()));
        let worst = domain
            .boundary()
            .iter()
            .filter(|b| b.bc.is_dirichlet())
            .fold(0.0_f64, |m, b| m.max(f.eval(&b.position).abs()));
        if worst > 1e-6 * vmax.max(f64::MIN_POSITIVE) {
            amplitudes.diagnostics.warnings.push(format!(
                "initial data differs from the Dirichlet data by up to {worst:.3e}"
            ));
        }
    }
    if let Some(w) = &steady {
        if w.bc_mismatch > 1e-8 {
            amplitudes.diagnostics.warnings.push(format!(
                "steady lift misses the boundary data by up to {:.3e}",
                w.bc_mismatch
            ));
        }
        if w.forcing_captured < CAPTURE_WARN {
            amplitudes.diagnostics.warnings.push(format!(
                "eigenfunctions capture {:.4} of ‖f‖²; the steady part is truncated",
                w.forcing_captured
            ));
        }
    }
    let modes = spectrum
        .pairs
        .iter()
        .map(|p| temporal_modes(&eq.family, p.wavenumber))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransientSolution {
        equation: eq.clone(),
        pairs: spectrum.pairs.clone(),
        modes,
        amplitudes,
        steady,
    })
}

/// u[point][time].
pub fn evaluate_solution(sol: &TransientSolution, points: &[Point], times: &[f64]) -> Result<Vec<Vec<f64>>> {
    if let Some(t) = times.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::Domain(format!("times must be >= 0, got {t}")));
    }
    Ok(points
        .par_iter()
        .map(|x| times.iter().map(|t| sol.value(x, *t)).collect())
        .collect())
}

/// CSV `x1..xn,t,u`, points outer and times inner.
pub fn field_csv(points: &[Point], times: &[f64], values: &[Vec<f64>]) -> Result<String> {
    let n = points.first().map_or(0, |p| p.len());
    let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    header.push("t".into());
    header.push("u".into());
    let rows = points.iter().zip(values).flat_map(|(x, row)| {
        times
            .iter()
            .zip(row)
            .map(move |(t, u)| x.iter().copied().chain([*t, *u]).collect::<Vec<_>>())
    });
    csv_string(&header, rows)
}
