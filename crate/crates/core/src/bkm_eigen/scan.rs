//! Singular-value scan over λ.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::basis::{self, Source};
use super::{
    boundary_block, constant_pair, default_budget, merge_clusters, orthonormalize, recentre, screen, Eigenpair,
    Representation, Scheme, Spectrum, SpectrumDiagnostics,
};
use crate::error::{Error, Result};
use crate::geometry::{domain_quadrature, Domain};
use crate::linalg::svd;
use crate::special_fn::KernelSpec;
use crate::Point;

/// What the scan minimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// σ_min of the stacked boundary block after orthonormalizing the trial
    /// space against boundary and interior samples together. Scale-free and
    /// robust when many columns are nearly dependent.
    SubspaceAngle,
    /// σ_min(H) of the square collocation matrix, divided by L·max|φ| so
    /// the value is comparable across λ. Dividing by σ_max instead fails
    /// when all singular values vanish together, as for the 2×2 interval.
    MatrixSigma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub samples: usize,
    pub refine_tol: f64,
    /// Accept a refined minimum when the objective is below this.
    pub accept_tol: f64,
    /// Reject pairs whose relative boundary residual exceeds this.
    pub bc_tol: f64,
    pub objective: Objective,
    /// Relative singular-value cut defining the trial space of the
    /// subspace-angle objective.
    pub range_rtol: f64,
    /// Quadrature budget for normalization; dimension default when `None`.
    pub quadrature_budget: Option<usize>,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            samples: 400,
            refine_tol: 1e-10,
            accept_tol: 1e-6,
            bc_tol: 1e-4,
            objective: Objective::SubspaceAngle,
            range_rtol: 1e-10,
            quadrature_budget: None,
        }
    }
}

struct Problem<'a> {
    domain: &'a Domain,
    sources: Vec<Source>,
    samples: Vec<Point>,
    objective: Objective,
    range_rtol: f64,
}

/// Objective value and the null directions (coefficient vectors) with their
/// singular values, ascending.
struct Evaluation {
    value: f64,
    directions: Vec<(f64, Vec<f64>)>,
}

impl Problem<'_> {
    fn kernel(&self, lambda: f64) -> KernelSpec<f64> {
        KernelSpec::general(self.domain.dimension(), lambda).expect("λ > 0")
    }

    fn objective(&self, lambda: f64) -> f64 {
        self.evaluate(lambda, 1).value
    }

    fn evaluate(&self, lambda: f64, want: usize) -> Evaluation {
        let kernel = self.kernel(lambda);
        let scale = lambda.max(1.0);
        let b = boundary_block(&kernel, &self.sources, self.domain.boundary(), scale);
        match self.objective {
            Objective::MatrixSigma => {
                let d = svd(&b);
                let peak = if kernel.dimension == 1 {
                    0.5 / lambda
                } else {
                    kernel.general_radial(0.0).value
                };
                let top = b.nrows() as f64 * peak;
                let k = d.s.len();
                let directions = (0..want.min(k))
                    .map(|i| (d.s[k - 1 - i] / top, d.v.column(k - 1 - i).iter().cloned().collect()))
                    .collect();
                Evaluation {
                    value: d.s[k - 1] / top,
                    directions,
                }
            }
            Objective::SubspaceAngle => {
                let (nb, ns) = (b.nrows(), self.sources.len());
                let interior = DMatrix::from_fn(self.samples.len(), ns, |i, s| {
                    basis::column(&kernel, &self.sources[s], &self.samples[i]).0
                });
                let mut a = DMatrix::zeros(nb + interior.nrows(), ns);
                a.rows_mut(0, nb).copy_from(&b);
                a.rows_mut(nb, interior.nrows()).copy_from(&interior);
                let d = svd(&a);
                let rank = d.rank(self.range_rtol).max(1);
                let qb = d.u.view((0, 0), (nb, rank)).into_owned();
                let e = svd(&qb);
                let k = e.s.len();
                let directions = (0..want.min(k))
                    .map(|i| {
                        let y = e.v.column(k - 1 - i);
                        let mut beta = vec![0.0; ns];
                        for j in 0..rank {
                            let c = y[j] / d.s[j];
                            for (bs, vs) in beta.iter_mut().zip(d.v.column(j).iter()) {
                                *bs += c * vs;
                            }
                        }
                        (e.s[k - 1 - i], beta)
                    })
                    .collect();
                Evaluation {
                    value: e.s[k - 1],
                    directions,
                }
            }
        }
    }

    /// Golden-section search for the minimum in [a, b].
    fn refine(&self, mut a: f64, mut b: f64, tol: f64) -> f64 {
        let g = 0.5 * (5.0_f64.sqrt() - 1.0);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let mut fc = self.objective(c);
        let mut fd = self.objective(d);
        while (b - a).abs() > tol {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = self.objective(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = self.objective(d);
            }
        }
        0.5 * (a + b)
    }
}

/// Scan objective at one wavenumber, with interior samples taken from the
/// domain's interior nodes.
pub fn scan_objective(domain: &Domain, lambda: f64, opts: &ScanOptions) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::Domain(format!("scan objective needs λ > 0, got {lambda}")));
    }
    let problem = Problem {
        domain,
        sources: domain.boundary().iter().map(Source::from_node).collect(),
        samples: sample_points(domain)?,
        objective: opts.objective,
        range_rtol: opts.range_rtol,
    };
    Ok(problem.objective(lambda))
}

fn sample_points(domain: &Domain) -> Result<Vec<Point>> {
    let l = domain.boundary().len();
    if domain.interior().len() >= l.min(8) && !domain.interior().is_empty() {
        Ok(domain.interior().to_vec())
    } else {
        Ok(domain_quadrature(domain, (4 * l).max(16))?.nodes)
    }
}

/// Scan with default options apart from the grid and refinement tolerance.
pub fn eigen_scan(domain: &Domain, range: (f64, f64), samples: usize, refine_tol: f64) -> Result<Spectrum> {
    eigen_scan_with(
        domain,
        range,
        &ScanOptions {
            samples,
            refine_tol,
            ..ScanOptions::default()
        },
    )
}

/// Locate eigenvalues in `range` as minima of the scan objective on a uniform
/// grid, refine each by golden section and keep those below `accept_tol`.
/// Degenerate eigenvalues return one pair per singular direction below
/// threshold; pure-Neumann domains also get the constant λ = 0 mode.
pub fn eigen_scan_with(domain: &Domain, range: (f64, f64), opts: &ScanOptions) -> Result<Spectrum> {
    let (lo, hi) = range;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Domain(format!(
            "scan range must satisfy 0 < λ_min < λ_max, got {range:?}"
        )));
    }
    if opts.samples < 16 {
        return Err(Error::param("samples", "must be >= 16"));
    }
    if !(opts.refine_tol > 0.0) {
        return Err(Error::param("refine_tol", "must be > 0"));
    }
    if domain.boundary().len() < 2 {
        return Err(Error::InvalidGeometry("need at least 2 boundary nodes".into()));
    }
    let n = domain.dimension();
    let sources: Vec<Source> = domain.boundary().iter().map(Source::from_node).collect();
    let quad = domain_quadrature(domain, opts.quadrature_budget.unwrap_or_else(|| default_budget(n)))?;
    let samples = sample_points(domain)?;
    let problem = Problem {
        domain,
        sources,
        samples,
        objective: opts.objective,
        range_rtol: opts.range_rtol,
    };

    let step = (hi - lo) / (opts.samples - 1) as f64;
    let grid: Vec<f64> = (0..opts.samples).map(|i| lo + step * i as f64).collect();
    let values: Vec<f64> = grid.par_iter().map(|&l| problem.objective(l)).collect();

    let span =
        values.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - values.iter().cloned().fold(f64::INFINITY, f64::min);
    let undersampled = values.windows(2).any(|w| (w[1] - w[0]).abs() > 0.5 * span.max(1e-300));

    let minima: Vec<usize> = (1..values.len() - 1)
        .filter(|&i| values[i] <= values[i - 1] && values[i] < values[i + 1])
        .collect();

    let refined: Vec<Option<Vec<Eigenpair>>> = minima
        .par_iter()
        .map(|&i| {
            let lam = problem.refine(grid[i - 1], grid[i + 1], opts.refine_tol);
            let ev = problem.evaluate(lam, 4);
            if !(ev.value <= opts.accept_tol) {
                return None;
            }
            let cut = opts.accept_tol.max(100.0 * ev.value);
            let pairs: Vec<Eigenpair> = ev
                .directions
                .into_iter()
                .filter(|(s, _)| *s <= cut)
                .map(|(_, beta)| Eigenpair {
                    dimension: n,
                    wavenumber: lam,
                    beta,
                    sources: problem.sources.clone(),
                    bc_residual: f64::NAN,
                    norm: f64::NAN,
                    representation: Representation::Bkm,
                })
                .map(|p| recentre(p, domain, &quad))
                .collect();
            let mut pairs = orthonormalize(pairs, &quad);
            screen(&mut pairs, domain, &quad, opts.bc_tol);
            if pairs.is_empty() {
                None
            } else {
                Some(pairs)
            }
        })
        .collect();

    let accepted = refined.iter().filter(|r| r.is_some()).count();
    let mut pairs = merge_clusters(refined.into_iter().flatten().collect());
    if domain.all_neumann() {
        pairs.insert(0, constant_pair(domain, &quad));
    }
    Ok(Spectrum {
        pairs,
        scheme: Scheme::DetScan,
        scan_range: range,
        diagnostics: SpectrumDiagnostics {
            candidates: minima.len(),
            rejected: minima.len() - accepted,
            complex_discarded: 0,
            undersampled,
        },
    })
}
