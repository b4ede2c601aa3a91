//! Radial Helmholtz wavelet series
//!
//! f(x) ≈ a0 + Σ_j Σ_k α_jk φ_n(η_j‖x − x̄_k‖)
//!
//! with scales η_j at the zeros of the radial profile on the enclosing radius.
//! Coefficients come from a truncated-SVD collocation fit (the default) or
//! from closed-form projection integrals ([`expand_direct`]).

mod admissibility;
mod direct;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use admissibility::{admissibility_constant, admissibility_profile, Admissibility};
pub use direct::{calibrate, calibration, expand_direct, CALIBRATION};

use crate::error::{Error, Result};
use crate::geometry::{distance, Domain, QuadratureRule};
use crate::linalg::svd;
use crate::special_fn::{radial_profile_zero, KernelKind, KernelSpec};
use crate::Point;

/// Relative singular-value cut of the collocation solve.
pub const FIT_RTOL: f64 = 1e-10;

/// Within-scale orthonormalization: transformed atom m is
/// X_m = Σ_l t[(l, m)] φ(η‖x − x̄_l‖). Dropped atoms have a zero column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleTransform {
    pub t: Vec<Vec<f64>>,
    pub dropped: Vec<usize>,
}

impl ScaleTransform {
    pub fn rank(&self) -> usize {
        self.t.len() - self.dropped.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveletBasis {
    pub dimension: usize,
    pub scales: Vec<f64>,
    pub centers: Vec<Point>,
    pub kernel: KernelKind,
    /// Radius whose profile zeros define the scales.
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ortho: Option<Vec<ScaleTransform>>,
}

impl WaveletBasis {
    pub fn new(
        dimension: usize,
        scales: Vec<f64>,
        centers: Vec<Point>,
        kernel: KernelKind,
        radius: f64,
    ) -> Result<Self> {
        if centers.is_empty() {
            return Err(Error::param("centers", "must be nonempty"));
        }
        if scales.is_empty() {
            return Err(Error::param("scales", "must be nonempty"));
        }
        if scales.iter().any(|s| !(*s > 0.0 && s.is_finite())) || scales.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::param("scales", "must be positive and strictly ascending"));
        }
        if let Some(c) = centers.iter().find(|c| c.len() != dimension) {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                found: c.len(),
            });
        }
        Ok(WaveletBasis {
            dimension,
            scales,
            centers,
            kernel,
            radius,
            ortho: None,
        })
    }

    pub fn atom_count(&self) -> usize {
        self.scales.len() * self.centers.len()
    }

    fn spec(&self, j: usize) -> KernelSpec<f64> {
        KernelSpec::new(self.dimension, self.scales[j], self.kernel).expect("validated scale")
    }

    /// Raw atoms of scale j at x, one per center.
    fn raw(&self, spec: &KernelSpec<f64>, x: &[f64]) -> Vec<f64> {
        self.centers
            .iter()
            .map(|c| {
                let r = distance(x, c);
                match self.kernel {
                    KernelKind::GeneralSolution => spec.general_radial(r).value,
                    KernelKind::ModifiedHelmholtz => spec.eval(r).unwrap_or(f64::INFINITY),
                }
            })
            .collect()
    }

    /// Atom values at x in (scale, center) order, orthonormalized when the
    /// basis carries transforms.
    pub fn atoms(&self, x: &[f64]) -> Vec<f64> {
        let k = self.centers.len();
        let mut out = Vec::with_capacity(self.atom_count());
        for j in 0..self.scales.len() {
            let raw = self.raw(&self.spec(j), x);
            match &self.ortho {
                None => out.extend(raw),
                Some(tr) => {
                    let t = &tr[j].t;
                    out.extend((0..k).map(|m| (0..=m).map(|l| t[l][m] * raw[l]).sum::<f64>()));
                }
            }
        }
        out
    }

    fn design(&self, points: &[Point]) -> DMatrix<f64> {
        let rows: Vec<Vec<f64>> = points.par_iter().map(|x| self.atoms(x)).collect();
        DMatrix::from_fn(points.len(), self.atom_count(), |i, a| rows[i][a])
    }
}

/// Scales from the profile zeros on the domain's enclosing radius.
pub fn build_basis(domain: &Domain, scale_count: usize, centers: Vec<Point>) -> Result<WaveletBasis> {
    build_basis_with_radius(domain.dimension(), domain.enclosing_radius(), scale_count, centers)
}

/// η_j = z_j / radius for the first `scale_count` profile zeros z_j.
pub fn build_basis_with_radius(
    dimension: usize,
    radius: f64,
    scale_count: usize,
    centers: Vec<Point>,
) -> Result<WaveletBasis> {
    if scale_count < 1 {
        return Err(Error::param("scales", "need at least one scale"));
    }
    if !(radius > 0.0) {
        return Err(Error::param("radius", "must be > 0"));
    }
    let scales = (1..=scale_count)
        .map(|j| radial_profile_zero(dimension, j).map(|z| z / radius))
        .collect::<Result<Vec<_>>>()?;
    WaveletBasis::new(dimension, scales, centers, KernelKind::GeneralSolution, radius)
}

/// Quasi-uniform lattice of about `count` points over the bounding box,
/// clipped by the domain indicator.
pub fn lattice_centers(domain: &Domain, count: usize) -> Vec<Point> {
    let n = domain.dimension();
    let (lo, hi) = domain.bounding_box();
    let mut per_axis = (count as f64).powf(1.0 / n as f64).ceil().max(1.0) as usize;
    loop {
        let pts: Vec<Point> = (0..per_axis.pow(n as u32))
            .map(|mut idx| {
                (0..n)
                    .map(|d| {
                        let i = idx % per_axis;
                        idx /= per_axis;
                        lo[d] + (hi[d] - lo[d]) * (i as f64 + 0.5) / per_axis as f64
                    })
                    .collect()
            })
            .filter(|p: &Point| domain.contains(p))
            .collect();
        if pts.len() >= count || per_axis > 4 * count {
            return pts;
        }
        per_axis += 1;
    }
}

/// Gram–Schmidt within each scale under the quadrature inner product.
/// Atoms whose projected norm falls below `drop_tol` times their own norm
/// are dropped.
pub fn gram_schmidt_within_scale(basis: &WaveletBasis, quad: &QuadratureRule, drop_tol: f64) -> Result<WaveletBasis> {
    let k = basis.centers.len();
    let mut transforms = Vec::with_capacity(basis.scales.len());
    for j in 0..basis.scales.len() {
        let spec = basis.spec(j);
        let vals: Vec<Vec<f64>> = quad.nodes.par_iter().map(|x| basis.raw(&spec, x)).collect();
        let gram = DMatrix::from_fn(k, k, |a, b| {
            vals.iter()
                .zip(&quad.weights)
                .map(|(v, w)| w * v[a] * v[b])
                .sum::<f64>()
        });
        let mut t = DMatrix::<f64>::zeros(k, k);
        let mut dropped = Vec::new();
        for m in 0..k {
            let mut v = DVector::<f64>::zeros(k);
            v[m] = 1.0;
            for q in 0..m {
                let col = t.column(q).into_owned();
                let c = (col.transpose() * &gram * &v)[0];
                v -= c * col;
            }
            let norm2 = (v.transpose() * &gram * &v)[0];
            let scale = gram[(m, m)].max(f64::MIN_POSITIVE);
            if norm2 < -1e-8 * scale {
                return Err(Error::Conditioning { scale: j });
            }
            if norm2 <= drop_tol * drop_tol * scale {
                dropped.push(m);
                continue;
            }
            t.set_column(m, &(v / norm2.sqrt()));
        }
        transforms.push(ScaleTransform {
            t: (0..k).map(|l| t.row(l).iter().cloned().collect()).collect(),
            dropped,
        });
    }
    Ok(WaveletBasis {
        ortho: Some(transforms),
        ..basis.clone()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    Collocation,
    Direct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesExpansion {
    pub basis: WaveletBasis,
    /// Constant term, already halved (α_0/2).
    pub a0: f64,
    /// α_jk, indexed [scale][center].
    pub coeffs: Vec<Vec<f64>>,
    pub fit_residual: f64,
    pub method: FitMethod,
    /// Numerical rank of the collocation design matrix.
    #[serde(default)]
    pub rank: usize,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl SeriesExpansion {
    pub(crate) fn from_flat(basis: WaveletBasis, a0: f64, flat: &[f64], method: FitMethod) -> Self {
        let k = basis.centers.len();
        let coeffs = flat.chunks(k).map(|c| c.to_vec()).collect();
        SeriesExpansion {
            basis,
            a0,
            coeffs,
            fit_residual: 0.0,
            method,
            rank: 0,
            warnings: Vec::new(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let atoms = self.basis.atoms(x);
        self.a0
            + self
                .coeffs
                .iter()
                .flatten()
                .zip(&atoms)
                .map(|(c, a)| c * a)
                .sum::<f64>()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("expansion serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("expansion", e.to_string()))
    }
}

pub fn evaluate_series(exp: &SeriesExpansion, points: &[Point]) -> Vec<f64> {
    points.par_iter().map(|x| exp.eval(x)).collect()
}

/// Least-squares fit of `a0 + Σ α_jk X_jk` to the samples.
pub fn expand_collocation(samples: &[(Point, f64)], basis: &WaveletBasis) -> Result<SeriesExpansion> {
    let atoms = basis.atom_count();
    if samples.len() < atoms {
        return Err(Error::TooFewSamples {
            samples: samples.len(),
            atoms,
        });
    }
    if let Some((p, _)) = samples.iter().find(|(p, _)| p.len() != basis.dimension) {
        return Err(Error::DimensionMismatch {
            expected: basis.dimension,
            found: p.len(),
        });
    }
    let points: Vec<Point> = samples.iter().map(|(p, _)| p.clone()).collect();
    let f = DVector::from_iterator(samples.len(), samples.iter().map(|(_, v)| *v));
    let design = basis.design(&points);
    let mut a = DMatrix::from_element(samples.len(), atoms + 1, 1.0);
    a.columns_mut(1, atoms).copy_from(&design);
    // columns scaled to unit norm so the rank cut is scale-free
    let norms: Vec<f64> = (0..=atoms)
        .map(|c| {
            let n = a.column(c).norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    for (c, n) in norms.iter().enumerate() {
        a.column_mut(c).unscale_mut(*n);
    }
    let d = svd(&a);
    let rank = d.rank(FIT_RTOL);
    let x = d.solve(&DMatrix::from_column_slice(f.len(), 1, f.as_slice()), FIT_RTOL);
    let sol: Vec<f64> = (0..=atoms).map(|c| x[(c, 0)] / norms[c]).collect();
    let mut exp = SeriesExpansion::from_flat(basis.clone(), sol[0], &sol[1..], FitMethod::Collocation);
    let fitted = a * x;
    exp.fit_residual = (fitted.column(0) - &f).amax();
    exp.rank = rank;
    if rank < atoms + 1 {
        exp.warnings.push(format!(
            "design matrix rank {rank} < {} unknowns; minimum-norm solution returned",
            atoms + 1
        ));
    }
    Ok(exp)
}

/// Values of labelled functions at the quadrature nodes.
pub struct Sampled {
    pub label: f64,
    pub values: Vec<f64>,
}

/// Largest |⟨u, v⟩| / (‖u‖‖v‖) over pairs whose labels differ by more than
/// `1e-6·max(label)`.
pub fn cross_inner_product(items: &[Sampled], quad: &QuadratureRule) -> f64 {
    let norms: Vec<f64> = items
        .iter()
        .map(|s| {
            quad.sum_values(&s.values.iter().map(|v| v * v).collect::<Vec<_>>())
                .sqrt()
        })
        .collect();
    let mut worst = 0.0_f64;
    for a in 0..items.len() {
        for b in a + 1..items.len() {
            let (la, lb) = (items[a].label, items[b].label);
            if (la - lb).abs() <= 1e-6 * la.abs().max(lb.abs()) || norms[a] == 0.0 || norms[b] == 0.0 {
                continue;
            }
            let ip: f64 = quad
                .weights
                .iter()
                .zip(items[a].values.iter().zip(&items[b].values))
                .map(|(w, (u, v))| w * u * v)
                .sum();
            worst = worst.max(ip.abs() / (norms[a] * norms[b]));
        }
    }
    worst
}

/// Cross-scale orthogonality of a basis: max normalized |∫ X_sp X_tq| over
/// s ≠ t, all center pairs.
pub fn scale_orthogonality_check(basis: &WaveletBasis, quad: &QuadratureRule) -> Result<f64> {
    if basis.scales.len() < 2 {
        return Err(Error::param("scales", "orthogonality check needs at least two scales"));
    }
    let k = basis.centers.len();
    let rows: Vec<Vec<f64>> = quad.nodes.par_iter().map(|x| basis.atoms(x)).collect();
    let items: Vec<Sampled> = (0..basis.atom_count())
        .map(|a| Sampled {
            label: basis.scales[a / k],
            values: rows.iter().map(|r| r[a]).collect(),
        })
        .collect();
    Ok(cross_inner_product(&items, quad))
}

/// Same check over eigenfunctions, grouped by wavenumber.
pub fn eigen_orthogonality_check(pairs: &[crate::bkm_eigen::Eigenpair], quad: &QuadratureRule) -> f64 {
    let items: Vec<Sampled> = pairs
        .iter()
        .map(|p| Sampled {
            label: p.wavenumber,
            values: crate::bkm_eigen::eigenfunction_eval(p, &quad.nodes),
        })
        .collect();
    cross_inner_product(&items, quad)
}

/// Max normalized |∫ X_sp X_sq| between distinct centers of the same scale.
/// Reported only: translation orthogonality does not hold in general.
pub fn same_scale_overlap(basis: &WaveletBasis, quad: &QuadratureRule) -> f64 {
    let k = basis.centers.len();
    let rows: Vec<Vec<f64>> = quad.nodes.par_iter().map(|x| basis.atoms(x)).collect();
    let mut worst = 0.0_f64;
    for j in 0..basis.scales.len() {
        let col = |m: usize| rows.iter().map(move |r| r[j * k + m]);
        let ip = |a: usize, b: usize| -> f64 {
            quad.weights
                .iter()
                .zip(col(a).zip(col(b)))
                .map(|(w, (u, v))| w * u * v)
                .sum()
        };
        for a in 0..k {
            for b in a + 1..k {
                let d = (ip(a, a) * ip(b, b)).sqrt();
                if d > 0.0 {
                    worst = worst.max(ip(a, b).abs() / d);
                }
            }
        }
    }
    worst
}
