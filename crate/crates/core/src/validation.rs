//! Self-checking suite: every criterion compares a measured quantity with
//! an independent closed-form or classical reference value.

use std::f64::consts::PI;
use std::fmt;
use std::sync::OnceLock;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::bkm_eigen::{eigen_algebraic, eigen_scan, Spectrum};
use crate::error::Result;
use crate::geometry::{domain_quadrature, BoundaryCondition, Domain, Shape};
use crate::special_fn::{bessel_j, general_solution, KernelSpec};
use crate::transient::{solve_transient, EquationSpec, Family, FitMethod, InitialData, TransientSolution};
use crate::wavelet_series::{
    build_basis, eigen_orthogonality_check, expand_collocation, expand_direct, gram_schmidt_within_scale,
    lattice_centers, CALIBRATION,
};
use crate::{transform, Field};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Fast,
    Full,
}

impl std::str::FromStr for Suite {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Suite::Fast),
            "full" => Ok(Suite::Full),
            _ => Err(crate::Error::param("suite", format!("unknown suite `{s}` (fast|full)"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seconds: f64,
    pub budget: f64,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: measured {:.3e} vs tolerance {:.1e} ({:.2} s of {} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.tolerance,
            self.seconds,
            self.budget
        )?;
        if !self.detail.is_empty() {
            write!(f, "; {}", self.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub criteria: Vec<CriterionResult>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.criteria.iter().all(|c| c.passed)
    }
}

pub const CRITERIA: [(usize, &str, f64); 15] = [
    (1, "sinc identity", 1.0),
    (2, "interval spectrum", 10.0),
    (3, "disk spectrum", 60.0),
    (4, "scheme agreement", 60.0),
    (5, "eigen-orthogonality", 10.0),
    (6, "string wave", 10.0),
    (7, "diffusion decay", 10.0),
    (8, "drumhead", 120.0),
    (9, "energy conservation", 10.0),
    (10, "damped/transmission regression", 5.0),
    (11, "inhomogeneous lift", 10.0),
    (12, "direct vs collocation", 30.0),
    (13, "transform round trip", 120.0),
    (14, "PDE residual", 30.0),
    (15, "Gibbs demo", 30.0),
];

/// Criteria skipped by the fast suite.
pub const SLOW: [usize; 2] = [8, 13];

struct Measured {
    value: f64,
    tolerance: f64,
    passed: bool,
    detail: String,
}

impl Measured {
    fn upper(value: f64, tolerance: f64, detail: String) -> Self {
        Measured {
            value,
            tolerance,
            passed: value <= tolerance,
            detail,
        }
    }
}

fn failure(tolerance: f64, e: crate::Error) -> Measured {
    Measured {
        value: f64::NAN,
        tolerance,
        passed: false,
        detail: format!("error: {e}"),
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Report {
    let criteria = CRITERIA
        .iter()
        .filter(|(id, _, _)| suite == Suite::Full || !SLOW.contains(id))
        .map(|(id, _, _)| run_criterion(*id, seed))
        .collect();
    Report { suite, criteria }
}

pub fn run_criterion(id: usize, seed: u64) -> CriterionResult {
    let (_, name, budget) = CRITERIA[id - 1];
    let start = Instant::now();
    let m = match id {
        1 => sinc_identity(&|n, l, r| general_solution(&KernelSpec::general(n, l)?, r), seed),
        2 => interval_spectrum(),
        3 => disk_spectrum(),
        4 => scheme_agreement(),
        5 => eigen_orthogonality(),
        6 => string_wave(),
        7 => diffusion_decay(),
        8 => drumhead(),
        9 => energy_conservation(),
        10 => regression(seed),
        11 => inhomogeneous_lift(),
        12 => direct_vs_collocation(),
        13 => transform_round_trip(),
        14 => pde_residual(seed),
        15 => gibbs_demo(),
        _ => unreachable!("criterion ids are 1..=15"),
    };
    let seconds = start.elapsed().as_secs_f64();
    let m = m.unwrap_or_else(|e| failure(f64::NAN, e));
    let mut detail = m.detail;
    if seconds > budget {
        detail = format!("{detail} (over the {budget} s budget)");
    }
    CriterionResult {
        id,
        name,
        measured: m.value,
        tolerance: m.tolerance,
        passed: m.passed,
        seconds,
        budget,
        detail,
    }
}

type GeneralSolution = dyn Fn(usize, f64, f64) -> Result<f64>;

/// Sup difference between the three-dimensional general solution and
/// sin(λr)/(4πr) over 10⁴ random (λ, r). The solution routine is injected
/// so the check itself can be exercised against a faulty implementation.
pub fn sinc_identity_with(g: &GeneralSolution, seed: u64) -> Result<(f64, bool)> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..10_000 {
        let l: f64 = rng.gen_range(0.01..20.0);
        let r: f64 = rng.gen_range(1e-3..5.0);
        let oracle = (l * r).sin() / (4.0 * PI * r);
        worst = worst.max((g(3, l, r)? - oracle).abs());
    }
    Ok((worst, worst <= 1e-12))
}

fn sinc_identity(g: &GeneralSolution, seed: u64) -> Result<Measured> {
    let (v, _) = sinc_identity_with(g, seed)?;
    Ok(Measured::upper(v, 1e-12, String::new()))
}

fn unit_interval(bc: BoundaryCondition) -> Result<Domain> {
    Shape::Interval { a: 0.0, b: 1.0 }.build(2, 39, bc)
}

fn unit_disk() -> Result<Domain> {
    Shape::Disk { radius: 1.0 }.build(48, 120, BoundaryCondition::Dirichlet)
}

fn interval_spectrum() -> Result<Measured> {
    let s = eigen_scan(&unit_interval(BoundaryCondition::Dirichlet)?, (0.1, 13.0), 300, 1e-10)?;
    let got = s.wavenumbers();
    if got.len() < 4 {
        return Ok(failure(1e-6, crate::Error::Domain(format!("found only {got:?}"))));
    }
    let err = (0..4).map(|k| (got[k] - (k + 1) as f64 * PI).abs()).fold(0.0, f64::max);
    Ok(Measured::upper(err, 1e-6, format!("{} wavenumbers", got.len())))
}

/// Distinct values of a sorted list, merging repeats closer than `tol`.
fn distinct(v: &[f64], tol: f64) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for x in v {
        if out.last().is_none_or(|l| x - l > tol) {
            out.push(*x);
        }
    }
    out
}

/// Disk spectrum shared by the spectrum and orthogonality criteria.
fn disk_scan() -> Result<(Domain, Spectrum)> {
    static SCAN: OnceLock<Result<(Domain, Spectrum)>> = OnceLock::new();
    SCAN.get_or_init(|| {
        let d = unit_disk()?;
        let s = eigen_scan(&d, (2.0, 5.7), 240, 1e-10)?;
        Ok((d, s))
    })
    .clone()
}

const DISK_ORACLE: [f64; 4] = [2.404_826, 3.831_706, 5.135_622, 5.520_078];

fn disk_spectrum() -> Result<Measured> {
    let (_, s) = disk_scan()?;
    let got = distinct(&s.wavenumbers(), 1e-4);
    if got.len() < 4 {
        return Ok(failure(1e-3, crate::Error::Domain(format!("found only {got:?}"))));
    }
    let err = got
        .iter()
        .zip(DISK_ORACLE)
        .map(|(g, o)| (g - o).abs())
        .fold(0.0, f64::max);
    Ok(Measured::upper(err, 1e-3, format!("{:?}", &got[..4])))
}

fn scheme_agreement() -> Result<Measured> {
    let interval = unit_interval(BoundaryCondition::Dirichlet)?;
    let disk = unit_disk()?;
    let first = |s: &Spectrum| s.wavenumbers().first().copied().unwrap_or(f64::NAN);
    let reference = [
        first(&eigen_scan(&interval, (1.0, 4.0), 60, 1e-10)?),
        first(&eigen_scan(&disk, (2.0, 2.8), 40, 1e-10)?),
    ];
    let mut worst = 0.0_f64;
    for delta in [0.05, 0.1, 0.2] {
        for (d, r) in [(&interval, reference[0]), (&disk, reference[1])] {
            let alg = first(&eigen_algebraic(d, delta, d.interior().len())?);
            worst = worst.max((alg - r).abs());
        }
    }
    Ok(Measured::upper(worst, 5e-2, String::new()))
}

fn eigen_orthogonality() -> Result<Measured> {
    let (d, s) = disk_scan()?;
    let q = domain_quadrature(&d, 5000)?;
    let v = eigen_orthogonality_check(&s.pairs, &q);
    let tol = 1e-6_f64.max(10.0 * q.est_error);
    Ok(Measured::upper(v, tol, format!("{} eigenpairs", s.pairs.len())))
}

fn string_setup(bc: BoundaryCondition) -> Result<(Domain, Spectrum, crate::geometry::QuadratureRule)> {
    let d = unit_interval(bc)?;
    let s = eigen_scan(&d, (0.1, 10.0), 200, 1e-10)?;
    let q = domain_quadrature(&d, 400)?;
    Ok((d, s, q))
}

fn string_solve(eq: &EquationSpec, phi: &InitialData, psi: Option<&InitialData>) -> Result<TransientSolution> {
    let (d, s, q) = string_setup(BoundaryCondition::Dirichlet)?;
    solve_transient(eq, &d, &s, phi, psi, &q, FitMethod::Collocation)
}

fn sine(k: f64) -> InitialData {
    InitialData::Function(Field::new(&format!("sin({k}πx)"), move |x| (k * PI * x[0]).sin()))
}

/// sup over t of |u(0.5, t) − cos(πt)| for the string with φ = sin(πx).
fn string_error(sol: &TransientSolution, offset: &dyn Fn(f64) -> f64) -> f64 {
    [0.25, 0.5, 1.0, 2.0]
        .iter()
        .map(|&t| (sol.value(&[0.5], t) - offset(0.5) - (PI * 0.5).sin() * (PI * t).cos()).abs())
        .fold(0.0, f64::max)
}

fn string_wave() -> Result<Measured> {
    let sol = string_solve(&EquationSpec::homogeneous(Family::Wave { c: 1.0 }), &sine(1.0), None)?;
    Ok(Measured::upper(string_error(&sol, &|_| 0.0), 1e-4, String::new()))
}

fn diffusion_decay() -> Result<Measured> {
    let sol = string_solve(
        &EquationSpec::homogeneous(Family::Diffusion { h: 1.0 }),
        &sine(1.0),
        None,
    )?;
    let value_err = (sol.value(&[0.5], 0.1) - 0.372_708).abs();
    let sup = |t: f64| {
        (0..=100)
            .map(|i| sol.value(&[i as f64 / 100.0], t).abs())
            .fold(0.0, f64::max)
    };
    let rate = (sup(0.5).ln() - sup(0.05).ln()) / 0.45;
    let rate_err = (rate + PI * PI).abs() / (PI * PI);
    Ok(Measured {
        value: value_err,
        tolerance: 1e-4,
        passed: value_err <= 1e-4 && rate_err <= 5e-3,
        detail: format!("decay rate {rate:.6} (relative error {rate_err:.2e}, tolerance 5e-3)"),
    })
}

fn drumhead() -> Result<Measured> {
    let j01 = crate::special_fn::bessel_j_zero(0.0, 1)?;
    let d = unit_disk()?;
    let s = eigen_scan(&d, (2.0, 6.0), 120, 1e-10)?;
    let q = domain_quadrature(&d, 3000)?;
    let phi = InitialData::Function(Field::new("J0(j01 r)", move |x| {
        bessel_j(0.0, j01 * x.iter().map(|v| v * v).sum::<f64>().sqrt()).unwrap_or(f64::NAN)
    }));
    let eq = EquationSpec::homogeneous(Family::Wave { c: 1.0 });
    let sol = solve_transient(&eq, &d, &s, &phi, None, &q, FitMethod::Collocation)?;
    let err = [0.5, 1.0]
        .iter()
        .map(|&t| (sol.value(&[0.0, 0.0], t) - (j01 * t).cos()).abs())
        .fold(0.0, f64::max);
    Ok(Measured::upper(err, 1e-3, String::new()))
}

fn energy_conservation() -> Result<Measured> {
    let (_, _, q) = string_setup(BoundaryCondition::Dirichlet)?;
    let phi = InitialData::Function(Field::new("φ", |x| (PI * x[0]).sin() - 0.4 * (2.0 * PI * x[0]).sin()));
    let sol = string_solve(
        &EquationSpec::homogeneous(Family::Wave { c: 1.0 }),
        &phi,
        Some(&sine(3.0)),
    )?;
    let e0 = sol.energy(&q, 0.0);
    let drift = (1..=40)
        .map(|i| (sol.energy(&q, 0.05 * i as f64) - e0).abs() / e0)
        .fold(0.0, f64::max);
    Ok(Measured::upper(drift, 1e-2, format!("E(0) = {e0:.6}")))
}

fn regression(seed: u64) -> Result<Measured> {
    let phi = InitialData::Function(Field::new("x(1−x)", |x| x[0] * (1.0 - x[0])));
    let psi = sine(2.0);
    let pairs = [
        (Family::Wave { c: 1.3 }, Family::DampedWave { c: 1.3, damping: 0.0 }),
        (
            Family::DampedWave { c: 1.3, damping: 0.7 },
            Family::TransmissionLine {
                c: 1.3,
                damping: 0.7,
                s: 0.0,
            },
        ),
    ];
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for (a, b) in pairs {
        let sa = string_solve(&EquationSpec::homogeneous(a), &phi, Some(&psi))?;
        let sb = string_solve(&EquationSpec::homogeneous(b), &phi, Some(&psi))?;
        for _ in 0..100 {
            let (x, t) = (rng.gen::<f64>(), 3.0 * rng.gen::<f64>());
            worst = worst.max((sa.value(&[x], t) - sb.value(&[x], t)).abs());
        }
    }
    Ok(Measured::upper(worst, 1e-12, String::new()))
}

fn inhomogeneous_lift() -> Result<Measured> {
    let mut eq = EquationSpec::homogeneous(Family::Wave { c: 1.0 });
    eq.forcing = Some(Field::new("−π²sin(πx)", |x| -PI * PI * (PI * x[0]).sin()));
    // φ = w + sin(πx) leaves the string problem after shifting
    let phi = InitialData::Function(Field::new("2sin(πx)", |x| 2.0 * (PI * x[0]).sin()));
    let sol = string_solve(&eq, &phi, None)?;
    let w = sol
        .steady
        .as_ref()
        .ok_or(crate::Error::Domain("no steady part".into()))?;
    let lift_err = (0..=50)
        .map(|i| {
            let x = i as f64 / 50.0;
            (w.eval(&[x]) - (PI * x).sin()).abs()
        })
        .fold(0.0, f64::max);
    let shifted = string_error(&sol, &|x| (PI * x).sin());
    Ok(Measured {
        value: lift_err,
        tolerance: 1e-4,
        passed: lift_err <= 1e-4 && shifted <= 1e-4,
        detail: format!("shifted string error {shifted:.3e} (tolerance 1e-4)"),
    })
}

fn direct_vs_collocation() -> Result<Measured> {
    let d = Shape::Disk { radius: 1.0 }.build(64, 80, BoundaryCondition::Dirichlet)?;
    let quad = domain_quadrature(&d, 40_000)?;
    let basis = build_basis(&d, 3, vec![vec![0.0, 0.0]])?;
    let ortho = gram_schmidt_within_scale(&basis, &quad, 1e-10)?;
    let etas = basis.scales.clone();
    let f = move |x: &[f64]| {
        let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let s = |k: usize| general_solution(&KernelSpec::general(2, etas[k]).unwrap(), r).unwrap();
        s(0) - 0.7 * s(1) + 0.2 * s(2)
    };
    let direct = expand_direct(&f, &ortho, &d, &quad)?;
    let samples: Vec<_> = domain_quadrature(&d, 600)?
        .nodes
        .into_iter()
        .map(|x| {
            let v = f(&x);
            (x, v)
        })
        .collect();
    let coll = expand_collocation(&samples, &ortho)?;
    let scale = coll.coeffs.iter().flatten().fold(0.0_f64, |m, a| m.max(a.abs()));
    let diff = direct
        .coeffs
        .iter()
        .flatten()
        .zip(coll.coeffs.iter().flatten())
        .map(|(a, b)| (a - b).abs() / scale)
        .fold(0.0, f64::max);
    let pinned = CALIBRATION == [(1, 1.0, 0.5), (2, 1.0, 1.0), (3, 1.0, 1.0)];
    Ok(Measured {
        value: diff,
        tolerance: 1e-3,
        passed: diff <= 1e-3 && pinned,
        detail: format!("calibration table {}", if pinned { "pinned" } else { "changed" }),
    })
}

fn transform_round_trip() -> Result<Measured> {
    let lambdas = transform::log_grid(0.1, 40.0, 128)?;
    let centers = transform::uniform_grid(-0.5, 1.5, 256);
    let points = transform::uniform_grid(0.0, 1.0, 101);
    let f = Field::new("exp(−16(x−0.5)²)", |x| (-16.0 * (x[0] - 0.5).powi(2)).exp());
    let rt = transform::round_trip(&f, &lambdas, &centers, &transform::Region::Interval(-0.5, 1.5), &points)?;
    let cg = crate::wavelet_series::admissibility_constant(&KernelSpec::modified(1, 1.0)?)?;
    let cg_ok = cg.converged && cg.value > 0.0 && cg.value.is_finite();
    Ok(Measured {
        value: rt.sup_error,
        tolerance: 0.05,
        passed: rt.sup_error <= 0.05 && cg_ok,
        detail: format!("C_g = {:.6}, renormalization {:.4}", cg.value, rt.renormalization),
    })
}

fn pde_residual(seed: u64) -> Result<Measured> {
    let (d, s, q) = string_setup(BoundaryCondition::Dirichlet)?;
    let phi = InitialData::Function(Field::new("φ", |x| x[0] * (1.0 - x[0]) * (1.0 + x[0])));
    let psi = sine(2.0);
    let families = [
        Family::Wave { c: 1.2 },
        Family::Diffusion { h: 0.7 },
        Family::DampedWave { c: 1.0, damping: 3.0 },
        Family::TransmissionLine {
            c: 1.0,
            damping: 0.5,
            s: 2.0,
        },
    ];
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for fam in families {
        let mut eq = EquationSpec::homogeneous(fam);
        eq.dirichlet = Some(Field::new("0.2 + x", |x| 0.2 + x[0]));
        let psi = (!fam.is_first_order()).then_some(&psi);
        let sol = solve_transient(&eq, &d, &s, &phi, psi, &q, FitMethod::Collocation)?;
        for _ in 0..30 {
            let (x, t) = (0.05 + 0.9 * rng.gen::<f64>(), 0.01 + 2.0 * rng.gen::<f64>());
            worst = worst.max(relative_residual(&sol, x, t));
        }
    }
    Ok(Measured::upper(worst, 1e-4, String::new()))
}

/// Fourth-order finite-difference residual of the governing operator at
/// (x, t) in one dimension, relative to the largest term; the steady lift
/// is harmonic (or solves ∇²w = μw) so the forcing term vanishes.
fn relative_residual(sol: &TransientSolution, x: f64, t: f64) -> f64 {
    let h = 1e-3;
    let d2 = |g: &dyn Fn(f64) -> f64| {
        (-g(2.0 * h) + 16.0 * g(h) - 30.0 * g(0.0) + 16.0 * g(-h) - g(-2.0 * h)) / (12.0 * h * h)
    };
    let d1 = |g: &dyn Fn(f64) -> f64| (-g(2.0 * h) + 8.0 * g(h) - 8.0 * g(-h) + g(-2.0 * h)) / (12.0 * h);
    let u = sol.value(&[x], t);
    let ut = d1(&|s| sol.value(&[x], t + s));
    let utt = d2(&|s| sol.value(&[x], t + s));
    let lap = d2(&|s| sol.value(&[x + s], t));
    let fam = sol.equation.family;
    let scale = [u, ut, utt, lap].iter().map(|v| v.abs()).fold(1e-3, f64::max);
    fam.residual(u, ut, utt, lap, 0.0).abs() / scale
}

#[derive(Debug, Clone, Serialize)]
pub struct GibbsReport {
    /// (max − 1)/jump of the truncated Fourier series of the unit step.
    pub fourier_overshoot: f64,
    /// Same for the collocated RBF-wavelet series.
    pub wavelet_overshoot: f64,
    pub reference: f64,
}

/// Overshoot of a truncated Fourier series (200 odd harmonics) and of an
/// RBF-wavelet collocation fit for sign(x); the jump is 2.
pub fn gibbs_demo_report() -> Result<GibbsReport> {
    let fourier = |x: f64| {
        (0..200)
            .map(|k| ((2 * k + 1) as f64 * x).sin() / (2 * k + 1) as f64)
            .sum::<f64>()
            * 4.0
            / PI
    };
    let peak = (1..4000)
        .map(|i| fourier(0.05 * i as f64 / 4000.0))
        .fold(f64::MIN, f64::max);
    let d = Shape::Interval { a: -1.0, b: 1.0 }.build(2, 40, BoundaryCondition::Dirichlet)?;
    let basis = build_basis(&d, 8, lattice_centers(&d, 9))?;
    let samples: Vec<_> = (0..400)
        .map(|i| {
            let x = -1.0 + (i as f64 + 0.5) / 200.0;
            (vec![x], x.signum())
        })
        .collect();
    let fit = expand_collocation(&samples, &basis)?;
    let wpeak = (0..2000)
        .map(|i| fit.eval(&[i as f64 / 2000.0]))
        .fold(f64::MIN, f64::max);
    Ok(GibbsReport {
        fourier_overshoot: (peak - 1.0) / 2.0,
        wavelet_overshoot: (wpeak - 1.0) / 2.0,
        reference: 0.0895,
    })
}

fn gibbs_demo() -> Result<Measured> {
    let r = gibbs_demo_report()?;
    let rel = (r.fourier_overshoot - r.reference).abs() / r.reference;
    Ok(Measured::upper(
        rel,
        0.1,
        format!(
            "Fourier overshoot {:.4}·jump, RBF-wavelet overshoot {:.4}·jump",
            r.fourier_overshoot, r.wavelet_overshoot
        ),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbed_general_solution_fails_the_sinc_check() {
        let good = |n, l, r| general_solution(&KernelSpec::general(n, l)?, r);
        assert!(sinc_identity_with(&good, 1).unwrap().1);
        let bad = |n, l, r| general_solution(&KernelSpec::general(n, l)?, r).map(|v| v * (1.0 + 1e-9));
        assert!(!sinc_identity_with(&bad, 1).unwrap().1);
    }

    #[test]
    fn suite_names() {
        assert_eq!("fast".parse::<Suite>().unwrap(), Suite::Fast);
        assert!("quick".parse::<Suite>().is_err());
    }
}
