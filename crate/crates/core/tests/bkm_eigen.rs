use std::f64::consts::PI;

use helmwave::bkm_eigen::{
    eigen_algebraic, eigen_scan, eigen_scan_with, eigenfunction_eval, Eigenpair, Objective, Representation,
    ScanOptions, Source,
};
use helmwave::geometry::{BoundaryCondition, Domain, Shape};
use proptest::prelude::*;

fn interval(bc: BoundaryCondition) -> Domain {
    Shape::Interval { a: 0.0, b: 1.0 }.build(2, 39, bc).unwrap()
}

fn disk(nodes: usize) -> Domain {
    Shape::Disk { radius: 1.0 }
        .build(nodes, 120, BoundaryCondition::Dirichlet)
        .unwrap()
}

/// J_m by its power series; fine for the arguments used here (≤ 10).
fn j_series(m: u32, x: f64) -> f64 {
    let mut term = (0.5 * x).powi(m as i32) / (1..=m).map(|k| k as f64).product::<f64>();
    let mut sum = term;
    for k in 1..80 {
        term *= -(0.25 * x * x) / (k as f64 * (k + m) as f64);
        sum += term;
    }
    sum
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Dirichlet disk wavenumbers below `top`, with multiplicity, from the series oracle.
fn disk_oracle(top: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for m in 0..12 {
        let f = |x: f64| j_series(m, x);
        let h = 1e-3;
        let mut x = 0.5;
        while x < top {
            if f(x) * f(x + h) < 0.0 {
                let z = bisect(f, x, x + h);
                out.push(z);
                if m > 0 {
                    out.push(z);
                }
            }
            x += h;
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

#[test]
fn interval_dirichlet_wavenumbers() {
    let s = eigen_scan(&interval(BoundaryCondition::Dirichlet), (0.1, 16.0), 400, 1e-10).unwrap();
    let got = s.wavenumbers();
    // 5π ≈ 15.708 also lies inside the range
    assert_eq!(got.len(), 5, "{got:?}");
    for (k, l) in got.iter().enumerate() {
        assert!((l - (k + 1) as f64 * PI).abs() < 1e-6, "{got:?}");
    }
    for p in &s.pairs {
        assert!((p.norm - 1.0).abs() < 1e-8);
        let ends = eigenfunction_eval(p, &[vec![0.0], vec![1.0]]);
        assert!(ends.iter().all(|v| v.abs() <= p.bc_residual + 1e-14));
    }
}

#[test]
fn interval_neumann_has_constant_mode() {
    let s = eigen_scan(&interval(BoundaryCondition::Neumann), (0.1, 10.0), 200, 1e-10).unwrap();
    let got = s.wavenumbers();
    assert_eq!(got.len(), 4, "{got:?}");
    assert_eq!(got[0], 0.0);
    for k in 1..4 {
        assert!((got[k] - k as f64 * PI).abs() < 1e-6, "{got:?}");
    }
}

#[test]
fn interval_robin_wavenumber() {
    // u(0) = 0, u'(1) + u(1) = 0 → tan λ = −λ
    let d = Shape::Interval { a: 0.0, b: 1.0 }
        .build(2, 39, BoundaryCondition::Dirichlet)
        .unwrap();
    let mut nodes = d.boundary().to_vec();
    nodes[1].bc = BoundaryCondition::Robin(1.0);
    let interior = d.interior().to_vec();
    let d = helmwave::geometry::build_domain(1, nodes, interior, Shape::Interval { a: 0.0, b: 1.0 }.indicator(), None)
        .unwrap();
    let s = eigen_scan(&d, (0.5, 6.0), 200, 1e-10).unwrap();
    let oracle = bisect(|x| x.tan() + x, 1.7, 3.0);
    assert!(
        (s.wavenumbers()[0] - oracle).abs() < 1e-6,
        "{:?} vs {oracle}",
        s.wavenumbers()
    );
}

#[test]
fn disk_dirichlet_wavenumbers() {
    let s = eigen_scan(&disk(48), (0.5, 6.0), 400, 1e-10).unwrap();
    let got = s.wavenumbers();
    let oracle = disk_oracle(6.0);
    assert_eq!(got.len(), oracle.len(), "{got:?} vs {oracle:?}");
    for (g, o) in got.iter().zip(&oracle) {
        assert!((g - o).abs() < 1e-3, "{got:?} vs {oracle:?}");
    }
    for p in &s.pairs {
        assert!(p.bc_residual < 1e-4);
    }
}

#[test]
fn disk_range_without_eigenvalues_is_empty() {
    let s = eigen_scan(&disk(48), (0.1, 2.0), 100, 1e-10).unwrap();
    assert!(s.is_empty(), "{:?}", s.wavenumbers());
}

#[test]
fn disk_first_mode_is_radial_bessel() {
    let s = eigen_scan(&disk(48), (2.0, 2.8), 64, 1e-10).unwrap();
    let p = &s.pairs[0];
    let pts: Vec<Vec<f64>> = (0..200)
        .map(|i| {
            let r = 0.95 * ((i as f64 + 0.5) / 200.0).sqrt();
            let t = 2.399_963 * i as f64;
            vec![r * t.cos(), r * t.sin()]
        })
        .collect();
    let v = eigenfunction_eval(p, &pts);
    let o: Vec<f64> = pts
        .iter()
        .map(|x| j_series(0, p.wavenumber * (x[0] * x[0] + x[1] * x[1]).sqrt()))
        .collect();
    let mean = |a: &[f64]| a.iter().sum::<f64>() / a.len() as f64;
    let (mv, mo) = (mean(&v), mean(&o));
    let cov: f64 = v.iter().zip(&o).map(|(a, b)| (a - mv) * (b - mo)).sum();
    let sv: f64 = v.iter().map(|a| (a - mv).powi(2)).sum::<f64>().sqrt();
    let so: f64 = o.iter().map(|b| (b - mo).powi(2)).sum::<f64>().sqrt();
    assert!((cov / (sv * so)).abs() >= 0.999);
}

/// ∇²f + λ²f at x by the fourth-order central stencil.
fn helmholtz_fd(f: impl Fn(&[f64]) -> f64, x: &[f64], lambda: f64, h: f64) -> f64 {
    let mut lap = 0.0;
    for i in 0..x.len() {
        let at = |s: f64| {
            let mut y = x.to_vec();
            y[i] += s * h;
            f(&y)
        };
        lap += (-at(2.0) + 16.0 * at(1.0) - 30.0 * at(0.0) + 16.0 * at(-1.0) - at(-2.0)) / (12.0 * h * h);
    }
    lap + lambda * lambda * f(x)
}

#[test]
fn helmholtz_residual_by_finite_differences() {
    let s = eigen_scan(&disk(48), (2.0, 4.0), 64, 1e-10).unwrap();
    assert_eq!(s.pairs.len(), 3);
    for p in &s.pairs {
        let vmax = (0..100)
            .map(|i| p.eval(&[0.009 * i as f64, 0.0]).abs())
            .fold(0.0, f64::max);
        for i in 0..50 {
            let t = 0.7 * i as f64;
            let r = 0.8 * ((i as f64 + 0.5) / 50.0).sqrt();
            let res = helmholtz_fd(|y| p.eval(y), &[r * t.cos(), r * t.sin()], p.wavenumber, 1e-3).abs();
            assert!(res <= 1e-5 * vmax, "residual {res} vs {vmax}");
        }
    }
    let d = interval(BoundaryCondition::Dirichlet);
    let s = eigen_scan(&d, (1.0, 7.0), 100, 1e-10).unwrap();
    for p in &s.pairs {
        let res = helmholtz_fd(|y| p.eval(y), &[0.37], p.wavenumber, 1e-3).abs();
        assert!(res <= 1e-5 * 2.0_f64.sqrt(), "{res}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn any_coefficients_satisfy_helmholtz(
        beta in prop::collection::vec(-1.0..1.0_f64, 12),
        lambda in 0.5..6.0_f64,
        x in 0.0..0.6_f64,
        y in -0.6..0.0_f64,
    ) {
        let d = disk(12);
        let pair = Eigenpair {
            dimension: 2,
            wavenumber: lambda,
            beta,
            sources: d.boundary().iter().map(Source::from_node).collect(),
            bc_residual: f64::NAN,
            norm: f64::NAN,
            representation: Representation::Bkm,
        };
        let scale = (0..40)
            .map(|i| pair.eval(&[0.02 * i as f64 - 0.4, 0.1]).abs())
            .fold(1e-3, f64::max);
        let res = helmholtz_fd(|p| pair.eval(p), &[x, y], lambda, 1e-3).abs();
        prop_assert!(res <= 1e-5 * scale, "{} vs {}", res, scale);
    }
}

#[test]
fn matrix_sigma_objective_on_interval() {
    let opts = ScanOptions {
        objective: Objective::MatrixSigma,
        ..ScanOptions::default()
    };
    let s = eigen_scan_with(&interval(BoundaryCondition::Dirichlet), (0.1, 10.0), &opts).unwrap();
    let got = s.wavenumbers();
    assert_eq!(got.len(), 3, "{got:?}");
    assert!((got[0] - PI).abs() < 1e-6);
}

#[test]
fn algebraic_interval_first_wavenumber() {
    for delta in [0.05, 0.1, 0.2] {
        let s = eigen_algebraic(&interval(BoundaryCondition::Dirichlet), delta, 39).unwrap();
        let got = s.wavenumbers();
        assert!((got[0] - PI).abs() < 5e-2, "{got:?}");
    }
}

#[test]
fn algebraic_disk_first_wavenumber() {
    for delta in [0.05, 0.1, 0.2] {
        let s = eigen_algebraic(&disk(48), delta, 120).unwrap();
        let got = s.wavenumbers();
        assert!((got[0] - 2.404_826).abs() < 5e-2, "{got:?}");
    }
}
