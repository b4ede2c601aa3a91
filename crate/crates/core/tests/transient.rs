use std::f64::consts::PI;

use helmwave::bkm_eigen::{eigen_scan, Spectrum};
use helmwave::geometry::{domain_quadrature, BoundaryCondition, Domain, QuadratureRule, Shape};
use helmwave::transient::{
    evaluate_solution, field_csv, fit_initial_conditions, lift_inhomogeneous, solve_transient, EquationSpec, Family,
    FitMethod, InitialData, TransientSolution,
};
use helmwave::{Error, Field};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn string(bc: BoundaryCondition) -> (Domain, Spectrum, QuadratureRule) {
    let d = Shape::Interval { a: 0.0, b: 1.0 }.build(2, 39, bc).unwrap();
    let s = eigen_scan(&d, (0.1, 10.0), 200, 1e-10).unwrap();
    let q = domain_quadrature(&d, 400).unwrap();
    (d, s, q)
}

fn sine(k: f64) -> InitialData {
    InitialData::Function(Field::new("sin", move |x| (k * PI * x[0]).sin()))
}

fn solve(family: Family, phi: &InitialData, psi: Option<&InitialData>) -> TransientSolution {
    let (d, s, q) = string(BoundaryCondition::Dirichlet);
    solve_transient(
        &EquationSpec::homogeneous(family),
        &d,
        &s,
        phi,
        psi,
        &q,
        FitMethod::Collocation,
    )
    .unwrap()
}

#[test]
fn string_wave_matches_separation_of_variables() {
    let sol = solve(Family::Wave { c: 1.0 }, &sine(1.0), None);
    assert!((sol.value(&[0.5], 1.0) + 1.0).abs() < 1e-4);
    for t in [0.25, 0.5, 1.0, 2.0] {
        assert!((sol.value(&[0.5], t) - (PI * t).cos()).abs() < 1e-4, "t={t}");
        let x = 0.23;
        assert!((sol.value(&[x], t) - (PI * x).sin() * (PI * t).cos()).abs() < 1e-4);
    }
}

#[test]
fn diffusion_decays_at_the_slowest_rate() {
    let sol = solve(Family::Diffusion { h: 1.0 }, &sine(1.0), None);
    assert!((sol.value(&[0.5], 0.1) - 0.372_708).abs() < 1e-4);
    let sup = |t: f64| {
        (0..=50)
            .map(|i| sol.value(&[i as f64 / 50.0], t).abs())
            .fold(0.0, f64::max)
    };
    let rate = (sup(0.5).ln() - sup(0.05).ln()) / 0.45;
    assert!((rate + PI * PI).abs() <= 0.005 * PI * PI, "{rate}");
    let mut prev = f64::INFINITY;
    for i in 0..40 {
        let v = sup(0.05 * i as f64);
        assert!(v <= prev);
        prev = v;
    }
}

#[test]
fn sine_data_does_not_leak() {
    let (_, s, q) = string(BoundaryCondition::Dirichlet);
    assert_eq!(s.pairs.len(), 3);
    let amp = fit_initial_conditions(
        &Family::Wave { c: 1.0 },
        &sine(1.0),
        None,
        &s,
        &q,
        FitMethod::Collocation,
    )
    .unwrap();
    let lead = amp.a[0].abs();
    assert!(amp.a[1..].iter().all(|a| a.abs() <= 1e-6 * lead), "{:?}", amp.a);
    assert!(amp.b.iter().all(|b| *b == 0.0));
    assert!(amp.diagnostics.energy_captured > 0.999_999);
    assert!(amp.diagnostics.warnings.is_empty());
}

#[test]
fn zero_data_gives_zero_amplitudes() {
    let (_, s, q) = string(BoundaryCondition::Dirichlet);
    let z = InitialData::zero();
    let amp = fit_initial_conditions(&Family::Wave { c: 1.0 }, &z, Some(&z), &s, &q, FitMethod::Direct).unwrap();
    assert!(amp.a.iter().chain(&amp.b).all(|v| *v == 0.0));
    assert_eq!((amp.a0, amp.b0), (0.0, 0.0));
}

#[test]
fn velocity_amplitude_divides_out_the_frequency() {
    let (_, s, q) = string(BoundaryCondition::Dirichlet);
    let fam = Family::Wave { c: 2.0 };
    let amp = fit_initial_conditions(&fam, &InitialData::zero(), Some(&sine(1.0)), &s, &q, FitMethod::Direct).unwrap();
    // mode π has unit-norm eigenfunction ±√2 sin(πx)
    let v = s.pairs[0].eval(&[0.5]);
    assert!((amp.b[0] * v - 1.0 / (2.0 * PI)).abs() < 1e-8, "{}", amp.b[0] * v);
    let sol = solve(fam, &InitialData::zero(), Some(&sine(1.0)));
    for (x, t) in [(0.3, 0.2), (0.5, 0.9)] {
        let oracle = (PI * x).sin() * (2.0 * PI * t).sin() / (2.0 * PI);
        assert!((sol.value(&[x], t) - oracle).abs() < 1e-6);
    }
}

#[test]
fn diffusion_rejects_initial_velocity() {
    let (_, s, q) = string(BoundaryCondition::Dirichlet);
    let r = fit_initial_conditions(
        &Family::Diffusion { h: 1.0 },
        &sine(1.0),
        Some(&sine(1.0)),
        &s,
        &q,
        FitMethod::Collocation,
    );
    assert!(matches!(r, Err(Error::FirstOrderVelocity)));
}

#[test]
fn empty_spectrum_is_an_error() {
    let (_, mut s, q) = string(BoundaryCondition::Dirichlet);
    s.pairs.clear();
    let r = fit_initial_conditions(
        &Family::Wave { c: 1.0 },
        &sine(1.0),
        None,
        &s,
        &q,
        FitMethod::Collocation,
    );
    assert!(r.is_err());
}

#[test]
fn direct_needs_a_function() {
    let (_, s, q) = string(BoundaryCondition::Dirichlet);
    let samples = InitialData::Samples((0..20).map(|i| (vec![i as f64 / 19.0], 0.0)).collect());
    let r = fit_initial_conditions(&Family::Wave { c: 1.0 }, &samples, None, &s, &q, FitMethod::Direct);
    assert!(r.is_err());
}

#[test]
fn samples_and_functions_agree() {
    let (_, s, q) = string(BoundaryCondition::Dirichlet);
    let samples = InitialData::Samples(
        (0..30)
            .map(|i| {
                let x = (i as f64 + 0.5) / 30.0;
                (vec![x], (PI * x).sin() - 0.3 * (3.0 * PI * x).sin())
            })
            .collect(),
    );
    let f = InitialData::Function(Field::new("f", |x| (PI * x[0]).sin() - 0.3 * (3.0 * PI * x[0]).sin()));
    let fam = Family::Wave { c: 1.0 };
    let a = fit_initial_conditions(&fam, &samples, None, &s, &q, FitMethod::Collocation).unwrap();
    let b = fit_initial_conditions(&fam, &f, None, &s, &q, FitMethod::Direct).unwrap();
    for (x, y) in a.a.iter().zip(&b.a) {
        assert!((x - y).abs() < 1e-8, "{:?} vs {:?}", a.a, b.a);
    }
}

#[test]
fn truncated_spectrum_warns() {
    let (_, s, q) = string(BoundaryCondition::Dirichlet);
    let amp = fit_initial_conditions(
        &Family::Wave { c: 1.0 },
        &sine(5.0),
        None,
        &s,
        &q,
        FitMethod::Collocation,
    )
    .unwrap();
    assert!(amp.diagnostics.energy_captured < 0.99);
    assert!(!amp.diagnostics.warnings.is_empty());
}

#[test]
fn negative_times_are_rejected() {
    let sol = solve(Family::Wave { c: 1.0 }, &sine(1.0), None);
    assert!(evaluate_solution(&sol, &[vec![0.5]], &[0.0, -1.0]).is_err());
}

#[test]
fn initial_state_reproduces_the_data() {
    let phi = InitialData::Function(Field::new("p", |x| (PI * x[0]).sin() + 0.5 * (2.0 * PI * x[0]).sin()));
    let psi = sine(3.0);
    let sol = solve(Family::DampedWave { c: 1.3, damping: 0.4 }, &phi, Some(&psi));
    let tol = sol
        .amplitudes
        .diagnostics
        .fit_residual
        .max(sol.amplitudes.diagnostics.velocity_residual)
        + 1e-12;
    let h = 1e-4;
    for i in 0..11 {
        let x = [i as f64 / 10.0];
        let expect = (PI * x[0]).sin() + 0.5 * (2.0 * PI * x[0]).sin();
        assert!((sol.value(&x, 0.0) - expect).abs() <= tol);
        let u = |t: f64| sol.value(&x, t);
        let ut = (-u(2.0 * h) + 8.0 * u(h) - 8.0 * u(-h) + u(-2.0 * h)) / (12.0 * h);
        assert!((ut - (3.0 * PI * x[0]).sin()).abs() <= tol + 1e-8, "{ut}");
    }
}

#[test]
fn energy_is_conserved_for_the_string() {
    let (_, _, q) = string(BoundaryCondition::Dirichlet);
    let phi = InitialData::Function(Field::new("p", |x| (PI * x[0]).sin() - 0.4 * (2.0 * PI * x[0]).sin()));
    let sol = solve(Family::Wave { c: 1.0 }, &phi, Some(&sine(3.0)));
    let e0 = sol.energy(&q, 0.0);
    for i in 1..=20 {
        let e = sol.energy(&q, 0.1 * i as f64);
        assert!((e - e0).abs() <= 0.01 * e0, "{e} vs {e0}");
    }
}

#[test]
fn reductions_match_simpler_families() {
    let phi = InitialData::Function(Field::new("p", |x| x[0] * (1.0 - x[0])));
    let psi = sine(2.0);
    let pairs = [
        (Family::Wave { c: 1.7 }, Family::DampedWave { c: 1.7, damping: 0.0 }),
        (
            Family::DampedWave { c: 1.7, damping: 0.8 },
            Family::TransmissionLine {
                c: 1.7,
                damping: 0.8,
                s: 0.0,
            },
        ),
    ];
    let mut rng = rand::rngs::StdRng::seed_from_u64(42);
    for (a, b) in pairs {
        let (sa, sb) = (solve(a, &phi, Some(&psi)), solve(b, &phi, Some(&psi)));
        for _ in 0..100 {
            let (x, t) = (rng.gen::<f64>(), 3.0 * rng.gen::<f64>());
            let (u, v) = (sa.value(&[x], t), sb.value(&[x], t));
            assert!((u - v).abs() <= 1e-12, "{a:?}: {u} vs {v}");
        }
    }
}

#[test]
fn neumann_constant_mode_carries_the_mean() {
    let (d, s, q) = string(BoundaryCondition::Neumann);
    assert_eq!(s.pairs[0].wavenumber, 0.0);
    let one = InitialData::Function(Field::new("1", |_| 1.0));
    let eq = EquationSpec::homogeneous(Family::Wave { c: 1.0 });
    let sol = solve_transient(&eq, &d, &s, &one, Some(&one), &q, FitMethod::Collocation).unwrap();
    assert!((sol.amplitudes.a0 - 2.0).abs() < 1e-10 && (sol.amplitudes.b0 - 2.0).abs() < 1e-10);
    for t in [0.0, 0.7, 2.5] {
        assert!((sol.value(&[0.3], t) - (1.0 + t)).abs() < 1e-10);
    }
    let dir = solve(Family::Wave { c: 1.0 }, &one, None);
    assert_eq!((dir.amplitudes.a0, dir.amplitudes.b0), (0.0, 0.0));
}

#[test]
fn drumhead_oscillates_at_the_first_bessel_zero() {
    let j01 = 2.404_825_557_695_773;
    let d = Shape::Disk { radius: 1.0 }
        .build(48, 120, BoundaryCondition::Dirichlet)
        .unwrap();
    let s = eigen_scan(&d, (2.0, 6.0), 120, 1e-10).unwrap();
    let q = domain_quadrature(&d, 3000).unwrap();
    let phi = InitialData::Function(Field::new("J0", move |x| {
        helmwave::special_fn::bessel_j(0.0, j01 * (x[0] * x[0] + x[1] * x[1]).sqrt()).unwrap()
    }));
    let eq = EquationSpec::homogeneous(Family::Wave { c: 1.0 });
    let sol = solve_transient(&eq, &d, &s, &phi, None, &q, FitMethod::Collocation).unwrap();
    for t in [0.5, 1.0] {
        let u = sol.value(&[0.0, 0.0], t);
        assert!((u - (j01 * t).cos()).abs() < 1e-3, "t={t}: {u}");
    }
}

#[test]
fn forcing_lift_solves_the_steady_problem() {
    let (d, s, q) = string(BoundaryCondition::Dirichlet);
    let mut eq = EquationSpec::homogeneous(Family::Wave { c: 1.0 });
    eq.forcing = Some(Field::new("f", |x| -PI * PI * (PI * x[0]).sin()));
    let w = lift_inhomogeneous(&eq, &d, &s, &q).unwrap().unwrap();
    for i in 0..=20 {
        let x = i as f64 / 20.0;
        assert!((w.eval(&[x]) - (PI * x).sin()).abs() < 1e-4);
    }
    // shifted problem: u = w + (φ − w) evolving as a string
    let phi = InitialData::Function(Field::new("p", |x| (PI * x[0]).sin() + (2.0 * PI * x[0]).sin()));
    let sol = solve_transient(&eq, &d, &s, &phi, None, &q, FitMethod::Collocation).unwrap();
    for t in [0.25, 0.5, 1.0, 2.0] {
        let x = 0.3;
        let oracle = (PI * x).sin() + (2.0 * PI * x).sin() * (2.0 * PI * t).cos();
        assert!((sol.value(&[x], t) - oracle).abs() < 1e-4);
    }
}

#[test]
fn constant_dirichlet_data_lifts_to_a_constant() {
    let (d, s, q) = string(BoundaryCondition::Dirichlet);
    let mut eq = EquationSpec::homogeneous(Family::Diffusion { h: 1.0 });
    eq.dirichlet = Some(Field::new("1", |_| 1.0));
    let w = lift_inhomogeneous(&eq, &d, &s, &q).unwrap().unwrap();
    for x in [0.0, 0.37, 1.0] {
        assert!((w.eval(&[x]) - 1.0).abs() < 1e-10);
    }
    let sol = solve_transient(&eq, &d, &s, &sine(1.0), None, &q, FitMethod::Collocation).unwrap();
    // φ̃ = sin(πx) − 1 needs many modes; only check the long-time limit
    assert!((sol.value(&[0.5], 5.0) - 1.0).abs() < 1e-6);
    let none = EquationSpec::homogeneous(Family::Wave { c: 1.0 });
    assert!(lift_inhomogeneous(&none, &d, &s, &q).unwrap().is_none());
}

#[test]
fn linear_boundary_data_lifts_exactly() {
    let (d, s, q) = string(BoundaryCondition::Dirichlet);
    let mut eq = EquationSpec::homogeneous(Family::Wave { c: 1.0 });
    eq.dirichlet = Some(Field::new("D", |x| 2.0 - 3.0 * x[0]));
    let w = lift_inhomogeneous(&eq, &d, &s, &q).unwrap().unwrap();
    for x in [0.0, 0.5, 0.9] {
        assert!((w.eval(&[x]) - (2.0 - 3.0 * x)).abs() < 1e-9);
    }
}

#[test]
fn neumann_forcing_without_mean_zero_resonates() {
    let (d, s, q) = string(BoundaryCondition::Neumann);
    let mut eq = EquationSpec::homogeneous(Family::Wave { c: 1.0 });
    eq.forcing = Some(Field::new("1", |_| 1.0));
    assert!(matches!(lift_inhomogeneous(&eq, &d, &s, &q), Err(Error::Resonance(_))));
}

/// Governing-operator residual relative to the size of its terms, by
/// fourth-order central differences with step 1e-3.
fn pde_residual(sol: &TransientSolution, f: &dyn Fn(&[f64]) -> f64, x: &[f64], t: f64) -> f64 {
    let h = 1e-3;
    let d2 = |g: &dyn Fn(f64) -> f64| {
        (-g(2.0 * h) + 16.0 * g(h) - 30.0 * g(0.0) + 16.0 * g(-h) - g(-2.0 * h)) / (12.0 * h * h)
    };
    let d1 = |g: &dyn Fn(f64) -> f64| (-g(2.0 * h) + 8.0 * g(h) - 8.0 * g(-h) + g(-2.0 * h)) / (12.0 * h);
    let ut = d1(&|s| sol.value(x, t + s));
    let utt = d2(&|s| sol.value(x, t + s));
    let lap: f64 = (0..x.len())
        .map(|i| {
            d2(&|s| {
                let mut y = x.to_vec();
                y[i] += s;
                sol.value(&y, t)
            })
        })
        .sum();
    let u = sol.value(x, t);
    let fam = sol.equation.family;
    let scale = [u, ut, utt, lap, f(x)].iter().map(|v| v.abs()).fold(1e-3, f64::max);
    fam.residual(u, ut, utt, lap, f(x)).abs() / scale
}

#[test]
fn every_family_satisfies_its_pde() {
    let (d, s, q) = string(BoundaryCondition::Dirichlet);
    let phi = InitialData::Function(Field::new("p", |x| x[0] * (1.0 - x[0]) * (1.0 + x[0])));
    let psi = sine(2.0);
    let forcing = |x: &[f64]| (PI * x[0]).sin() + 0.5;
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
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    for fam in families {
        let mut eq = EquationSpec::homogeneous(fam);
        eq.forcing = Some(Field::new("f", forcing));
        eq.dirichlet = Some(Field::new("D", |x| 0.2 + x[0]));
        let psi = (!fam.is_first_order()).then_some(&psi);
        let sol = solve_transient(&eq, &d, &s, &phi, psi, &q, FitMethod::Collocation).unwrap();
        let fs = |x: &[f64]| {
            // the lift solves the steady problem for the projected forcing
            let w = sol.steady.as_ref().unwrap();
            let (mu, h) = (fam.shift(), 1e-3);
            let g = |s: f64| w.eval(&[x[0] + s]);
            (-g(2.0 * h) + 16.0 * g(h) - 30.0 * g(0.0) + 16.0 * g(-h) - g(-2.0 * h)) / (12.0 * h * h) - mu * g(0.0)
        };
        for _ in 0..30 {
            let (x, t) = (0.05 + 0.9 * rng.gen::<f64>(), 0.01 + 2.0 * rng.gen::<f64>());
            let r = pde_residual(&sol, &fs, &[x], t);
            assert!(r <= 1e-4, "{fam:?} at ({x}, {t}): {r}");
        }
        // the projected forcing is close to the requested one
        let w = sol.steady.as_ref().unwrap();
        assert!(w.forcing_captured > 0.9, "{fam:?}: {}", w.forcing_captured);
    }
}

#[test]
fn field_csv_layout() {
    let text = field_csv(
        &[vec![0.0, 1.0], vec![2.0, 3.0]],
        &[0.0, 0.5],
        &[vec![1.0, 2.0], vec![3.0, 4.0]],
    )
    .unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x1,x2,t,u");
    assert_eq!(lines.len(), 5);
    let row: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row, [0.0, 1.0, 0.5, 2.0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn superposition(a in -2.0..2.0_f64, b in -2.0..2.0_f64, x in 0.0..1.0_f64, t in 0.0..3.0_f64) {
        let p1 = move |x: &[f64]| a * x[0] * (1.0 - x[0]);
        let p2 = move |x: &[f64]| b * (2.0 * PI * x[0]).sin();
        let fam = Family::DampedWave { c: 1.0, damping: 0.3 };
        let f1 = InitialData::Function(Field::new("p1", p1));
        let f2 = InitialData::Function(Field::new("p2", p2));
        let f12 = InitialData::Function(Field::new("p12", move |x| p1(x) + p2(x)));
        let u1 = solve(fam, &f1, None).value(&[x], t);
        let u2 = solve(fam, &f2, Some(&f1)).value(&[x], t);
        let u12 = solve(fam, &f12, Some(&f1)).value(&[x], t);
        prop_assert!((u12 - u1 - u2).abs() <= 1e-10);
    }
}
