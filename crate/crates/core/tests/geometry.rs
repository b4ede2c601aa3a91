use std::f64::consts::PI;

use helmwave::geometry::{
    domain_quadrature, pairwise_distances, unit_ball_volume, unit_sphere_area, BoundaryCondition, Shape,
};
use proptest::prelude::*;

#[test]
fn quadrature_moments_on_builtin_shapes() {
    let disk = Shape::Disk { radius: 1.0 }
        .build(48, 60, BoundaryCondition::Dirichlet)
        .unwrap();
    let q = domain_quadrature(&disk, 4000).unwrap();
    assert!((q.measure() - PI).abs() < 1e-2 * PI, "{}", q.measure());
    assert!((q.integrate(|x| x[0] * x[0] + x[1] * x[1]) - PI / 2.0).abs() < 2e-2);
    assert!(q.integrate(|x| x[0]).abs() < 1e-2);

    let rect = Shape::Rectangle {
        lower: [0.0, 0.0],
        upper: [2.0, 1.0],
    }
    .build(40, 40, BoundaryCondition::Neumann)
    .unwrap();
    let q = domain_quadrature(&rect, 2000).unwrap();
    assert!((q.measure() - 2.0).abs() < 1e-2);
    assert!((q.integrate(|x| x[0] * x[1]) - 1.0).abs() < 1e-2);

    let seg = Shape::Interval { a: -1.0, b: 2.0 }
        .build(2, 10, BoundaryCondition::Dirichlet)
        .unwrap();
    let q = domain_quadrature(&seg, 64).unwrap();
    assert!((q.integrate(|x| x[0].powi(5)) - (64.0 - 1.0) / 6.0).abs() < 1e-10);
}

#[test]
fn every_quadrature_node_is_inside() {
    let ball = Shape::Ball { radius: 0.8 }
        .build(60, 30, BoundaryCondition::Dirichlet)
        .unwrap();
    let q = domain_quadrature(&ball, 3000).unwrap();
    assert!(q.nodes.iter().all(|x| ball.contains(x)));
    assert!(q.weights.iter().all(|w| *w > 0.0));
}

#[test]
fn builtin_normals_are_unit_and_outward() {
    for shape in [
        Shape::Disk { radius: 2.0 },
        Shape::Ball { radius: 1.0 },
        Shape::Rectangle {
            lower: [-1.0, 0.0],
            upper: [1.0, 3.0],
        },
    ] {
        let d = shape.build(40, 20, BoundaryCondition::Dirichlet).unwrap();
        for node in d.boundary() {
            let len: f64 = node.normal.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((len - 1.0).abs() < 1e-12);
            let out: Vec<f64> = node
                .position
                .iter()
                .zip(&node.normal)
                .map(|(p, n)| p + 1e-3 * n)
                .collect();
            let inn: Vec<f64> = node
                .position
                .iter()
                .zip(&node.normal)
                .map(|(p, n)| p - 1e-3 * n)
                .collect();
            assert!(
                !d.contains(&out) && d.contains(&inn),
                "{shape:?} at {:?}",
                node.position
            );
        }
    }
}

#[test]
fn ball_and_sphere_measures() {
    // |B^n| = π^{n/2}/Γ(n/2+1), |S^{n−1}| = n|B^n|
    let gamma = [
        1.0,
        PI.sqrt() / 2.0,
        1.0,
        3.0 * PI.sqrt() / 4.0,
        2.0,
        15.0 * PI.sqrt() / 8.0,
    ];
    for (n, g) in gamma.iter().enumerate().skip(1) {
        let exact = PI.powf(n as f64 / 2.0) / g;
        let v: f64 = unit_ball_volume(n).unwrap();
        assert!((v - exact).abs() < 1e-13, "n={n}");
        if n >= 2 {
            let s: f64 = unit_sphere_area(n).unwrap();
            assert!((s - n as f64 * exact).abs() < 1e-12, "n={n}");
        }
    }
    assert!(unit_sphere_area::<f64>(1).is_err());
}

#[test]
fn shapes_reject_bad_parameters() {
    assert!(Shape::Interval { a: 1.0, b: 1.0 }
        .build(2, 5, BoundaryCondition::Dirichlet)
        .is_err());
    assert!(Shape::Disk { radius: -1.0 }
        .build(20, 5, BoundaryCondition::Dirichlet)
        .is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn distances_are_a_metric(
        a in proptest::collection::vec(proptest::collection::vec(-5.0..5.0_f64, 3), 1..6),
        b in proptest::collection::vec(proptest::collection::vec(-5.0..5.0_f64, 3), 1..6),
    ) {
        let d = pairwise_distances(&a, &b).unwrap();
        let back = pairwise_distances(&b, &a).unwrap();
        let self_d = pairwise_distances(&a, &a).unwrap();
        for i in 0..a.len() {
            prop_assert!(self_d[(i, i)] == 0.0);
            for j in 0..b.len() {
                prop_assert!(d[(i, j)] >= 0.0);
                prop_assert_eq!(d[(i, j)], back[(j, i)]);
                for k in 0..a.len() {
                    prop_assert!(d[(i, j)] <= self_d[(i, k)] + d[(k, j)] + 1e-12);
                }
            }
        }
    }
}
