//! Column functions of the boundary-knot representation.
//!
//! A Dirichlet-type source contributes φ(κ‖x − x_s‖); a Neumann or Robin
//! source contributes −∂φ/∂n_s, the derivative taken with respect to the
//! source position, which is (φ'(r)/r)·n_s·(x − x_s).

use serde::{Deserialize, Serialize};

use crate::geometry::{dot, BoundaryCondition, BoundaryNode};
use crate::special_fn::KernelSpec;
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Source {
    pub position: Point,
    pub normal: Point,
    pub kind: SourceKind,
}

impl Source {
    pub fn from_node(node: &BoundaryNode) -> Self {
        let kind = match node.bc {
            BoundaryCondition::Dirichlet => SourceKind::Dirichlet,
            BoundaryCondition::Neumann | BoundaryCondition::Robin(_) => SourceKind::Neumann,
        };
        Source {
            position: node.position.clone(),
            normal: node.normal.clone(),
            kind,
        }
    }
}

/// Below this λr the O(r²) curvature term of the Neumann-column gradient is
/// dropped to avoid a 0/0.
const SMALL_ARG: f64 = 1e-6;

/// Value and gradient of one column function at x.
pub(crate) fn column(kernel: &KernelSpec<f64>, src: &Source, x: &[f64]) -> (f64, Point) {
    let n = x.len();
    let d: Point = x.iter().zip(&src.position).map(|(a, b)| a - b).collect();
    let r = dot(&d, &d).sqrt();
    let lam = kernel.wavenumber;
    if n == 1 {
        // one-sided limit from inside the domain when x sits on the source
        let s = if r > 0.0 {
            d[0].signum()
        } else {
            -src.normal[0].signum()
        };
        let (sn, cs) = (lam * r).sin_cos();
        return match src.kind {
            SourceKind::Dirichlet => (sn / (2.0 * lam), vec![0.5 * cs * s]),
            SourceKind::Neumann => {
                let ns = src.normal[0] * s;
                (0.5 * cs * ns, vec![-0.5 * lam * sn * src.normal[0]])
            }
        };
    }
    let rv = kernel.general_radial(r);
    let g = rv.d_dr_over_r;
    match src.kind {
        SourceKind::Dirichlet => (rv.value, d.iter().map(|di| g * di).collect()),
        SourceKind::Neumann => {
            let nd = dot(&src.normal, &d);
            let curv = if lam * r > SMALL_ARG {
                nd * (lam * lam * rv.value + n as f64 * g) / (r * r)
            } else {
                0.0
            };
            let grad = src.normal.iter().zip(&d).map(|(ns, di)| g * ns - curv * di).collect();
            (g * nd, grad)
        }
    }
}

/// Boundary operator of `node` applied to a value/gradient pair.
pub(crate) fn apply_bc(node: &BoundaryNode, value: f64, grad: &[f64]) -> f64 {
    match node.bc {
        BoundaryCondition::Dirichlet => value,
        BoundaryCondition::Neumann => dot(&node.normal, grad),
        BoundaryCondition::Robin(a) => dot(&node.normal, grad) + a * value,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_grad(k: &KernelSpec<f64>, s: &Source, x: &[f64]) -> Point {
        let h = 1e-6;
        (0..x.len())
            .map(|i| {
                let mut p = x.to_vec();
                let mut m = x.to_vec();
                p[i] += h;
                m[i] -= h;
                (column(k, s, &p).0 - column(k, s, &m).0) / (2.0 * h)
            })
            .collect()
    }

    #[test]
    fn gradients_match_finite_differences() {
        for n in 1..=3 {
            let k = KernelSpec::general(n, 2.3).unwrap();
            let mut normal = vec![0.0; n];
            normal[0] = 0.6;
            if n > 1 {
                normal[1] = 0.8;
            } else {
                normal[0] = 1.0;
            }
            for kind in [SourceKind::Dirichlet, SourceKind::Neumann] {
                let src = Source {
                    position: vec![0.3; n],
                    normal: normal.clone(),
                    kind,
                };
                let x: Point = (0..n).map(|i| -0.2 + 0.15 * i as f64).collect();
                let (_, g) = column(&k, &src, &x);
                let fd = fd_grad(&k, &src, &x);
                for (a, b) in g.iter().zip(&fd) {
                    assert!((a - b).abs() < 1e-7, "n={n} {kind:?}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn neumann_column_is_minus_source_derivative() {
        let k = KernelSpec::general(2, 1.7).unwrap();
        let normal = vec![0.0, 1.0];
        let src = Source {
            position: vec![0.1, 0.2],
            normal: normal.clone(),
            kind: SourceKind::Neumann,
        };
        let x = [0.5_f64, -0.3];
        let phi = |y: f64| {
            let r = ((x[0] - 0.1).powi(2) + (x[1] - y).powi(2)).sqrt();
            k.general_radial(r).value
        };
        let h = 1e-6;
        let dsrc = (phi(0.2 + h) - phi(0.2 - h)) / (2.0 * h);
        assert!((column(&k, &src, &x).0 + dsrc).abs() < 1e-8);
    }
}
