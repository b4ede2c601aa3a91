//! Built-in shapes that generate their own nodes and indicator.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{build_domain, BoundaryCondition, BoundaryNode, Domain, Indicator};
use crate::error::{Error, Result};
use crate::Point;

/// Check-set density relative to the collocation nodes.
const CHECK_REFINEMENT: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Interval { a: f64, b: f64 },
    Disk { radius: f64 },
    Ball { radius: f64 },
    Rectangle { lower: [f64; 2], upper: [f64; 2] },
}

impl Shape {
    pub fn dimension(&self) -> usize {
        match self {
            Shape::Interval { .. } => 1,
            Shape::Disk { .. } | Shape::Rectangle { .. } => 2,
            Shape::Ball { .. } => 3,
        }
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        match self {
            Shape::Interval { a, b } => (vec![*a], vec![*b]),
            Shape::Disk { radius } => (vec![-radius; 2], vec![*radius; 2]),
            Shape::Ball { radius } => (vec![-radius; 3], vec![*radius; 3]),
            Shape::Rectangle { lower, upper } => (lower.to_vec(), upper.to_vec()),
        }
    }

    pub fn indicator(&self) -> Indicator {
        match self.clone() {
            Shape::Interval { a, b } => Indicator::new(move |x| x[0] >= a && x[0] <= b),
            Shape::Disk { radius } | Shape::Ball { radius } => {
                Indicator::new(move |x| x.iter().map(|v| v * v).sum::<f64>() <= radius * radius)
            }
            Shape::Rectangle { lower, upper } => {
                Indicator::new(move |x| x[0] >= lower[0] && x[0] <= upper[0] && x[1] >= lower[1] && x[1] <= upper[1])
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Shape::Interval { a, b } => b > a,
            Shape::Disk { radius } | Shape::Ball { radius } => *radius > 0.0,
            Shape::Rectangle { lower, upper } => upper[0] > lower[0] && upper[1] > lower[1],
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidGeometry(format!("degenerate shape {self:?}")))
        }
    }

    /// Boundary nodes and a denser check set.
    fn boundary(&self, count: usize, bc: BoundaryCondition) -> (Vec<BoundaryNode>, Vec<BoundaryNode>) {
        match self {
            Shape::Interval { a, b } => {
                let nodes = vec![
                    BoundaryNode::new(vec![*a], vec![-1.0], bc),
                    BoundaryNode::new(vec![*b], vec![1.0], bc),
                ];
                (nodes.clone(), nodes)
            }
            Shape::Disk { radius } => (
                circle_nodes(*radius, count, 0.0, bc),
                circle_nodes(*radius, CHECK_REFINEMENT * count, 0.5, bc),
            ),
            Shape::Ball { radius } => (
                sphere_nodes(*radius, count, bc),
                sphere_nodes(*radius, CHECK_REFINEMENT * count, bc),
            ),
            Shape::Rectangle { lower, upper } => (
                rectangle_nodes(*lower, *upper, count, bc),
                rectangle_nodes(*lower, *upper, CHECK_REFINEMENT * count, bc),
            ),
        }
    }

    /// Interior nodes on a lattice, roughly `target` of them, kept a half
    /// spacing away from the boundary.
    fn interior(&self, target: usize) -> Vec<Point> {
        if target == 0 {
            return Vec::new();
        }
        match self {
            Shape::Interval { a, b } => (1..=target)
                .map(|i| vec![a + (b - a) * i as f64 / (target + 1) as f64])
                .collect(),
            Shape::Disk { radius } => {
                let h = (PI * radius * radius / target as f64).sqrt();
                lattice(2, *radius, h)
                    .into_iter()
                    .filter(|p| super::norm(p) < radius - 0.5 * h)
                    .collect()
            }
            Shape::Ball { radius } => {
                let h = (4.0 / 3.0 * PI * radius.powi(3) / target as f64).cbrt();
                lattice(3, *radius, h)
                    .into_iter()
                    .filter(|p| super::norm(p) < radius - 0.5 * h)
                    .collect()
            }
            Shape::Rectangle { lower, upper } => {
                let (w, hgt) = (upper[0] - lower[0], upper[1] - lower[1]);
                let h = (w * hgt / target as f64).sqrt();
                let nx = (w / h).round().max(1.0) as usize;
                let ny = (hgt / h).round().max(1.0) as usize;
                let mut pts = Vec::with_capacity(nx * ny);
                for i in 0..nx {
                    for j in 0..ny {
                        pts.push(vec![
                            lower[0] + w * (i as f64 + 0.5) / nx as f64,
                            lower[1] + hgt * (j as f64 + 0.5) / ny as f64,
                        ]);
                    }
                }
                pts
            }
        }
    }

    /// Generate a validated domain with `boundary_nodes` collocation nodes
    /// (ignored for intervals) and about `interior_nodes` interior nodes.
    pub fn build(&self, boundary_nodes: usize, interior_nodes: usize, bc: BoundaryCondition) -> Result<Domain> {
        self.validate()?;
        if self.dimension() > 1 && boundary_nodes < 3 {
            return Err(Error::InvalidGeometry("shape needs at least 3 boundary nodes".into()));
        }
        let (boundary, check) = self.boundary(boundary_nodes, bc);
        let interior = self.interior(interior_nodes);
        let enclosure = match self {
            Shape::Disk { radius } | Shape::Ball { radius } => Some((vec![0.0; self.dimension()], *radius)),
            _ => None,
        };
        Ok(
            build_domain(self.dimension(), boundary, interior, self.indicator(), enclosure)?
                .with_check_nodes(check)
                .with_shape(self.clone()),
        )
    }
}

fn circle_nodes(radius: f64, count: usize, offset: f64, bc: BoundaryCondition) -> Vec<BoundaryNode> {
    (0..count)
        .map(|k| {
            let t = 2.0 * PI * (k as f64 + offset) / count as f64;
            let (s, c) = t.sin_cos();
            BoundaryNode::new(vec![radius * c, radius * s], vec![c, s], bc)
        })
        .collect()
}

/// Fibonacci-lattice points on the sphere.
fn sphere_nodes(radius: f64, count: usize, bc: BoundaryCondition) -> Vec<BoundaryNode> {
    let golden = PI * (3.0 - 5.0_f64.sqrt());
    (0..count)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let rho = (1.0 - z * z).sqrt();
            let t = golden * k as f64;
            let normal = vec![rho * t.cos(), rho * t.sin(), z];
            let position = normal.iter().map(|v| v * radius).collect();
            BoundaryNode::new(position, normal, bc)
        })
        .collect()
}

/// Nodes spread over the four edges in proportion to edge length, placed at
/// segment midpoints so no node sits on a corner.
fn rectangle_nodes(lower: [f64; 2], upper: [f64; 2], count: usize, bc: BoundaryCondition) -> Vec<BoundaryNode> {
    let (w, h) = (upper[0] - lower[0], upper[1] - lower[1]);
    let per_w = ((count as f64 * w / (2.0 * (w + h))).round() as usize).max(1);
    let per_h = ((count as f64 * h / (2.0 * (w + h))).round() as usize).max(1);
    let mut nodes = Vec::new();
    for i in 0..per_w {
        let x = lower[0] + w * (i as f64 + 0.5) / per_w as f64;
        nodes.push(BoundaryNode::new(vec![x, lower[1]], vec![0.0, -1.0], bc));
        nodes.push(BoundaryNode::new(vec![x, upper[1]], vec![0.0, 1.0], bc));
    }
    for j in 0..per_h {
        let y = lower[1] + h * (j as f64 + 0.5) / per_h as f64;
        nodes.push(BoundaryNode::new(vec![lower[0], y], vec![-1.0, 0.0], bc));
        nodes.push(BoundaryNode::new(vec![upper[0], y], vec![1.0, 0.0], bc));
    }
    nodes
}

fn lattice(dim: usize, radius: f64, h: f64) -> Vec<Point> {
    let m = (radius / h).ceil() as i64;
    let mut pts = vec![vec![]];
    for _ in 0..dim {
        let mut next = Vec::new();
        for p in &pts {
            for i in -m..=m {
                let mut q: Point = p.clone();
                q.push(i as f64 * h);
                next.push(q);
            }
        }
        pts = next;
    }
    pts
}
