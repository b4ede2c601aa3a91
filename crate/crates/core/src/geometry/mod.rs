//! Point-cloud domains, boundary conditions, distances and quadrature.

mod file;
mod quadrature;
mod shapes;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special_fn::gamma_half;
use crate::{lit, Point, Scalar};

pub use file::{GeometryFile, ShapeSpec};
pub use quadrature::{domain_quadrature, gauss_legendre, QuadratureRule};
pub use shapes::Shape;

const NORMAL_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    /// ∂u/∂n + a·u = 0 with a ≥ 0.
    Robin(f64),
}

impl BoundaryCondition {
    pub fn is_dirichlet(&self) -> bool {
        matches!(self, BoundaryCondition::Dirichlet)
    }

    pub fn name(&self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::Robin(_) => "robin",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryNode {
    pub position: Point,
    /// Unit outward normal.
    pub normal: Point,
    pub bc: BoundaryCondition,
}

impl BoundaryNode {
    pub fn new(position: Point, normal: Point, bc: BoundaryCondition) -> Self {
        BoundaryNode { position, normal, bc }
    }
}

type Predicate = dyn Fn(&[f64]) -> bool + Send + Sync;

/// Membership predicate of a domain.
#[derive(Clone)]
pub struct Indicator(Arc<Predicate>);

impl Indicator {
    pub fn new(f: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        Indicator(Arc::new(f))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        (self.0)(x)
    }

    /// Inside test for a bare point cloud: x is inside when it lies behind
    /// the tangent plane of its nearest boundary node.
    pub fn from_boundary(boundary: &[BoundaryNode]) -> Self {
        let nodes: Vec<BoundaryNode> = boundary.to_vec();
        Indicator::new(move |x| {
            let nearest = nodes
                .iter()
                .min_by(|a, b| {
                    distance(x, &a.position)
                        .partial_cmp(&distance(x, &b.position))
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
                .expect("nonempty boundary");
            let along: f64 = x
                .iter()
                .zip(&nearest.position)
                .zip(&nearest.normal)
                .map(|((xi, pi), ni)| (xi - pi) * ni)
                .sum();
            along <= 1e-12
        })
    }
}

impl fmt::Debug for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Indicator(..)")
    }
}

#[derive(Debug, Clone)]
pub struct Domain {
    dimension: usize,
    boundary: Vec<BoundaryNode>,
    interior: Vec<Point>,
    indicator: Indicator,
    radius: f64,
    centroid: Point,
    check: Vec<BoundaryNode>,
    shape: Option<Shape>,
}

impl Domain {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Boundary nodes, Dirichlet nodes first.
    pub fn boundary(&self) -> &[BoundaryNode] {
        &self.boundary
    }

    pub fn interior(&self) -> &[Point] {
        &self.interior
    }

    pub fn indicator(&self) -> &Indicator {
        &self.indicator
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.indicator.contains(x)
    }

    /// Radius of a ball about the centroid that covers every boundary node.
    pub fn enclosing_radius(&self) -> f64 {
        self.radius
    }

    pub fn centroid(&self) -> &[f64] {
        &self.centroid
    }

    /// Boundary points on which boundary-condition residuals are measured.
    /// Built-in shapes supply a set denser than the collocation nodes.
    pub fn check_nodes(&self) -> &[BoundaryNode] {
        &self.check
    }

    pub fn shape(&self) -> Option<&Shape> {
        self.shape.as_ref()
    }

    /// Number of Dirichlet nodes at the head of [`Domain::boundary`].
    pub fn dirichlet_count(&self) -> usize {
        self.boundary.iter().take_while(|b| b.bc.is_dirichlet()).count()
    }

    pub fn all_neumann(&self) -> bool {
        self.boundary.iter().all(|b| matches!(b.bc, BoundaryCondition::Neumann))
    }

    /// Axis-aligned box covering the boundary nodes.
    pub fn bounding_box(&self) -> (Point, Point) {
        if let Some(shape) = &self.shape {
            return shape.bounding_box();
        }
        let mut lo = vec![f64::INFINITY; self.dimension];
        let mut hi = vec![f64::NEG_INFINITY; self.dimension];
        for p in self.boundary.iter().map(|b| &b.position).chain(&self.interior) {
            for d in 0..self.dimension {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }

    pub(crate) fn with_check_nodes(mut self, check: Vec<BoundaryNode>) -> Self {
        self.check = check;
        self
    }

    pub(crate) fn with_shape(mut self, shape: Shape) -> Self {
        self.shape = Some(shape);
        self
    }
}

/// Validate and assemble a [`Domain`].
///
/// Normals are re-normalised, and the boundary is stably reordered so that
/// Dirichlet nodes come first. `enclosure` fixes the center and radius of
/// the enclosing ball; when `None` the center is the boundary centroid and the
/// radius the largest centroid-to-boundary distance.
pub fn build_domain(
    dimension: usize,
    boundary: Vec<BoundaryNode>,
    interior: Vec<Point>,
    indicator: Indicator,
    enclosure: Option<(Point, f64)>,
) -> Result<Domain> {
    if dimension < 1 {
        return Err(Error::InvalidGeometry("dimension must be >= 1".into()));
    }
    if boundary.is_empty() {
        return Err(Error::InvalidGeometry("boundary node list is empty".into()));
    }
    let mut boundary = boundary;
    for (i, node) in boundary.iter_mut().enumerate() {
        if node.position.len() != dimension || node.normal.len() != dimension {
            return Err(Error::InvalidNode {
                what: "boundary",
                index: i,
                reason: format!("expected {dimension} coordinates"),
            });
        }
        let len = norm(&node.normal);
        if (len - 1.0).abs() > NORMAL_TOLERANCE {
            return Err(Error::InvalidNode {
                what: "boundary",
                index: i,
                reason: format!("normal has length {len}, expected 1"),
            });
        }
        node.normal.iter_mut().for_each(|v| *v /= len);
        if let BoundaryCondition::Robin(a) = node.bc {
            if !(a >= 0.0) {
                return Err(Error::InvalidNode {
                    what: "boundary",
                    index: i,
                    reason: format!("Robin coefficient {a} must be >= 0"),
                });
            }
        }
    }
    for (i, p) in interior.iter().enumerate() {
        if p.len() != dimension {
            return Err(Error::InvalidNode {
                what: "interior",
                index: i,
                reason: format!("expected {dimension} coordinates"),
            });
        }
        if !indicator.contains(p) {
            return Err(Error::InvalidNode {
                what: "interior",
                index: i,
                reason: "point lies outside the domain indicator".into(),
            });
        }
    }
    boundary.sort_by_key(|b| !b.bc.is_dirichlet());

    let (centroid, radius) = match enclosure {
        Some((center, r)) if center.len() == dimension => (center, r),
        Some((center, _)) => {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                found: center.len(),
            })
        }
        None => {
            let mut centroid = vec![0.0; dimension];
            for b in &boundary {
                for (c, p) in centroid.iter_mut().zip(&b.position) {
                    *c += p / boundary.len() as f64;
                }
            }
            let far = boundary
                .iter()
                .map(|b| distance(&b.position, &centroid))
                .fold(0.0, f64::max);
            (centroid, far)
        }
    };
    if !(radius > 0.0) {
        return Err(Error::InvalidGeometry(format!("enclosing radius {radius} must be > 0")));
    }
    for (i, b) in boundary.iter().enumerate() {
        if distance(&b.position, &centroid) > radius * (1.0 + 1e-9) + 1e-12 {
            return Err(Error::InvalidNode {
                what: "boundary",
                index: i,
                reason: "node lies outside the enclosing ball".into(),
            });
        }
    }
    let check = boundary.clone();
    Ok(Domain {
        dimension,
        boundary,
        interior,
        indicator,
        radius,
        centroid,
        check,
        shape: None,
    })
}

/// Volume π^(n/2)/Γ(n/2+1) of the unit ball in n dimensions.
pub fn unit_ball_volume<T: Scalar>(n: usize) -> Result<T> {
    if n < 1 {
        return Err(Error::Domain("unit_ball_volume requires n >= 1".into()));
    }
    let half_n: T = lit::<T>(n as f64) / lit(2.0);
    Ok(T::PI().powf(half_n) / gamma_half::<T>(n as u32 + 2))
}

/// Surface area 2π^(n/2)/Γ(n/2) of the unit sphere in n dimensions.
pub fn unit_sphere_area<T: Scalar>(n: usize) -> Result<T> {
    if n < 2 {
        return Err(Error::Domain("unit_sphere_area requires n >= 2".into()));
    }
    let half_n: T = lit::<T>(n as f64) / lit(2.0);
    Ok(lit::<T>(2.0) * T::PI().powf(half_n) / gamma_half::<T>(n as u32))
}

/// Euclidean distance matrix D[i][j] = ‖a_i − b_j‖.
pub fn pairwise_distances(a: &[Point], b: &[Point]) -> Result<DMatrix<f64>> {
    let dim = a.first().or(b.first()).map(|p| p.len()).unwrap_or(0);
    for p in a.iter().chain(b) {
        if p.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: p.len(),
            });
        }
    }
    Ok(DMatrix::from_fn(a.len(), b.len(), |i, j| distance(&a[i], &b[j])))
}

#[inline]
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
