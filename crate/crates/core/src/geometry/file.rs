//! Structured-text geometry description.
//!
//! ```json
//! { "dimension": 2,
//!   "shape": { "disk": { "radius": 1.0, "boundary_nodes": 48 } } }
//! ```
//!
//! or an explicit point cloud with `boundary` records
//! (`position`, `normal`, `bc`, optional `robin_a`) and `interior` arrays.

use serde::{Deserialize, Serialize};

use super::{build_domain, BoundaryCondition, BoundaryNode, Domain, Indicator, Shape};
use crate::error::{Error, Result};
use crate::Point;

const DEFAULT_BOUNDARY_NODES: usize = 48;
const DEFAULT_INTERIOR_NODES: usize = 120;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryRecord {
    pub position: Vec<f64>,
    pub normal: Vec<f64>,
    pub bc: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robin_a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalSpec {
    pub a: f64,
    pub b: f64,
    #[serde(default)]
    pub interior_nodes: Option<usize>,
    #[serde(default)]
    pub bc: Option<String>,
    #[serde(default)]
    pub robin_a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoundSpec {
    pub radius: f64,
    #[serde(default)]
    pub boundary_nodes: Option<usize>,
    #[serde(default)]
    pub interior_nodes: Option<usize>,
    #[serde(default)]
    pub bc: Option<String>,
    #[serde(default)]
    pub robin_a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectangleSpec {
    pub lower: [f64; 2],
    pub upper: [f64; 2],
    #[serde(default)]
    pub boundary_nodes: Option<usize>,
    #[serde(default)]
    pub interior_nodes: Option<usize>,
    #[serde(default)]
    pub bc: Option<String>,
    #[serde(default)]
    pub robin_a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ShapeSpec {
    Interval(IntervalSpec),
    Disk(RoundSpec),
    Ball(RoundSpec),
    Rectangle(RectangleSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryFile {
    pub dimension: usize,
    #[serde(default)]
    pub boundary: Vec<BoundaryRecord>,
    #[serde(default)]
    pub interior: Vec<Vec<f64>>,
    #[serde(default)]
    pub shape: Option<ShapeSpec>,
}

pub(crate) fn parse_bc(name: &str, robin_a: Option<f64>, field: &str) -> Result<BoundaryCondition> {
    match name {
        "dirichlet" => Ok(BoundaryCondition::Dirichlet),
        "neumann" => Ok(BoundaryCondition::Neumann),
        "robin" => {
            let a = robin_a.ok_or_else(|| Error::parse(field, "robin boundary needs `robin_a`"))?;
            if !(a >= 0.0) {
                return Err(Error::parse(field, "`robin_a` must be >= 0"));
            }
            Ok(BoundaryCondition::Robin(a))
        }
        other => Err(Error::parse(
            field,
            format!("unknown boundary condition `{other}` (expected dirichlet|neumann|robin)"),
        )),
    }
}

impl GeometryFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse("geometry", e.to_string()))
    }

    pub fn to_domain(&self) -> Result<Domain> {
        if let Some(shape) = &self.shape {
            if !self.boundary.is_empty() || !self.interior.is_empty() {
                return Err(Error::parse(
                    "geometry.shape",
                    "a built-in shape generates its own nodes; drop `boundary`/`interior`",
                ));
            }
            let (shape_value, nb, ni, bc) = match shape {
                ShapeSpec::Interval(s) => (
                    Shape::Interval { a: s.a, b: s.b },
                    2,
                    s.interior_nodes.unwrap_or(19),
                    bc_or_default(&s.bc, s.robin_a)?,
                ),
                ShapeSpec::Disk(s) => (
                    Shape::Disk { radius: s.radius },
                    s.boundary_nodes.unwrap_or(DEFAULT_BOUNDARY_NODES),
                    s.interior_nodes.unwrap_or(DEFAULT_INTERIOR_NODES),
                    bc_or_default(&s.bc, s.robin_a)?,
                ),
                ShapeSpec::Ball(s) => (
                    Shape::Ball { radius: s.radius },
                    s.boundary_nodes.unwrap_or(2 * DEFAULT_BOUNDARY_NODES),
                    s.interior_nodes.unwrap_or(DEFAULT_INTERIOR_NODES),
                    bc_or_default(&s.bc, s.robin_a)?,
                ),
                ShapeSpec::Rectangle(s) => (
                    Shape::Rectangle {
                        lower: s.lower,
                        upper: s.upper,
                    },
                    s.boundary_nodes.unwrap_or(DEFAULT_BOUNDARY_NODES),
                    s.interior_nodes.unwrap_or(DEFAULT_INTERIOR_NODES),
                    bc_or_default(&s.bc, s.robin_a)?,
                ),
            };
            if shape_value.dimension() != self.dimension {
                return Err(Error::parse(
                    "geometry.dimension",
                    format!("shape is {}-dimensional", shape_value.dimension()),
                ));
            }
            return shape_value.build(nb, ni, bc);
        }
        let mut nodes = Vec::with_capacity(self.boundary.len());
        for (i, rec) in self.boundary.iter().enumerate() {
            let bc = parse_bc(&rec.bc, rec.robin_a, &format!("boundary[{i}].bc"))?;
            nodes.push(BoundaryNode::new(rec.position.clone(), rec.normal.clone(), bc));
        }
        if nodes.is_empty() {
            return Err(Error::parse("geometry.boundary", "boundary node list is empty"));
        }
        let indicator = Indicator::from_boundary(&nodes);
        let interior: Vec<Point> = self.interior.clone();
        build_domain(self.dimension, nodes, interior, indicator, None)
    }
}

fn bc_or_default(name: &Option<String>, robin_a: Option<f64>) -> Result<BoundaryCondition> {
    match name {
        None => Ok(BoundaryCondition::Dirichlet),
        Some(n) => parse_bc(n, robin_a, "geometry.shape.bc"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_disk() {
        let g = GeometryFile::from_json(r#"{"dimension": 2, "shape": {"disk": {"radius": 1.0}}}"#).unwrap();
        let d = g.to_domain().unwrap();
        assert_eq!(d.boundary().len(), 48);
    }

    #[test]
    fn explicit_cloud() {
        let g = GeometryFile::from_json(
            r#"{"dimension": 1,
                "boundary": [{"position": [0], "normal": [-1], "bc": "dirichlet"},
                             {"position": [1], "normal": [1], "bc": "robin", "robin_a": 2.0}],
                "interior": [[0.25], [0.5]]}"#,
        )
        .unwrap();
        let d = g.to_domain().unwrap();
        assert_eq!(d.boundary()[1].bc, BoundaryCondition::Robin(2.0));
        assert_eq!(d.interior().len(), 2);
    }

    #[test]
    fn misspelled_bc_names_field() {
        let g = GeometryFile::from_json(
            r#"{"dimension": 1,
                "boundary": [{"position": [0], "normal": [-1], "bc": "dirichlit"}]}"#,
        )
        .unwrap();
        let err = g.to_domain().unwrap_err();
        assert_eq!(err.field(), "boundary[0].bc");
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(GeometryFile::from_json(r#"{"dimension": 1, "colour": 3}"#).is_err());
        assert!(GeometryFile::from_json(r#"{"dimension": 2, "shape": {"disk": {"radius": 1, "r": 2}}}"#).is_err());
    }
}
