//! Run configuration: one JSON document with optional sections per command.

use std::path::{Path, PathBuf};

use helmwave::bkm_eigen::Objective;
use helmwave::expr::Expr;
use helmwave::geometry::{Domain, GeometryFile};
use helmwave::transient::{EquationSpec, Family, FitMethod};
use helmwave::wavelet_series::FitMethod as SeriesMethod;
use helmwave::{Error, Field, Result};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    geometry: Option<Value>,
    equation: Option<Value>,
    eigensolver: Option<Value>,
    initial: Option<Value>,
    expansion: Option<Value>,
    transform: Option<Value>,
    output: Option<Value>,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationConfig {
    pub family: String,
    pub c: Option<f64>,
    pub h: Option<f64>,
    pub damping: Option<f64>,
    pub s: Option<f64>,
    pub forcing: Option<String>,
    pub dirichlet: Option<String>,
    pub neumann: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigensolverConfig {
    pub scheme: Option<String>,
    pub lambda_range: Option<[f64; 2]>,
    pub samples: Option<usize>,
    pub refine_tol: Option<f64>,
    pub accept_tol: Option<f64>,
    pub bc_tol: Option<f64>,
    pub objective: Option<Objective>,
    pub delta: Option<f64>,
    pub n_interior: Option<usize>,
    pub quadrature_budget: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    pub phi: Option<String>,
    pub psi: Option<String>,
    pub phi_samples: Option<String>,
    pub psi_samples: Option<String>,
    pub method: Option<FitMethod>,
    pub quadrature_budget: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpansionConfig {
    pub scales: usize,
    pub centers: Option<Vec<Vec<f64>>>,
    pub lattice: Option<usize>,
    pub method: Option<SeriesMethod>,
    pub function: Option<String>,
    pub samples: Option<String>,
    pub orthonormalize: Option<bool>,
    pub quadrature_budget: Option<usize>,
    pub sample_budget: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CenterGrid {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformConfig {
    pub function: String,
    pub dimension: Option<usize>,
    pub lambda_range: Option<[f64; 2]>,
    pub lambda_count: Option<usize>,
    pub centers: Option<Vec<Vec<f64>>>,
    pub center_grid: Option<CenterGrid>,
    /// Integration interval in one dimension; otherwise the geometry.
    pub support: Option<[f64; 2]>,
    pub quadrature_budget: Option<usize>,
    /// Points where the reconstruction is compared with the function.
    pub check_points: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub counts: Vec<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<String>,
    #[serde(default)]
    pub times: Vec<f64>,
    pub points: Option<Vec<Vec<f64>>>,
    pub grid: Option<GridConfig>,
}

pub struct RunConfig {
    pub base: PathBuf,
    text: String,
    raw: RawConfig,
}

fn line_of(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}

/// The first backquoted word of a serde message, usually the offending key.
fn quoted(msg: &str) -> Option<&str> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(&msg[start..start + len])
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::parse("config", format!("cannot read {}: {e}", path.display())))?;
        let raw: RawConfig = serde_json::from_str(&text).map_err(|e| {
            let msg = e.to_string();
            let field = if msg.starts_with("unknown field") {
                quoted(&msg).unwrap_or("config").to_string()
            } else {
                "config".to_string()
            };
            Error::parse(field, msg)
        })?;
        Ok(RunConfig {
            base: path.parent().map(Path::to_path_buf).unwrap_or_default(),
            text,
            raw,
        })
    }

    pub fn seed(&self) -> Option<u64> {
        self.raw.seed
    }

    fn section<T: DeserializeOwned>(&self, name: &str, value: &Option<Value>) -> Result<Option<T>> {
        let Some(v) = value else { return Ok(None) };
        T::deserialize(v).map(Some).map_err(|e| {
            let msg = e.to_string();
            let field = match quoted(&msg) {
                Some(k) if msg.starts_with("unknown field") || msg.starts_with("missing field") => {
                    format!("{name}.{k}")
                }
                _ => name.to_string(),
            };
            let at = line_of(&self.text, name)
                .map(|l| format!(" (section starts on line {l})"))
                .unwrap_or_default();
            Error::parse(field, format!("{msg}{at}"))
        })
    }

    fn required<T: DeserializeOwned>(&self, name: &str, value: &Option<Value>) -> Result<T> {
        self.section(name, value)?
            .ok_or_else(|| Error::parse(name, format!("this command needs a `{name}` section")))
    }

    pub fn resolve(&self, path: &str) -> PathBuf {
        let p = Path::new(path);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn read_file(&self, path: &str, field: &str) -> Result<String> {
        let p = self.resolve(path);
        std::fs::read_to_string(&p).map_err(|e| Error::parse(field, format!("cannot read {}: {e}", p.display())))
    }

    pub fn domain(&self) -> Result<Domain> {
        let v = self
            .raw
            .geometry
            .as_ref()
            .ok_or_else(|| Error::parse("geometry", "this command needs a `geometry` section"))?;
        let geometry = match v {
            Value::String(path) => GeometryFile::from_json(&self.read_file(path, "geometry")?)?,
            _ => self.required::<GeometryFile>("geometry", &self.raw.geometry)?,
        };
        geometry.to_domain()
    }

    pub fn equation(&self, dimension: usize) -> Result<EquationSpec> {
        let e: EquationConfig = self.required("equation", &self.raw.equation)?;
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| {
                Error::param(
                    format!("equation.{name}"),
                    format!("family `{}` needs `{name}`", e.family),
                )
            })
        };
        let (family, used): (Family, &[&str]) = match e.family.as_str() {
            "wave" => (Family::Wave { c: need(e.c, "c")? }, &["c"]),
            "diffusion" => (Family::Diffusion { h: need(e.h, "h")? }, &["h"]),
            "damped_wave" => (
                Family::DampedWave {
                    c: need(e.c, "c")?,
                    damping: need(e.damping, "damping")?,
                },
                &["c", "damping"],
            ),
            "transmission_line" => (
                Family::TransmissionLine {
                    c: need(e.c, "c")?,
                    damping: need(e.damping, "damping")?,
                    s: need(e.s, "s")?,
                },
                &["c", "damping", "s"],
            ),
            other => {
                return Err(Error::param(
                    "equation.family",
                    format!("unknown family `{other}` (wave|diffusion|damped_wave|transmission_line)"),
                ))
            }
        };
        for (name, v) in [("c", e.c), ("h", e.h), ("damping", e.damping), ("s", e.s)] {
            if v.is_some() && !used.contains(&name) {
                return Err(Error::param(
                    format!("equation.{name}"),
                    format!("not used by family `{}`", e.family),
                ));
            }
        }
        family.validate()?;
        let field = |t: &Option<String>, name: &str| -> Result<Option<Field>> {
            t.as_deref()
                .map(|s| Expr::parse(s, dimension, &format!("equation.{name}")).map(Field::from))
                .transpose()
        };
        Ok(EquationSpec {
            family,
            forcing: field(&e.forcing, "forcing")?,
            dirichlet: field(&e.dirichlet, "dirichlet")?,
            neumann: field(&e.neumann, "neumann")?,
        })
    }

    pub fn eigensolver(&self) -> Result<EigensolverConfig> {
        Ok(self.section("eigensolver", &self.raw.eigensolver)?.unwrap_or_default())
    }

    pub fn initial(&self) -> Result<InitialConfig> {
        self.required("initial", &self.raw.initial)
    }

    pub fn expansion(&self) -> Result<ExpansionConfig> {
        self.required("expansion", &self.raw.expansion)
    }

    pub fn transform(&self) -> Result<TransformConfig> {
        self.required("transform", &self.raw.transform)
    }

    pub fn output(&self) -> Result<OutputConfig> {
        Ok(self.section("output", &self.raw.output)?.unwrap_or_default())
    }

    pub fn has_geometry(&self) -> bool {
        self.raw.geometry.is_some()
    }
}
