use thiserror::Error;

/// Errors raised across the solver pipeline.
///
/// Each variant carries a short machine-readable code (see [`Error::code`])
/// which the command-line front end prints as `error: <code>: <field>`.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument outside the function domain: {0}")]
    Domain(String),

    #[error("unsupported Bessel order {0} (only integer and half-integer orders are available)")]
    UnsupportedOrder(f64),

    #[error("kernel is singular at r = 0: {0}")]
    Singularity(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid geometry at {what} index {index}: {reason}")]
    InvalidNode {
        what: &'static str,
        index: usize,
        reason: String,
    },

    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("domain indicator rejected every quadrature candidate")]
    EmptyDomain,

    #[error("Gram matrix of scale {scale} is not numerically positive semidefinite")]
    Conditioning { scale: usize },

    #[error("not enough samples: {samples} samples for {atoms} atoms")]
    TooFewSamples { samples: usize, atoms: usize },

    #[error("empty spectrum")]
    EmptySpectrum,

    #[error("initial velocity supplied for a first-order-in-time equation")]
    FirstOrderVelocity,

    #[error("resonant forcing: zero mode carries nonzero forcing {0:e}, no steady state exists")]
    Resonance(f64),

    #[error("unsupported feature: {0}")]
    Unsupported(String),

    #[error("admissibility integral diverges")]
    Divergent,

    #[error("invalid parameter `{field}`: {reason}")]
    Parameter { field: String, reason: String },

    #[error("parse error in `{field}`: {reason}")]
    Parse { field: String, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn param(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parameter {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn parse(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Stable short identifier of the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::UnsupportedOrder(_) => "unsupported-order",
            Error::Singularity(_) => "singularity",
            Error::DimensionMismatch { .. } => "dimension-mismatch",
            Error::InvalidNode { .. } => "invalid-node",
            Error::InvalidGeometry(_) => "invalid-geometry",
            Error::EmptyDomain => "empty-domain",
            Error::Conditioning { .. } => "conditioning",
            Error::TooFewSamples { .. } => "too-few-samples",
            Error::EmptySpectrum => "empty-spectrum",
            Error::FirstOrderVelocity => "first-order-velocity",
            Error::Resonance(_) => "resonance",
            Error::Unsupported(_) => "unsupported",
            Error::Divergent => "divergent",
            Error::Parameter { .. } => "parameter",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
        }
    }

    /// The offending field or location, when one is known.
    pub fn field(&self) -> String {
        match self {
            Error::Parameter { field, .. } | Error::Parse { field, .. } => field.clone(),
            Error::InvalidNode { what, index, .. } => format!("{what}[{index}]"),
            Error::Conditioning { scale } => format!("scale[{scale}]"),
            _ => "-".to_string(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
