//! Scalar functions of position shared by the solver and the transform.

use std::fmt;
use std::sync::Arc;

use crate::expr::Expr;

type Func = dyn Fn(&[f64]) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct Field {
    f: Arc<Func>,
    zero: bool,
    label: Arc<str>,
}

impl Field {
    pub fn new(label: &str, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Field {
            f: Arc::new(f),
            zero: false,
            label: label.into(),
        }
    }

    pub fn zero() -> Self {
        Field {
            f: Arc::new(|_| 0.0),
            zero: true,
            label: "0".into(),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    /// True only for fields known to vanish identically.
    pub fn is_zero(&self) -> bool {
        self.zero
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Field({})", self.label)
    }
}

impl From<Expr> for Field {
    fn from(e: Expr) -> Self {
        let zero = e.is_zero();
        let label: Arc<str> = e.source().into();
        Field {
            f: Arc::new(move |x| e.eval(x)),
            zero,
            label,
        }
    }
}
