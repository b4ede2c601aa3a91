//! Meshfree analytical-series solutions of linear transient scalar PDEs
//! (wave, diffusion, damped wave, transmission line) on point-cloud domains
//! of any dimension.
//!
//! The pipeline is:
//!
//! 1. [`geometry`] describes the domain as boundary and interior nodes.
//! 2. [`bkm_eigen`] finds Helmholtz wavenumbers and eigenfunctions with the
//!    boundary knot method.
//! 3. [`wavelet_series`] expands functions in radial Helmholtz atoms.
//! 4. [`transient`] fits initial data and evaluates u(x, t) in closed form.
//! 5. [`transform`] provides the continuous modified-Helmholtz transform.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use num_traits::{Float, FloatConst};

pub mod bkm_eigen;
pub mod error;
pub mod expr;
pub mod field;
pub mod geometry;
pub mod io;
mod linalg;
pub mod special_fn;
pub mod transform;
pub mod transient;
pub mod validation;
pub mod wavelet_series;

pub use error::{Error, Result};
pub use field::Field;

/// Floating-point type accepted by the special-function layer.
pub trait Scalar: Float + FloatConst + std::fmt::Debug + Send + Sync + 'static {}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Kernel specification at the precision used throughout the solver.
pub type Kernel = special_fn::KernelSpec<f64>;
/// A position in n-dimensional space.
pub type Point = Vec<f64>;

#[inline]
pub(crate) fn lit<T: Scalar>(x: f64) -> T {
    T::from(x).expect("literal representable in scalar type")
}
