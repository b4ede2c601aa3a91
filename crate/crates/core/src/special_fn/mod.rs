//! Bessel functions of integer and half-integer order, their zeros, and the
//! radial kernels built from them.
//!
//! Everything here is generic over [`Scalar`](crate::Scalar), so the same
//! routines serve `f32` and `f64` callers. The stated accuracies refer to
//! `f64`.

mod bessel;
mod kernel;
mod zeros;

pub use bessel::{bessel_j, bessel_k, bessel_y};
pub use kernel::{general_solution, modified_kernel, KernelKind, KernelSpec, RadialValue};
pub use zeros::bessel_j_zero;

pub(crate) use bessel::{gamma_half, j_over_pow, HalfOrder};

/// k-th positive zero of the radial profile of the n-dimensional general
/// solution: kπ for n = 1, otherwise the k-th zero of J_(n/2−1).
pub fn radial_profile_zero(dimension: usize, k: usize) -> crate::Result<f64> {
    if dimension == 1 {
        if k < 1 {
            return Err(crate::Error::Domain("zero index k must be >= 1".into()));
        }
        return Ok(k as f64 * std::f64::consts::PI);
    }
    bessel_j_zero((dimension as f64 - 2.0) / 2.0, k)
}
