use super::bessel::{bessel_j_order, HalfOrder};
use crate::error::{Error, Result};
use crate::{lit, Scalar};

/// Sign-change scan step; zeros of J_ν are more than 2.4 apart for ν ≥ 0.
const SCAN_STEP: f64 = 0.25;

/// k-th positive zero of J_ν (k ≥ 1), ascending in k.
pub fn bessel_j_zero<T: Scalar>(nu: T, k: usize) -> Result<T> {
    let order = HalfOrder::parse(nu)?;
    if k < 1 {
        return Err(Error::Domain("zero index k must be >= 1".into()));
    }
    Ok(bessel_j_zeros(order, k).pop().expect("k >= 1"))
}

/// The first `count` positive zeros of J_ν.
pub(crate) fn bessel_j_zeros<T: Scalar>(order: HalfOrder, count: usize) -> Vec<T> {
    if order.0 == 1 {
        // J_{1/2}(x) ∝ sin x
        return (1..=count).map(|k| lit::<T>(k as f64) * T::PI()).collect();
    }
    let f = |x: T| bessel_j_order(order, x);
    let step: T = lit(SCAN_STEP);
    let mut zeros = Vec::with_capacity(count);
    // J_ν is positive on (0, j_{ν,1}) and j_{ν,1} > ν.
    let nu: T = lit::<T>(order.0 as f64) / lit(2.0);
    let mut lo = nu.max(step);
    let mut flo = f(lo);
    while zeros.len() < count {
        let hi = lo + step;
        let fhi = f(hi);
        if fhi == T::zero() {
            zeros.push(hi);
            lo = hi + step * lit(0.01);
            flo = f(lo);
            continue;
        }
        if flo.signum() != fhi.signum() {
            zeros.push(bisect(&f, lo, hi, flo));
        }
        lo = hi;
        flo = fhi;
    }
    zeros
}

fn bisect<T: Scalar>(f: &impl Fn(T) -> T, mut lo: T, mut hi: T, mut flo: T) -> T {
    for _ in 0..200 {
        let mid = (lo + hi) / lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == T::zero() {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    (lo + hi) / lit(2.0)
}
