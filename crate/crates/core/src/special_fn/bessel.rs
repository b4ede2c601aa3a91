//! Bessel functions J, Y and K of integer and half-integer order.
//!
//! Small arguments (x < 12) use the ascending power series. Larger arguments
//! use Miller's backward recurrence for integer-order J, the Hankel
//! asymptotic expansion for integer-order Y, Steed's continued fraction for
//! integer-order K, and the elementary closed forms of the spherical Bessel
//! functions for every half-integer order.

use crate::error::{Error, Result};
use crate::{lit, Scalar};

/// Crossover between ascending series and large-argument methods.
const SERIES_LIMIT: f64 = 2.0;
/// Argument beyond which integer orders use the Hankel expansion (plus n²).
const HANKEL_LIMIT: f64 = 30.0;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const MAX_TWICE_ORDER: u32 = 400;

/// Order ν stored as the integer 2ν.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct HalfOrder(pub u32);

impl HalfOrder {
    pub(crate) fn parse<T: Scalar>(nu: T) -> Result<Self> {
        let twice = nu + nu;
        let as_f64 = nu.to_f64().unwrap_or(f64::NAN);
        if !(nu >= T::zero()) || twice.fract() != T::zero() || twice > lit(MAX_TWICE_ORDER as f64) {
            return Err(Error::UnsupportedOrder(as_f64));
        }
        Ok(HalfOrder(twice.to_u32().ok_or(Error::UnsupportedOrder(as_f64))?))
    }

    fn is_integer(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// Integer part: n for ν = n, l for ν = l + 1/2.
    fn floor(self) -> u32 {
        self.0 / 2
    }

    fn value<T: Scalar>(self) -> T {
        lit::<T>(self.0 as f64) / lit(2.0)
    }
}

/// Γ(m/2) for m ≥ 1.
pub(crate) fn gamma_half<T: Scalar>(twice_arg: u32) -> T {
    debug_assert!(twice_arg >= 1);
    let (mut acc, mut arg) = if twice_arg.is_multiple_of(2) {
        (T::one(), 2u32)
    } else {
        (T::PI().sqrt(), 1u32)
    };
    while arg < twice_arg {
        acc = acc * lit::<T>(arg as f64) / lit(2.0);
        arg += 2;
    }
    acc
}

fn factorial<T: Scalar>(n: u32) -> T {
    (1..=n).fold(T::one(), |acc, k| acc * lit(k as f64))
}

/// ψ(m) for integer m ≥ 1.
fn digamma_int<T: Scalar>(m: u32) -> T {
    let harmonic = (1..m).fold(T::zero(), |acc, k| acc + T::one() / lit(k as f64));
    harmonic - lit(EULER_GAMMA)
}

/// J_ν(x) / x^ν by its ascending series; finite at x = 0.
pub(crate) fn j_over_pow_series<T: Scalar>(order: HalfOrder, x: T) -> T {
    let nu: T = order.value();
    let half = lit::<T>(0.5);
    let q = x * x / lit(4.0);
    let mut term = half.powf(nu) / gamma_half::<T>(order.0 + 2);
    let mut sum = term;
    for k in 1..400 {
        let kf: T = lit(k as f64);
        term = -term * q / (kf * (kf + nu));
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() * lit(0.1) {
            break;
        }
    }
    sum
}

/// J_ν(x) / x^ν for any x ≥ 0.
pub(crate) fn j_over_pow<T: Scalar>(order: HalfOrder, x: T) -> T {
    if x < lit(SERIES_LIMIT) {
        j_over_pow_series(order, x)
    } else {
        bessel_j_order(order, x) / x.powf(order.value())
    }
}

fn j_series<T: Scalar>(order: HalfOrder, x: T) -> T {
    if x == T::zero() {
        return if order.0 == 0 { T::one() } else { T::zero() };
    }
    j_over_pow_series(order, x) * x.powf(order.value())
}

/// Miller's backward recurrence for J_n, normalised by J_0 + 2ΣJ_2k = 1.
fn j_int_miller<T: Scalar>(n: u32, x: T) -> T {
    let xf = x.to_f64().unwrap_or(0.0);
    let top = (n as f64).max(xf);
    let mut start = (top + 30.0 + 3.0 * top.sqrt()).ceil() as u32;
    if start % 2 == 1 {
        start += 1;
    }
    let big: T = lit(1e100);
    let two_over_x = lit::<T>(2.0) / x;
    let mut above = T::zero();
    let mut cur = lit::<T>(1e-30);
    let mut ans = T::zero();
    let mut norm = T::zero();
    if start == n {
        ans = cur;
    }
    for k in (1..=start).rev() {
        let below = lit::<T>(k as f64) * two_over_x * cur - above;
        above = cur;
        cur = below;
        if cur.abs() > big {
            let s = T::one() / big;
            cur = cur * s;
            above = above * s;
            ans = ans * s;
            norm = norm * s;
        }
        let idx = k - 1;
        if idx == n {
            ans = cur;
        }
        if idx == 0 {
            norm = norm + cur;
        } else if idx % 2 == 0 {
            norm = norm + cur + cur;
        }
    }
    ans / norm
}

/// Spherical Bessel j_l(x) for x ≥ 12.
fn spherical_j_large<T: Scalar>(l: u32, x: T) -> T {
    let (s, c) = (x.sin(), x.cos());
    let j0 = s / x;
    if l == 0 {
        return j0;
    }
    let j1 = s / (x * x) - c / x;
    if (l as f64) < x.to_f64().unwrap_or(0.0) {
        let (mut prev, mut cur) = (j0, j1);
        for k in 1..l {
            let next = lit::<T>((2 * k + 1) as f64) / x * cur - prev;
            prev = cur;
            cur = next;
        }
        return cur;
    }
    // Miller downward for l beyond the turning point.
    let xf = x.to_f64().unwrap_or(0.0);
    let start = (l as f64 + 30.0 + xf + 3.0 * xf.sqrt()).ceil() as u32;
    let big: T = lit(1e100);
    let mut above = T::zero();
    let mut cur = lit::<T>(1e-30);
    let mut ans = T::zero();
    let mut f1 = T::zero();
    for k in (1..=start).rev() {
        let below = lit::<T>((2 * k + 1) as f64) / x * cur - above;
        above = cur;
        cur = below;
        if cur.abs() > big {
            let s = T::one() / big;
            cur = cur * s;
            above = above * s;
            ans = ans * s;
            f1 = f1 * s;
        }
        let idx = k - 1;
        if idx == l {
            ans = cur;
        }
        if idx == 1 {
            f1 = cur;
        }
    }
    // cur holds f_0 now.
    if j0.abs() >= j1.abs() {
        ans * j0 / cur
    } else {
        ans * j1 / f1
    }
}

/// Spherical Bessel y_l(x) by upward recurrence (stable for y).
fn spherical_y<T: Scalar>(l: u32, x: T) -> T {
    let (s, c) = (x.sin(), x.cos());
    let y0 = -c / x;
    if l == 0 {
        return y0;
    }
    let y1 = -c / (x * x) - s / x;
    let (mut prev, mut cur) = (y0, y1);
    for k in 1..l {
        let next = lit::<T>((2 * k + 1) as f64) / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn sph_prefactor<T: Scalar>(x: T) -> T {
    (lit::<T>(2.0) * x / T::PI()).sqrt()
}

pub(crate) fn bessel_j_order<T: Scalar>(order: HalfOrder, x: T) -> T {
    if x < lit(SERIES_LIMIT) {
        j_series(order, x)
    } else if order.is_integer() && x > lit(HANKEL_LIMIT + (order.floor() * order.floor()) as f64) {
        j_int_hankel(order.floor(), x)
    } else if order.is_integer() {
        j_int_miller(order.floor(), x)
    } else {
        sph_prefactor(x) * spherical_j_large(order.floor(), x)
    }
}

/// Hankel asymptotic P and Q for order ν at large x.
fn hankel_pq<T: Scalar>(nu: T, x: T) -> (T, T) {
    let mu = lit::<T>(4.0) * nu * nu;
    let eight_x = lit::<T>(8.0) * x;
    let mut p = T::one();
    let mut q = T::zero();
    let mut a = T::one();
    let mut last = T::infinity();
    for k in 1..200u32 {
        let odd = lit::<T>((2 * k - 1) as f64);
        a = a * (mu - odd * odd) / (lit::<T>(k as f64) * eight_x);
        if a.abs() > last || a == T::zero() {
            break;
        }
        last = a.abs();
        let sign = if (k / 2) % 2 == 0 { T::one() } else { -T::one() };
        if k % 2 == 0 {
            p = p + sign * a;
        } else {
            q = q + sign * a;
        }
        if a.abs() < T::epsilon() * lit(1e-2) {
            break;
        }
    }
    (p, q)
}

fn j_int_hankel<T: Scalar>(n: u32, x: T) -> T {
    let nu: T = lit(n as f64);
    let (p, q) = hankel_pq(nu, x);
    let chi = x - (nu / lit(2.0) + lit(0.25)) * T::PI();
    (lit::<T>(2.0) / (T::PI() * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// J_0..J_m at x by Miller's recurrence, m large enough that the tail is
/// negligible.
fn j_int_sequence<T: Scalar>(x: T) -> Vec<T> {
    let xf = x.to_f64().unwrap_or(0.0);
    let mut start = (xf + 30.0 + 3.0 * xf.sqrt()).ceil() as usize;
    start += start % 2;
    let two_over_x = lit::<T>(2.0) / x;
    let mut f = vec![T::zero(); start + 2];
    f[start] = lit(1e-30);
    for k in (1..=start).rev() {
        f[k - 1] = lit::<T>(k as f64) * two_over_x * f[k] - f[k + 1];
        if f[k - 1].abs() > lit(1e100) {
            for v in f[k - 1..].iter_mut() {
                *v = *v * lit(1e-100);
            }
        }
    }
    let norm = f[0] + lit::<T>(2.0) * f.iter().skip(2).step_by(2).fold(T::zero(), |a, v| a + *v);
    f.truncate(start + 1);
    f.into_iter().map(|v| v / norm).collect()
}

/// Y_0 and Y_1 from the Neumann series
/// Y_0 = (2/π)(ln(x/2) + γ)J_0 − (4/π)Σ_k (−1)^k J_2k / k and its derivative.
fn y01_neumann<T: Scalar>(x: T) -> (T, T) {
    let j = j_int_sequence(x);
    let two_pi = lit::<T>(2.0) / T::PI();
    let log = (x / lit(2.0)).ln() + lit(0.577_215_664_901_532_9);
    let (mut s, mut ds) = (T::zero(), T::zero());
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { T::one() } else { -T::one() };
        let kf: T = lit(k as f64);
        s = s + sign * j[2 * k] / kf;
        ds = ds + sign * (j[2 * k - 1] - j[2 * k + 1]) / (lit::<T>(2.0) * kf);
        k += 1;
    }
    let y0 = two_pi * log * j[0] - lit::<T>(2.0) * two_pi * s;
    let dy0 = two_pi * (j[0] / x - log * j[1]) - lit::<T>(2.0) * two_pi * ds;
    (y0, -dy0)
}

fn y_int_hankel<T: Scalar>(n: u32, x: T) -> T {
    let nu: T = lit(n as f64);
    let (p, q) = hankel_pq(nu, x);
    let chi = x - (nu / lit(2.0) + lit(0.25)) * T::PI();
    (lit::<T>(2.0) / (T::PI() * x)).sqrt() * (p * chi.sin() + q * chi.cos())
}

/// Ascending series for Y_n, integer n.
fn y_int_series<T: Scalar>(n: u32, x: T) -> T {
    let half = x / lit(2.0);
    let q = half * half;
    let pi = T::PI();
    let mut finite = T::zero();
    if n > 0 {
        let mut qk = T::one();
        for k in 0..n {
            finite = finite + factorial::<T>(n - k - 1) / factorial::<T>(k) * qk;
            qk = qk * q;
        }
        finite = -finite * half.powi(-(n as i32)) / pi;
    }
    let log_part = lit::<T>(2.0) / pi * half.ln() * j_series(HalfOrder(2 * n), x);
    let mut sum = T::zero();
    let mut term = T::one() / factorial::<T>(n);
    for k in 0..400u32 {
        if k > 0 {
            term = -term * q / (lit::<T>(k as f64) * lit::<T>((n + k) as f64));
        }
        let contrib = (digamma_int::<T>(k + 1) + digamma_int::<T>(n + k + 1)) * term;
        sum = sum + contrib;
        if k > 2 && contrib.abs() <= T::epsilon() * lit(1e-2) * sum.abs().max(T::one()) {
            break;
        }
    }
    finite + log_part - half.powi(n as i32) * sum / pi
}

fn bessel_y_order<T: Scalar>(order: HalfOrder, x: T) -> T {
    if !order.is_integer() {
        return sph_prefactor(x) * spherical_y(order.floor(), x);
    }
    let n = order.floor();
    if x < lit(SERIES_LIMIT) {
        return y_int_series(n, x);
    }
    let (y0, y1) = if x > lit(HANKEL_LIMIT) {
        (y_int_hankel(0, x), y_int_hankel(1, x))
    } else {
        y01_neumann(x)
    };
    if n == 0 {
        return y0;
    }
    let (mut prev, mut cur) = (y0, y1);
    for k in 1..n {
        let next = lit::<T>((2 * k) as f64) / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn i_int_series<T: Scalar>(n: u32, x: T) -> T {
    let half = x / lit(2.0);
    let q = half * half;
    let mut term = half.powi(n as i32) / factorial::<T>(n);
    let mut sum = term;
    for k in 1..400u32 {
        term = term * q / (lit::<T>(k as f64) * lit::<T>((n + k) as f64));
        sum = sum + term;
        if term <= T::epsilon() * lit(1e-2) * sum {
            break;
        }
    }
    sum
}

/// Ascending series for K_n, integer n, intended for x ≤ 2.
fn k_int_series<T: Scalar>(n: u32, x: T) -> T {
    let half = x / lit(2.0);
    let q = half * half;
    let mut finite = T::zero();
    if n > 0 {
        let mut qk = T::one();
        for k in 0..n {
            finite = finite + factorial::<T>(n - k - 1) / factorial::<T>(k) * qk;
            qk = -qk * q;
        }
        finite = finite * half.powi(-(n as i32)) / lit(2.0);
    }
    let sign_n = if n.is_multiple_of(2) { T::one() } else { -T::one() };
    let log_part = -sign_n * half.ln() * i_int_series(n, x);
    let mut sum = T::zero();
    let mut term = T::one() / factorial::<T>(n);
    for k in 0..400u32 {
        if k > 0 {
            term = term * q / (lit::<T>(k as f64) * lit::<T>((n + k) as f64));
        }
        let contrib = (digamma_int::<T>(k + 1) + digamma_int::<T>(n + k + 1)) * term;
        sum = sum + contrib;
        if k > 2 && contrib.abs() <= T::epsilon() * lit(1e-2) * sum.abs() {
            break;
        }
    }
    finite + log_part + sign_n * half.powi(n as i32) * sum / lit(2.0)
}

/// Steed's continued fraction (CF2) for K_0 and K_1, x ≥ 2.
fn k01_steed<T: Scalar>(x: T) -> (T, T) {
    let two: T = lit(2.0);
    let mut b = two * (T::one() + x);
    let mut d = T::one() / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = T::zero();
    let mut q2 = T::one();
    let a1: T = lit(0.25);
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = T::one() + q * delh;
    for i in 2..10_000u32 {
        let fi: T = lit(i as f64);
        a = a - lit::<T>(2.0 * (i - 1) as f64);
        c = -a * c / fi;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q = q + c * qnew;
        b = b + two;
        d = T::one() / (b + a * d);
        delh = (b * d - T::one()) * delh;
        h = h + delh;
        let dels = q * delh;
        s = s + dels;
        if (dels / s).abs() < T::epsilon() * lit(0.5) {
            break;
        }
    }
    h = a1 * h;
    let k0 = (T::PI() / (two * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + lit(0.5) - h) / x;
    (k0, k1)
}

fn bessel_k_order<T: Scalar>(order: HalfOrder, x: T) -> T {
    if !order.is_integer() {
        let l = order.floor();
        let two_x = x + x;
        let mut sum = T::zero();
        for j in 0..=l {
            sum = sum + factorial::<T>(l + j) / (factorial::<T>(j) * factorial::<T>(l - j) * two_x.powi(j as i32));
        }
        return (T::PI() / two_x).sqrt() * (-x).exp() * sum;
    }
    let n = order.floor();
    if x <= lit(2.0) {
        return k_int_series(n, x);
    }
    let (k0, k1) = k01_steed(x);
    if n == 0 {
        return k0;
    }
    let (mut prev, mut cur) = (k0, k1);
    for k in 1..n {
        let next = prev + lit::<T>((2 * k) as f64) / x * cur;
        prev = cur;
        cur = next;
    }
    cur
}

/// Bessel function of the first kind J_ν(x), ν ∈ {0, 1/2, 1, 3/2, ...}, x ≥ 0.
pub fn bessel_j<T: Scalar>(nu: T, x: T) -> Result<T> {
    let order = HalfOrder::parse(nu)?;
    if !(x >= T::zero()) {
        return Err(Error::Domain(format!("bessel_j requires x >= 0, got {:?}", x)));
    }
    Ok(bessel_j_order(order, x))
}

/// Bessel function of the second kind Y_ν(x), x > 0.
///
/// Tends to −∞ as x → 0⁺; for arguments small enough to overflow the result
/// is `-inf`.
pub fn bessel_y<T: Scalar>(nu: T, x: T) -> Result<T> {
    let order = HalfOrder::parse(nu)?;
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("bessel_y requires x > 0, got {:?}", x)));
    }
    let v = bessel_y_order(order, x);
    Ok(if v.is_nan() { T::neg_infinity() } else { v })
}

/// Modified Bessel function of the second kind K_ν(x), x > 0.
pub fn bessel_k<T: Scalar>(nu: T, x: T) -> Result<T> {
    let order = HalfOrder::parse(nu)?;
    if !(x > T::zero()) {
        return Err(Error::Domain(format!("bessel_k requires x > 0, got {:?}", x)));
    }
    Ok(bessel_k_order(order, x))
}
