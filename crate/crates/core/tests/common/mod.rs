//! Independent oracles shared by the integration suites.
//!
//! Nothing here calls into the library's special-function or quadrature code.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

/// Fixed-point fraction bits of the series oracle.
const FRAC_BITS: u32 = 640;

/// Exact dyadic decomposition `x = mantissa · 2^exponent`.
fn dyadic(x: f64) -> (BigInt, i32) {
    if x == 0.0 {
        return (BigInt::zero(), 0);
    }
    let bits = x.to_bits();
    let sign = if bits >> 63 == 1 { -1 } else { 1 };
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    let (mantissa, exponent) = if exp_bits == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), exp_bits - 1075)
    };
    (BigInt::from(mantissa) * sign, exponent)
}

/// `x · 2^FRAC_BITS` as an integer (exact for the inputs used in tests).
fn to_fixed(x: f64) -> BigInt {
    let (m, e) = dyadic(x);
    let shift = FRAC_BITS as i32 + e;
    assert!(shift >= 0, "value {x} too small for the fixed-point oracle");
    m << (shift as u32)
}

fn fixed_to_f64(v: &BigInt) -> f64 {
    // Keep ~80 significant bits before converting.
    let bits = v.bits() as i64;
    let drop = (bits - 80).max(0) as u32;
    let head = (v >> drop).to_f64().unwrap();
    head * 2f64.powi(drop as i32 - FRAC_BITS as i32)
}

/// ₁F₁(−a; 1−a; iω) from the Maclaurin series in exact big-integer
/// fixed-point arithmetic, at least 200 terms and until the terms vanish.
pub fn kummer_series_oracle(a: f64, omega: f64) -> Complex64 {
    let x = to_fixed(omega);
    let (a_m, a_e) = dyadic(a);
    assert!(a_e < 0);
    let a_den_bits = (-a_e) as u32;
    let one = BigInt::one() << FRAC_BITS;
    // S = Σ_k (iω)^k / (k!(k − a)); result = −a S.
    // term_k = ω^k/k! in fixed point.
    let mut term = one.clone();
    // k = 0: 1/(0 − a) · (−a) = 1 contributes to the real part directly.
    let mut re = BigInt::zero();
    let mut im = BigInt::zero();
    let threshold = BigInt::one() << 8u32;
    let mut k: u64 = 0;
    loop {
        k += 1;
        term = (&term * &x) >> FRAC_BITS;
        term /= BigInt::from(k);
        // term / (k − a) = term · 2^d / (k·2^d − m)
        let denom = (BigInt::from(k) << a_den_bits) - &a_m;
        let t = (&term << a_den_bits) / denom;
        match k % 4 {
            0 => re += &t,
            1 => im += &t,
            2 => re -= &t,
            _ => im -= &t,
        }
        let mag = if t < BigInt::zero() { -t } else { t };
        if k >= 200 && (k as f64) > 3.0 * omega.abs() && mag < threshold {
            break;
        }
    }
    // Multiply by −a.
    let scale = |v: &BigInt| -> f64 { -a * fixed_to_f64(v) };
    Complex64::new(1.0 + scale(&re), scale(&im))
}

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels.is_multiple_of(2));
    let h = (b - a) / panels as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..panels {
        let v = f(a + h * i as f64);
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

/// The G integrand evaluated independently of the library.
pub fn g_integrand(v: f64, ratio: f64) -> f64 {
    v * (-v).exp() / (1.0 + v / (ratio - 1.0)).powf(1.0 / ratio)
}

/// 10⁶-panel Simpson oracle for `G(0, ∞)` truncated at 60.
pub fn g_simpson_oracle(lower: f64, ratio: f64) -> f64 {
    simpson(|v| g_integrand(v, ratio), lower, 60.0, 1_000_000)
}

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

/// Joint 99% half-width for the difference of two independent proportions.
pub fn joint_halfwidth(p1: f64, n1: usize, p2: f64, n2: usize) -> f64 {
    Z99 * (p1 * (1.0 - p1) / n1 as f64 + p2 * (1.0 - p2) / n2 as f64).sqrt()
}
