//! The confluent hypergeometric function ₁F₁(−a; 1−a; iω) for 0 < a < 1.
//!
//! Two branches are used:
//!
//! * `|ω| ≤ ω_switch`: the Maclaurin series
//!   `−a Σ_k (iω)^k / (k! (k − a))`, accumulated in double-double arithmetic.
//!   The terms grow to roughly `e^{|ω|}` before they decay, so plain `f64`
//!   summation would lose all significance well before `|ω| = 30`.
//! * `|ω| > ω_switch`: the identity `₁F₁(−a; 1−a; z) = −a (−z)^a γ(−a, −z)`
//!   with `γ(−a, x) = Γ(−a) − Γ(−a, x)` and the large-argument expansion of
//!   the upper incomplete gamma function. With `x = −iω` this gives
//!
//!   `Γ(1−a) x^a + (a e^{iω} / x) Σ_k (−a−1)(−a−2)…(−a−k) / x^k`.
//!
//! The expansion is asymptotic; it is truncated just before its smallest
//! term, which at `|ω| = 30` is already below `1e-12`.

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use super::dd::DoubleDouble;
use super::NumericsError;

pub const DEFAULT_OMEGA_SWITCH: f64 = 30.0;

/// Tunables for [`kummer_1f1_neg_a_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KummerConfig {
    /// Crossover between the series and asymptotic branches.
    pub omega_switch: f64,
}

impl Default for KummerConfig {
    fn default() -> Self {
        Self {
            omega_switch: DEFAULT_OMEGA_SWITCH,
        }
    }
}

fn check(a: f64, omega: f64) -> Result<(), NumericsError> {
    if !(a > 0.0 && a < 1.0) {
        return Err(NumericsError::Domain(format!(
            "Kummer parameter a = {a} must lie in (0, 1)"
        )));
    }
    if !omega.is_finite() {
        return Err(NumericsError::Domain(format!(
            "Kummer argument omega = {omega} is not finite"
        )));
    }
    Ok(())
}

/// ₁F₁(−a; 1−a; iω) with the default branch crossover.
pub fn kummer_1f1_neg_a(a: f64, omega: f64) -> Result<Complex64, NumericsError> {
    kummer_1f1_neg_a_with(a, omega, KummerConfig::default())
}

pub fn kummer_1f1_neg_a_with(
    a: f64,
    omega: f64,
    config: KummerConfig,
) -> Result<Complex64, NumericsError> {
    check(a, omega)?;
    if omega.abs() <= config.omega_switch {
        Ok(series_branch(a, omega))
    } else {
        Ok(asymptotic_branch(a, omega))
    }
}

/// Maclaurin series branch. Accurate for any `ω` but costs `O(e·|ω|)` terms.
pub fn series_branch(a: f64, omega: f64) -> Complex64 {
    if omega == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    // k = 0 term is 1/(−a); scaled by −a it contributes exactly 1.
    let mut re = DoubleDouble::from_f64(1.0);
    let mut im = DoubleDouble::ZERO;
    let minus_a = DoubleDouble::from_f64(-a);
    // power = ω^k / k!
    let mut power = DoubleDouble::from_f64(1.0);
    let scale = omega.abs().max(1.0);
    let mut k = 0u32;
    loop {
        k += 1;
        power = power.mul_f64(omega).div_f64(f64::from(k));
        let term = power / DoubleDouble::diff(f64::from(k), a) * minus_a;
        match k % 4 {
            0 => re = re + term,
            1 => im = im + term,
            2 => re = re - term,
            _ => im = im - term,
        }
        let t = term.abs().to_f64();
        if f64::from(k) > scale && t < 1e-34 * scale.powf(a) {
            break;
        }
        if k > 20_000 {
            break;
        }
    }
    Complex64::new(re.to_f64(), im.to_f64())
}

/// Large-|ω| branch from the incomplete-gamma identity.
pub fn asymptotic_branch(a: f64, omega: f64) -> Complex64 {
    if omega < 0.0 {
        return asymptotic_branch(a, -omega).conj();
    }
    // x = −iω = ω e^{−iπ/2} on the principal branch.
    let x = Complex64::new(0.0, -omega);
    let x_pow_a = Complex64::from_polar(omega.powf(a), -0.5 * std::f64::consts::PI * a);
    let leading = x_pow_a * gamma(1.0 - a);

    let s = -a;
    let mut sum = Complex64::new(1.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    let mut last = 1.0;
    for k in 1..200 {
        let next = term * ((s - f64::from(k)) / x);
        let mag = next.norm();
        if mag >= last {
            break;
        }
        sum += next;
        term = next;
        last = mag;
        if mag < 1e-17 {
            break;
        }
    }
    let phase = Complex64::from_polar(1.0, omega);
    leading + phase * sum * a / x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_argument_is_one() {
        for a in [0.1, 0.5, 0.9] {
            let v = kummer_1f1_neg_a(a, 0.0).unwrap();
            assert_eq!(v, Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn conjugate_symmetry() {
        for a in [0.2, 0.5, 0.8] {
            for w in [0.3, 4.0, 29.0, 31.0, 500.0] {
                let p = kummer_1f1_neg_a(a, w).unwrap();
                let m = kummer_1f1_neg_a(a, -w).unwrap();
                assert!((p - m.conj()).norm() <= 1e-14 * p.norm());
            }
        }
    }

    #[test]
    fn small_argument_matches_leading_terms() {
        // 1 − a z/(1−a) − a z²/(2(2−a)) for small z = iω.
        let a = 0.5;
        let w = 1e-3;
        let z = Complex64::new(0.0, w);
        let approx = 1.0 - z * (a / (1.0 - a)) - z * z * (a / (2.0 * (2.0 - a)));
        let v = kummer_1f1_neg_a(a, w).unwrap();
        assert!((v - approx).norm() < 1e-10);
    }

    #[test]
    fn real_part_at_least_one() {
        // Re ₁F₁(−a;1−a;iω) = 1 + a ∫₀¹ t^{−a−1}(1 − cos ωt) dt ≥ 1.
        for a in [0.1, 0.5, 0.9] {
            for w in [0.5, 10.0, 60.0, 1000.0] {
                assert!(kummer_1f1_neg_a(a, w).unwrap().re >= 1.0);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(kummer_1f1_neg_a(0.0, 1.0).is_err());
        assert!(kummer_1f1_neg_a(1.0, 1.0).is_err());
        assert!(kummer_1f1_neg_a(0.5, f64::NAN).is_err());
        assert!(kummer_1f1_neg_a(0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn branches_agree_across_crossover() {
        for a in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let mut w = 0.8 * DEFAULT_OMEGA_SWITCH;
            while w <= 1.2 * DEFAULT_OMEGA_SWITCH {
                let s = series_branch(a, w);
                let z = asymptotic_branch(a, w);
                assert!(
                    (s - z).norm() <= 1e-7 * s.norm(),
                    "a={a} w={w}: {s} vs {z}"
                );
                w += 0.25;
            }
        }
    }
}
