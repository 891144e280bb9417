//! `G(lower, upper) = ∫ v e^{−v} (1 + v/(ρ − 1))^{−1/ρ} dv` with `ρ = ε/l`.

use super::quadrature::{integrate, Tolerance};
use super::NumericsError;

/// Remainder bound for cutting the infinite range.
const TAIL_BOUND: f64 = 1e-13;

fn check_ratio(ratio: f64) -> Result<(), NumericsError> {
    if ratio.is_nan() || ratio <= 1.0 {
        return Err(NumericsError::Domain(format!(
            "path-loss ratio eps/l = {ratio} must exceed 1"
        )));
    }
    Ok(())
}

fn integrand(v: f64, ratio: f64) -> f64 {
    let denom = (1.0 + v / (ratio - 1.0)).powf(1.0 / ratio);
    v * (-v).exp() / denom
}

/// Smallest `b ≥ lower` with `∫_b^∞ v e^{−v} dv = (1 + b) e^{−b} ≤ TAIL_BOUND`.
///
/// The denominator of the integrand is at least one, so this also bounds the
/// remainder of `G`.
fn cutoff(lower: f64) -> f64 {
    let mut b = lower.max(1.0);
    while (1.0 + b) * (-b).exp() > TAIL_BOUND {
        b += 1.0;
    }
    // Keep ~40 e-folds past the lower limit so far-tail values stay accurate
    // relative to their own size.
    b.max(lower + 40.0)
}

/// `G(lower, upper)` over a finite range.
pub fn g_integral_bounded(lower: f64, upper: f64, ratio: f64) -> Result<f64, NumericsError> {
    check_ratio(ratio)?;
    if lower.is_nan() || upper.is_nan() || lower < 0.0 || upper < lower {
        return Err(NumericsError::Domain(format!(
            "G integral needs 0 <= lower <= upper, got [{lower}, {upper}]"
        )));
    }
    if lower == upper {
        return Ok(0.0);
    }
    let tol = Tolerance {
        abs: 1e-14,
        rel: 1e-13,
        max_intervals: 500,
    };
    let result = integrate(|v| integrand(v, ratio), lower, upper, tol);
    if !result.converged {
        return Err(NumericsError::NonConvergence {
            partial: result.value,
            abs_error: result.abs_error_estimate,
        });
    }
    Ok(result.value)
}

/// `G(lower, ∞)`. `C_ρ = g_integral(0, ρ)` and `D_ρ(η) = g_integral(u(η), ρ)`.
pub fn g_integral(lower: f64, ratio: f64) -> Result<f64, NumericsError> {
    check_ratio(ratio)?;
    if lower.is_nan() || lower < 0.0 {
        return Err(NumericsError::Domain(format!(
            "G integral lower limit {lower} must be >= 0"
        )));
    }
    if lower.is_infinite() {
        return Ok(0.0);
    }
    let upper = cutoff(lower);
    if upper <= lower {
        return Ok(0.0);
    }
    g_integral_bounded(lower, upper, ratio)
}
