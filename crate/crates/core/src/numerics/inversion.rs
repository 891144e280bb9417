//! Tail probabilities `P(1/X > η)` of a positive random variable `X` from
//! its characteristic function.
//!
//! The two-sided inversion integral is folded onto `[0, ∞)` with conjugate
//! symmetry, which gives the Gil-Pelaez form
//!
//! `P(X ≤ y) = 1/2 − (1/π) ∫₀^∞ Im[e^{−iωy} Φ(ω)] / ω dω`,  `y = 1/η`.
//!
//! The integrand oscillates at frequency `y` with an envelope that decays
//! only algebraically (`O(ω^{−1−l/ε})` for the interference ratios), so the
//! range is cut into half-period panels, each integrated adaptively, and the
//! partial sums are extrapolated with Wynn's epsilon algorithm.

use num_complex::Complex64;

use super::quadrature::{integrate, Tolerance};
use super::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    /// Target absolute accuracy of the tail probability.
    pub abs_tol: f64,
    /// Panels are added at least until this frequency is covered.
    pub min_omega: f64,
    pub max_panels: usize,
    /// Partial sums fed to the epsilon table.
    pub wynn_window: usize,
}

impl Default for InversionConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-7,
            min_omega: 200.0,
            max_panels: 400_000,
            wynn_window: 15,
        }
    }
}

/// Outcome of one inversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailInversion {
    /// Clamped to `[0, 1]`.
    pub tail: f64,
    pub unclamped: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

impl TailInversion {
    fn exact(tail: f64) -> Self {
        Self {
            tail,
            unclamped: tail,
            abs_error_estimate: 0.0,
            evaluations: 0,
        }
    }
}

/// Wynn's epsilon algorithm; returns the deepest even-column estimate.
pub(crate) fn wynn_epsilon(seq: &[f64]) -> f64 {
    let n = seq.len();
    let Some(&last) = seq.last() else {
        return 0.0;
    };
    let mut best = last;
    let mut prev = vec![0.0; n + 1];
    let mut cur = seq.to_vec();
    for k in 1..n {
        let mut next = Vec::with_capacity(n - k);
        for j in 0..(n - k) {
            let d = cur[j + 1] - cur[j];
            if d.abs() <= 1e-15 * cur[j + 1].abs().max(1e-300) {
                // Column converged; nothing more to extrapolate.
                return if k % 2 == 1 { cur[n - k] } else { best };
            }
            next.push(prev[j + 1] + 1.0 / d);
        }
        prev = cur;
        cur = next;
        if k % 2 == 0 {
            if let Some(&v) = cur.last() {
                if v.is_finite() {
                    best = v;
                }
            }
        }
    }
    best
}

/// `sin(x)/x` with the removable singularity filled in.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// `P(1/X > η)` where `charfn` is the characteristic function of `X > 0`.
pub fn invert_tail<F>(charfn: F, eta: f64, config: &InversionConfig) -> Result<TailInversion, NumericsError>
where
    F: Fn(f64) -> Complex64,
{
    if eta.is_nan() || eta < 0.0 {
        return Err(NumericsError::Domain(format!(
            "threshold eta = {eta} must be >= 0"
        )));
    }
    if eta == 0.0 {
        return Ok(TailInversion::exact(1.0));
    }
    if eta.is_infinite() {
        return Ok(TailInversion::exact(0.0));
    }
    let y = 1.0 / eta;
    let integrand = |w: f64| {
        let phi = charfn(w);
        phi.im * (w * y).cos() / w - phi.re * y * sinc(w * y)
    };

    let half_period = std::f64::consts::PI / y;
    let panel_tol = Tolerance {
        abs: 1e-3 * config.abs_tol,
        rel: 1e-12,
        max_intervals: 400,
    };

    let mut partial = 0.0;
    let mut quad_error = 0.0;
    let mut evaluations = 0;
    let mut sums: Vec<f64> = Vec::new();
    let mut estimates: Vec<f64> = Vec::new();
    let mut panel = 0usize;
    loop {
        let lo = panel as f64 * half_period;
        let hi = lo + half_period;
        let r = integrate(integrand, lo, hi, panel_tol);
        partial += r.value;
        quad_error += r.abs_error_estimate;
        evaluations += r.evaluations;
        panel += 1;

        sums.push(partial);
        if sums.len() > config.wynn_window {
            sums.remove(0);
        }
        let estimate = if sums.len() >= 3 {
            wynn_epsilon(&sums)
        } else {
            partial
        };
        estimates.push(estimate);

        let m = estimates.len();
        if hi >= config.min_omega && m >= 6 {
            let d1 = (estimates[m - 1] - estimates[m - 2]).abs();
            let d2 = (estimates[m - 2] - estimates[m - 3]).abs();
            let err = (d1.max(d2) + quad_error) / std::f64::consts::PI;
            if err <= config.abs_tol {
                let unclamped = 0.5 - estimate / std::f64::consts::PI;
                return Ok(TailInversion {
                    tail: unclamped.clamp(0.0, 1.0),
                    unclamped,
                    abs_error_estimate: err,
                    evaluations,
                });
            }
        }
        if panel >= config.max_panels {
            let m = estimates.len();
            let d = if m >= 2 {
                (estimates[m - 1] - estimates[m - 2]).abs()
            } else {
                f64::INFINITY
            };
            return Err(NumericsError::NonConvergence {
                partial: (0.5 - estimate / std::f64::consts::PI).clamp(0.0, 1.0),
                abs_error: (d + quad_error) / std::f64::consts::PI,
            });
        }
    }
}
