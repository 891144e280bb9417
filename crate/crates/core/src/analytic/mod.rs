//! Analytic tail probabilities of C/I and C/(I+N).
//!
//! Everything here works on the canonical system. For zero noise the
//! distribution of `(C/I)^{-1}` depends on the network only through the
//! ratio `ρ = ε/l`, with characteristic function `1 / ₁F₁(−1/ρ; 1−1/ρ; iω)`.

mod lookup;

use std::collections::HashMap;
use std::fmt;
use std::sync::{LazyLock, RwLock};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::network::{CanonicalSystem, Dimension, NetworkError};
use crate::numerics::{
    g_integral, integrate, invert_tail, kummer_1f1_neg_a, InversionConfig, NumericsError, Tolerance,
};

pub use lookup::{build_lookup_table, lookup, LookupTable};

#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("numeric degeneracy: {0}")]
    Degenerate(String),
    #[error("query outside table range: {0}")]
    OutOfRange(String),
    #[error("lookup table format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn check_ratio(ratio: f64) -> Result<(), AnalyticError> {
    if !(ratio.is_finite() && ratio > 1.0) {
        return Err(AnalyticError::Domain(format!(
            "path-loss ratio eps/l = {ratio} must exceed 1"
        )));
    }
    Ok(())
}

fn check_eta(eta: f64) -> Result<(), AnalyticError> {
    if eta.is_nan() || eta < 0.0 {
        return Err(AnalyticError::Domain(format!("threshold eta = {eta} must be >= 0")));
    }
    Ok(())
}

/// Which engine produced a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ExactInversion,
    ClosedForm,
    FewBs,
    MonteCarlo,
    Lookup,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::ExactInversion => "exact-inversion",
            Method::ClosedForm => "closed-form",
            Method::FewBs => "few-bs",
            Method::MonteCarlo => "montecarlo",
            Method::Lookup => "lookup",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailPoint {
    pub eta: f64,
    pub p: f64,
}

/// Tail probabilities `P(ratio > η)` on a threshold grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailCurve {
    pub points: Vec<TailPoint>,
    pub method: Method,
    pub meta: CanonicalSystem,
}

impl TailCurve {
    /// Evaluates `f` at every threshold.
    pub fn evaluate<F>(etas: &[f64], method: Method, meta: CanonicalSystem, f: F) -> Result<Self, AnalyticError>
    where
        F: Fn(f64) -> Result<f64, AnalyticError>,
    {
        let points = etas
            .iter()
            .map(|&eta| f(eta).map(|p| TailPoint { eta, p }))
            .collect::<Result<_, _>>()?;
        Ok(Self { points, method, meta })
    }

    /// Nonincreasing in `η` up to `tol`, with every value in `[0, 1]`.
    pub fn is_valid(&self, tol: f64) -> bool {
        self.points.iter().all(|p| (0.0..=1.0).contains(&p.p))
            && self
                .points
                .windows(2)
                .all(|w| w[1].eta < w[0].eta || w[1].p <= w[0].p + tol)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("eta,tail,method\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.eta, p.p, self.method));
        }
        out
    }
}

/// Characteristic function of the interference `P_I` given the nearest
/// distance `r1`, for density `lambda0` and constant power `power`.
pub fn charfn_interference_given_r1(
    lambda0: f64,
    power: f64,
    dim: Dimension,
    epsilon: f64,
    omega: f64,
    r1: f64,
) -> Result<Complex64, AnalyticError> {
    if !(r1 > 0.0 && r1.is_finite()) {
        return Err(AnalyticError::Domain(format!("r1 = {r1} must be > 0")));
    }
    let l = dim.as_f64();
    check_ratio(epsilon / l)?;
    if omega == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mass = lambda0 * dim.surface_constant() * r1.powf(l) / l;
    let f = kummer_1f1_neg_a(l / epsilon, omega * power / r1.powf(epsilon))?;
    Ok(((1.0 - f) * mass).exp())
}

/// Characteristic function of `(C/I)^{-1}`.
pub fn charfn_inv_ci(ratio: f64, omega: f64) -> Result<Complex64, AnalyticError> {
    check_ratio(ratio)?;
    let f = kummer_1f1_neg_a(1.0 / ratio, omega)?;
    if f.norm() < 1e-300 {
        return Err(AnalyticError::Degenerate(format!(
            "1F1 denominator vanished at omega = {omega}"
        )));
    }
    Ok(f.inv())
}

/// `P(C/I > η)` by inversion, with the default accuracy settings.
pub fn tail_ci(ratio: f64, eta: f64) -> Result<f64, AnalyticError> {
    tail_ci_with(ratio, eta, &InversionConfig::default())
}

pub fn tail_ci_with(ratio: f64, eta: f64, config: &InversionConfig) -> Result<f64, AnalyticError> {
    check_ratio(ratio)?;
    check_eta(eta)?;
    if eta == 0.0 {
        return Ok(1.0);
    }
    let a = 1.0 / ratio;
    let phi = |w: f64| match kummer_1f1_neg_a(a, w) {
        Ok(f) => f.inv(),
        // a is validated and w is a finite quadrature node.
        Err(_) => Complex64::new(f64::NAN, f64::NAN),
    };
    let r = invert_tail(phi, eta, config)?;
    if r.unclamped.is_nan() {
        return Err(AnalyticError::Degenerate("characteristic function produced NaN".into()));
    }
    Ok(r.tail)
}

static K_CACHE: LazyLock<RwLock<HashMap<u64, f64>>> = LazyLock::new(|| RwLock::new(HashMap::new()));

/// The constant `𝒦_ρ = P(C/I > 1)`, computed once per ratio.
pub fn k_constant(ratio: f64) -> Result<f64, AnalyticError> {
    check_ratio(ratio)?;
    let key = ratio.to_bits();
    if let Some(&k) = K_CACHE.read().expect("cache poisoned").get(&key) {
        return Ok(k);
    }
    let k = tail_ci(ratio, 1.0)?;
    Ok(*K_CACHE.write().expect("cache poisoned").entry(key).or_insert(k))
}

/// Power-law form `𝒦_ρ η^{−1/ρ}`, valid for `η ≥ 1` only.
pub fn tail_ci_closed(ratio: f64, eta: f64, k_const: f64) -> Result<f64, AnalyticError> {
    check_ratio(ratio)?;
    if eta.is_nan() || eta < 1.0 {
        return Err(AnalyticError::Domain(format!(
            "closed-form C/I tail holds only for eta >= 1, got {eta}"
        )));
    }
    Ok(k_const * eta.powf(-1.0 / ratio))
}

/// Parameters of the two-BS approximation `C/I₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FewBsParams {
    pub ratio: f64,
    /// `C_ρ = G(0, ∞)`.
    pub c_const: f64,
}

impl FewBsParams {
    pub fn new(ratio: f64) -> Result<Self, AnalyticError> {
        check_ratio(ratio)?;
        Ok(Self {
            ratio,
            c_const: g_integral(0.0, ratio)?,
        })
    }

    /// `u(η) = (ρ − 1)(1/η − 1)`.
    pub fn u_of_eta(&self, eta: f64) -> f64 {
        (self.ratio - 1.0) * (1.0 / eta - 1.0)
    }

    /// `D_ρ(η) = G(u(η), ∞)` for `η ≤ 1`.
    pub fn d_of_eta(&self, eta: f64) -> Result<f64, AnalyticError> {
        let u = self.u_of_eta(eta);
        if u <= 0.0 {
            return Ok(self.c_const);
        }
        Ok(g_integral(u, self.ratio)?)
    }

    pub fn tail(&self, eta: f64) -> Result<f64, AnalyticError> {
        check_eta(eta)?;
        if eta == 0.0 {
            return Ok(1.0);
        }
        let power = eta.powf(-1.0 / self.ratio);
        if eta >= 1.0 {
            return Ok(power * self.c_const);
        }
        let u = self.u_of_eta(eta);
        if u.is_infinite() {
            return Ok(1.0);
        }
        let d = self.d_of_eta(eta)?;
        Ok(1.0 - (1.0 + u) / u.exp() + power * d)
    }
}

/// Closed-form tail of the two-BS approximation `C/I₂`.
pub fn tail_ci2(ratio: f64, eta: f64) -> Result<f64, AnalyticError> {
    FewBsParams::new(ratio)?.tail(eta)
}

/// Mean interference from all base stations beyond the k-th nearest, given
/// its distance `r_k`: `λ₀ b_l K r_k^{l−ε} / (ε − l)`.
pub fn conditional_tail_mean(
    lambda0: f64,
    power: f64,
    dim: Dimension,
    epsilon: f64,
    r_k: f64,
) -> Result<f64, AnalyticError> {
    if !(r_k > 0.0 && r_k.is_finite()) {
        return Err(AnalyticError::Domain(format!("r_k = {r_k} must be > 0")));
    }
    let l = dim.as_f64();
    check_ratio(epsilon / l)?;
    Ok(lambda0 * dim.surface_constant() * power * r_k.powf(l - epsilon) / (epsilon - l))
}

/// Range of the rescaled nearest-BS variable in the noise expectation.
const NOISE_T_RANGE: f64 = 42.0;

/// Characteristic function of `(C/(I+N))^{-1}` in a canonical system.
///
/// With `t = b_l r₁^l / l ~ Exp(1)` the conditional characteristic function
/// collapses to `exp(−t F(iω))`, so
/// `Φ(ω) = ∫₀^∞ exp(−t F(iω) + iω N′ (l t / b_l)^{ε/l}) dt`.
pub fn charfn_inv_cin(canon: &CanonicalSystem, omega: f64) -> Result<Complex64, AnalyticError> {
    let ratio = canon.ratio();
    check_ratio(ratio)?;
    if omega == 0.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    if omega < 0.0 {
        return charfn_inv_cin(canon, -omega).map(|c| c.conj());
    }
    let f = kummer_1f1_neg_a(canon.a, omega)?;
    if canon.nprime == 0.0 {
        return Ok(f.inv());
    }
    let l = canon.dim.as_f64();
    let beta = omega * canon.nprime * (l / canon.dim.surface_constant()).powf(ratio);
    // Re F ≥ 1; rescale so the integrand envelope is e^{−s}.
    let scale = f.re;
    let decay = f / scale;
    let phase = beta * scale.powf(-ratio);
    let tol = Tolerance {
        abs: 1e-11,
        rel: 1e-11,
        max_intervals: 2000,
    };
    let r = integrate(
        |s: f64| (-(decay * s) + Complex64::new(0.0, phase * s.powf(ratio))).exp(),
        0.0,
        NOISE_T_RANGE,
        tol,
    );
    if !r.converged {
        return Err(NumericsError::NonConvergence {
            partial: r.value.norm(),
            abs_error: r.abs_error_estimate,
        }
        .into());
    }
    Ok(r.value / scale)
}

/// `P(C/(I+N) > η)` of a canonical system.
pub fn tail_cin(canon: &CanonicalSystem, eta: f64) -> Result<f64, AnalyticError> {
    tail_cin_with(canon, eta, &InversionConfig::default())
}

pub fn tail_cin_with(canon: &CanonicalSystem, eta: f64, config: &InversionConfig) -> Result<f64, AnalyticError> {
    check_eta(eta)?;
    if canon.nprime == 0.0 {
        return tail_ci_with(canon.ratio(), eta, config);
    }
    if eta == 0.0 {
        return Ok(1.0);
    }
    let failure = std::cell::RefCell::new(None);
    let phi = |w: f64| match charfn_inv_cin(canon, w) {
        Ok(v) => v,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            Complex64::new(0.0, 0.0)
        }
    };
    let r = invert_tail(phi, eta, config);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(r?.tail)
}
