//! Special functions and quadrature kernels.

mod dd;
pub mod g_integral;
pub mod inversion;
pub mod kummer;
pub mod quadrature;

use thiserror::Error;

pub use g_integral::{g_integral, g_integral_bounded};
pub use inversion::{invert_tail, InversionConfig, TailInversion};
pub use kummer::{kummer_1f1_neg_a, kummer_1f1_neg_a_with, KummerConfig};
pub use quadrature::{integrate, QuadValue, Tolerance};

/// Characteristic-function values.
pub type ComplexValue = num_complex::Complex64;

/// Result of a numerical integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult<T> {
    pub value: T,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("integration did not converge (partial value {partial}, error estimate {abs_error})")]
    NonConvergence { partial: f64, abs_error: f64 },
}
