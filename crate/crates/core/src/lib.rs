//! Signal-quality distributions at a mobile station in multi-tier cellular
//! networks whose base stations are homogeneous Poisson point processes in
//! one, two or three dimensions.
//!
//! * [`network`] describes networks and collapses any multi-tier, faded,
//!   sectored layout to a unit-density [`network::CanonicalSystem`].
//! * [`numerics`] holds the special functions and quadrature kernels.
//! * [`analytic`] evaluates the C/I and C/(I+N) tail probabilities.
//! * [`montecarlo`] is an independent simulation oracle.

pub mod analytic;
pub mod montecarlo;
pub mod network;
pub mod numerics;
