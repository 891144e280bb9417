//! Data series behind the three standard plots. CSV only.

use std::fmt::Write as _;

use anyhow::Result;
use rayon::prelude::*;
use scs_core::analytic::{tail_ci, tail_ci2, tail_cin};
use scs_core::montecarlo::empirical_tail_ci;
use scs_core::network::{CanonicalSystem, Dimension, NetworkSpec};

pub const FIG1_DENSITIES: [f64; 3] = [0.1, 1.0, 10.0];
pub const FIG1_RATIO: f64 = 2.0;
pub const FIG3_EPSILONS: [f64; 3] = [3.0, 4.0, 5.0];

/// `count` points spread evenly in `log10` from `10^lo` to `10^hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64))
        .collect()
}

pub fn fig1_etas() -> Vec<f64> {
    log_grid(-2.0, 2.0, 21)
}

pub fn fig2_etas() -> Vec<f64> {
    log_grid(-2.0, 2.0, 41)
}

pub fn fig3_nprimes() -> Vec<f64> {
    log_grid(-4.0, 2.0, 25)
}

/// Seed of one (l, density) curve, so that no two curves share streams.
pub fn fig1_seed(seed: u64, l: u8, j: usize) -> u64 {
    seed.wrapping_mul(100).wrapping_add(10 * u64::from(l) + j as u64)
}

/// Simulated C/I tails for l = 1, 2, 3 at `ε = 2l` and three densities,
/// with the exact curve alongside.
pub fn fig1(n: usize, seed: u64) -> Result<String> {
    let etas = fig1_etas();
    let exact: Vec<f64> = etas.iter().map(|&e| tail_ci(FIG1_RATIO, e)).collect::<Result<_, _>>()?;
    let mut out = String::from("l,epsilon,density,eta,tail,ci_halfwidth,exact\n");
    for l in 1..=3u8 {
        let eps = FIG1_RATIO * f64::from(l);
        for (j, &density) in FIG1_DENSITIES.iter().enumerate() {
            let spec = NetworkSpec::single_tier(l, eps, density, 1.0, 0.0)?;
            let tail = empirical_tail_ci(&spec, &etas, n, fig1_seed(seed, l, j))?;
            for (i, p) in tail.curve.points.iter().enumerate() {
                writeln!(
                    out,
                    "{l},{eps},{density},{},{},{},{}",
                    p.eta, p.p, tail.halfwidths[i], exact[i]
                )?;
            }
        }
    }
    Ok(out)
}

/// Exact C/I tail against the two-BS approximation at l = 2, ε = 4.
pub fn fig2() -> Result<String> {
    let ratio = 2.0;
    let mut out = String::from("eta,exact,fewbs\n");
    for eta in fig2_etas() {
        writeln!(out, "{eta},{},{}", tail_ci(ratio, eta)?, tail_ci2(ratio, eta)?)?;
    }
    Ok(out)
}

/// `P(C/(I+N) > 1)` against the normalized noise for several ε at l = 2.
pub fn fig3() -> Result<String> {
    let dim = Dimension::new(2)?;
    let cells: Vec<(f64, f64)> = FIG3_EPSILONS
        .iter()
        .flat_map(|&e| fig3_nprimes().into_iter().map(move |n| (e, n)))
        .collect();
    let tails: Vec<f64> = cells
        .par_iter()
        .map(|&(eps, np)| tail_cin(&CanonicalSystem::new(dim, eps, np)?, 1.0))
        .collect::<Result<_, _>>()?;
    let mut out = String::from("epsilon,nprime,tail\n");
    for (&(eps, np), t) in cells.iter().zip(tails) {
        writeln!(out, "{eps},{np},{t}")?;
    }
    Ok(out)
}
