//! Monte Carlo simulation of Poisson base-station fields.
//!
//! Distances come from the radial recursion: `T_i = λ b_l R_i^l / l` are the
//! arrival times of a unit-rate Poisson process. Realization `i` of a run
//! with seed `s` draws from ChaCha8 stream `i` of key `s`, so results do not
//! depend on the number of worker threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, LogNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::{conditional_tail_mean, Method, TailCurve, TailPoint};
use crate::network::{reduce, CanonicalSystem, Dimension, FadingSpec, NetworkError, NetworkSpec, PowerPmf};

/// Two-sided 99% standard normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

/// Pilot streams live in the upper half of the stream space.
const PILOT_STREAM_BASE: u64 = 1 << 63;

/// Consecutive empty fields tolerated before giving up.
const MAX_REJECTIONS: u32 = 1_000_000;

#[derive(Debug, Error)]
pub enum McError {
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error("unsupported setting: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("no base station with positive power after {0} attempts")]
    Degenerate(u32),
}

/// Key and stream of one realization's generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSeed {
    pub seed: u64,
    pub stream: u64,
}

impl RngSeed {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn rng(self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn stream_rng(base: &ChaCha8Rng, stream: u64) -> ChaCha8Rng {
    let mut rng = base.clone();
    rng.set_stream(stream);
    rng
}

/// Normal-approximation 99% half-width of a binomial proportion.
pub fn ci_halfwidth(p: f64, n: usize) -> f64 {
    if n == 0 {
        return 1.0;
    }
    (Z99 * (p * (1.0 - p) / n as f64).sqrt()).clamp(0.0, 1.0)
}

/// Ascending distances of a Poisson field of density `lambda0` within `r_max`.
pub fn sample_field<R: Rng + ?Sized>(dim: Dimension, lambda0: f64, r_max: f64, rng: &mut R) -> Vec<f64> {
    assert!(lambda0 > 0.0 && r_max > 0.0, "density and radius must be positive");
    let l = dim.as_f64();
    let scale = lambda0 * dim.surface_constant() / l;
    let t_max = scale * r_max.powf(l);
    let mut out = Vec::new();
    let mut t = 0.0;
    loop {
        let e: f64 = Exp1.sample(rng);
        t += e;
        if t > t_max {
            return out;
        }
        out.push((t / scale).powf(1.0 / l));
    }
}

/// Transmission power and fading factor of one base station.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsMark {
    pub power: f64,
    pub fading: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub distances: Vec<f64>,
    pub marks: Vec<BsMark>,
    /// Received power from the serving (strongest) base station.
    pub p_s: f64,
    /// Every other received power plus the mean beyond the field radius.
    pub p_i: f64,
    pub serving_index: usize,
    /// Empty fields discarded before this one.
    pub rejections: u32,
}

enum Visit {
    Station(f64, BsMark),
    /// The field so far was empty and is being redrawn.
    Restart,
}

#[derive(Debug, Clone, Copy)]
struct TierMark {
    cumulative: f64,
    power: f64,
    /// `(gain, facing probability)`.
    sector: Option<(f64, f64)>,
}

/// Precomputed per-run constants.
#[derive(Debug, Clone)]
struct Sampler {
    ratio: f64,
    /// `2ρ` when it is a small integer.
    twice_ratio: Option<i32>,
    /// `R^l = t_scale · T`.
    t_scale: f64,
    t_max: f64,
    tiers: Vec<TierMark>,
    fading: Option<LogNormal<f64>>,
    compensation: f64,
    /// `Σλ E[K] E[Ψ] b_l / (ε − l)`, the compensation at unit radius.
    far_coefficient: f64,
    dim: Dimension,
}

impl Sampler {
    fn new(spec: &NetworkSpec, r_max: f64) -> Result<Self, McError> {
        let red = reduce(spec)?;
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(McError::Invalid(format!("r_max = {r_max} must be finite and > 0")));
        }
        let (fading, mean_fading) = match spec.fading {
            FadingSpec::None => (None, 1.0),
            FadingSpec::LogNormal { sigma } => {
                let d = LogNormal::new(0.0, sigma).map_err(|e| McError::Invalid(e.to_string()))?;
                (Some(d), (0.5 * sigma * sigma).exp())
            }
            FadingSpec::MomentOnly { .. } => {
                return Err(McError::Unsupported(
                    "fading given only by its moment cannot be simulated".into(),
                ))
            }
        };
        let total = red.total_density;
        let mut cumulative = 0.0;
        let tiers = spec
            .tiers
            .iter()
            .map(|t| {
                cumulative += t.density / total;
                TierMark {
                    cumulative,
                    power: t.power,
                    sector: t.sector.map(|s| (s.gain, s.facing_probability())),
                }
            })
            .collect();
        let l = spec.dim.as_f64();
        let ratio = spec.epsilon / spec.dim.as_f64();
        let twice_ratio = ((2.0 * ratio).fract() == 0.0 && ratio <= 64.0).then_some((2.0 * ratio) as i32);
        let far_coefficient =
            total * mean_power(&red.pmf) * mean_fading * spec.dim.surface_constant() / (spec.epsilon - l);
        let t_scale = l / (total * spec.dim.surface_constant());
        Ok(Self {
            ratio,
            twice_ratio,
            t_scale,
            t_max: r_max.powf(l) / t_scale,
            tiers,
            fading,
            compensation: far_coefficient * r_max.powf(l - spec.epsilon),
            far_coefficient,
            dim: spec.dim,
        })
    }

    fn with_radius(&self, r_max: f64) -> Self {
        let l = self.dim.as_f64();
        let eps = self.ratio * l;
        Self {
            t_max: r_max.powf(l) / self.t_scale,
            compensation: self.far_coefficient * r_max.powf(l - eps),
            ..self.clone()
        }
    }

    fn expected_points(&self) -> f64 {
        self.t_max
    }

    /// `(R^l)^{−ε/l}`.
    #[inline]
    fn path_gain(&self, rl: f64) -> f64 {
        match self.twice_ratio {
            Some(n) if n % 2 == 0 => rl.powi(n / 2).recip(),
            Some(n) => rl.sqrt().powi(n).recip(),
            None => rl.powf(-self.ratio),
        }
    }

    #[inline]
    fn sample_mark<R: Rng + ?Sized>(&self, rng: &mut R) -> BsMark {
        let tier = if self.tiers.len() == 1 {
            &self.tiers[0]
        } else {
            let u: f64 = rng.random();
            self.tiers
                .iter()
                .find(|t| u < t.cumulative)
                .unwrap_or(&self.tiers[self.tiers.len() - 1])
        };
        let power = match tier.sector {
            None => tier.power,
            Some((gain, p)) if p >= 1.0 => gain,
            Some((gain, p)) => {
                if rng.random_bool(p) {
                    gain
                } else {
                    0.0
                }
            }
        };
        let fading = match &self.fading {
            Some(d) => d.sample(rng),
            None => 1.0,
        };
        BsMark { power, fading }
    }

    /// One field: `(p_s, p_i, serving index, rejections)`. `visit` sees every
    /// base station with its `R^l`, in order.
    fn draw<R, V>(&self, rng: &mut R, mut visit: V) -> Result<(f64, f64, usize, u32), McError>
    where
        R: Rng + ?Sized,
        V: FnMut(Visit),
    {
        let mut rejections = 0;
        loop {
            let mut t = 0.0;
            let mut sum = 0.0;
            let mut best = 0.0;
            let mut best_index = 0;
            let mut index = 0;
            loop {
                let e: f64 = Exp1.sample(rng);
                t += e;
                if t > self.t_max {
                    break;
                }
                let mark = self.sample_mark(rng);
                let rl = t * self.t_scale;
                visit(Visit::Station(rl, mark));
                if mark.power > 0.0 {
                    let g = mark.power * mark.fading * self.path_gain(rl);
                    sum += g;
                    if g > best {
                        best = g;
                        best_index = index;
                    }
                }
                index += 1;
            }
            if best > 0.0 {
                return Ok((best, (sum - best).max(0.0) + self.compensation, best_index, rejections));
            }
            rejections += 1;
            if rejections >= MAX_REJECTIONS {
                return Err(McError::Degenerate(rejections));
            }
            visit(Visit::Restart);
        }
    }
}

fn mean_power(pmf: &PowerPmf) -> f64 {
    pmf.atoms().iter().map(|a| a.probability * a.power).sum()
}

/// One full realization with every distance and mark recorded.
pub fn realize<R: Rng + ?Sized>(spec: &NetworkSpec, r_max: f64, rng: &mut R) -> Result<Realization, McError> {
    let sampler = Sampler::new(spec, r_max)?;
    realize_with(&sampler, rng)
}

fn realize_with<R: Rng + ?Sized>(sampler: &Sampler, rng: &mut R) -> Result<Realization, McError> {
    let inv_l = 1.0 / sampler.dim.as_f64();
    let mut distances = Vec::new();
    let mut marks = Vec::new();
    let (p_s, p_i, serving_index, rejections) = sampler.draw(rng, |v| match v {
        Visit::Station(rl, mark) => {
            distances.push(rl.powf(inv_l));
            marks.push(mark);
        }
        Visit::Restart => {
            distances.clear();
            marks.clear();
        }
    })?;
    Ok(Realization {
        distances,
        marks,
        p_s,
        p_i,
        serving_index,
        rejections,
    })
}

/// Run controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    /// Field radius; chosen from a pilot run when `None`.
    pub r_max: Option<f64>,
    pub pilot_runs: usize,
    /// Target ratio of the far-field compensation to the median pilot
    /// interference.
    pub compensation_fraction: f64,
    /// Upper bound on the expected number of base stations per field.
    pub max_expected_points: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            r_max: None,
            pilot_runs: 1000,
            compensation_fraction: 0.01,
            max_expected_points: 50_000.0,
        }
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Picks the field radius so the far-field compensation is a small fraction
/// of the median interference seen in a pilot run.
///
/// The mean interference is not used: it diverges for the nearest-BS
/// distance law, whereas the median is stable.
fn choose_r_max(spec: &NetworkSpec, seed: u64, config: &McConfig) -> Result<f64, McError> {
    let l = spec.dim.as_f64();
    let proto = Sampler::new(spec, 1.0)?;
    // Radius holding ~2000 base stations on average.
    let r_pilot = (2000.0 * proto.t_scale).powf(1.0 / l);
    let pilot = proto.with_radius(r_pilot);
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut interference = (0..config.pilot_runs.max(1) as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(&base, PILOT_STREAM_BASE + i);
            pilot.draw(&mut rng, |_| {}).map(|(_, p_i, _, _)| p_i)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let m = median(&mut interference);
    let target = config.compensation_fraction * m;
    let r = (proto.far_coefficient / target).powf(1.0 / (spec.epsilon - l));
    let r_cap = (config.max_expected_points * proto.t_scale).powf(1.0 / l);
    if r > r_cap {
        log::warn!("field radius {r} capped at {r_cap} by the point budget");
        return Ok(r_cap);
    }
    Ok(r)
}

/// Received powers of `n` independent realizations, reusable across
/// thresholds and noise levels.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    /// `(p_s, p_i)` per realization, in stream order.
    pub samples: Vec<(f64, f64)>,
    pub r_max: f64,
    pub rejections: u64,
    pub seed: u64,
    /// Canonical system of the simulated spec.
    pub canonical: CanonicalSystem,
    effective_density: f64,
}

pub fn simulate(spec: &NetworkSpec, n: usize, seed: u64, config: &McConfig) -> Result<Simulation, McError> {
    if n == 0 {
        return Err(McError::Invalid("at least one realization is required".into()));
    }
    let reduction = reduce(spec)?;
    let r_max = match config.r_max {
        Some(r) => r,
        None => choose_r_max(spec, seed, config)?,
    };
    let sampler = Sampler::new(spec, r_max)?;
    log::debug!(
        "simulating {n} fields, r_max = {r_max}, ~{:.0} base stations each",
        sampler.expected_points()
    );
    let base = ChaCha8Rng::seed_from_u64(seed);
    let draws = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(&base, i);
            sampler.draw(&mut rng, |_| {})
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rejections = draws.iter().map(|d| u64::from(d.3)).sum();
    if rejections > 0 {
        log::info!("{rejections} empty fields were resampled ({n} kept)");
    }
    Ok(Simulation {
        samples: draws.into_iter().map(|(p_s, p_i, _, _)| (p_s, p_i)).collect(),
        r_max,
        rejections,
        seed,
        canonical: reduction.canonical,
        effective_density: reduction.effective_density,
    })
}

impl Simulation {
    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn rejection_rate(&self) -> f64 {
        self.rejections as f64 / (self.rejections as f64 + self.n() as f64)
    }

    /// Empirical `P(p_s / (p_i + noise) > η)`.
    pub fn tail(&self, etas: &[f64], noise: f64) -> Result<EmpiricalTail, McError> {
        check_etas(etas)?;
        if !(noise >= 0.0 && noise.is_finite()) {
            return Err(McError::Invalid(format!("noise = {noise} must be finite and >= 0")));
        }
        let ratios: Vec<f64> = self.samples.iter().map(|&(s, i)| s / (i + noise)).collect();
        let mut canonical = self.canonical;
        canonical.nprime = noise * self.effective_density.powf(-canonical.ratio());
        Ok(EmpiricalTail::from_ratios(&ratios, etas, self.seed, self.rejections, canonical))
    }
}

fn check_etas(etas: &[f64]) -> Result<(), McError> {
    if etas.iter().any(|e| e.is_nan() || *e < 0.0) {
        return Err(McError::Invalid("thresholds must be >= 0".into()));
    }
    if etas.windows(2).any(|w| w[1] < w[0]) {
        return Err(McError::Invalid("thresholds must be sorted".into()));
    }
    Ok(())
}

/// Empirical tail curve with 99% confidence half-widths.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalTail {
    pub curve: TailCurve,
    pub halfwidths: Vec<f64>,
    pub n: usize,
    pub seed: u64,
    pub rejections: u64,
}

impl EmpiricalTail {
    fn from_ratios(ratios: &[f64], etas: &[f64], seed: u64, rejections: u64, meta: CanonicalSystem) -> Self {
        let n = ratios.len();
        let mut points = Vec::with_capacity(etas.len());
        let mut halfwidths = Vec::with_capacity(etas.len());
        for &eta in etas {
            let p = if eta == 0.0 {
                1.0
            } else {
                ratios.iter().filter(|&&r| r > eta).count() as f64 / n as f64
            };
            points.push(TailPoint { eta, p });
            halfwidths.push(ci_halfwidth(p, n));
        }
        Self {
            curve: TailCurve {
                points,
                method: Method::MonteCarlo,
                meta,
            },
            halfwidths,
            n,
            seed,
            rejections,
        }
    }

    pub fn tails(&self) -> Vec<f64> {
        self.curve.points.iter().map(|p| p.p).collect()
    }

    /// `[p − h, p + h]` clamped to `[0, 1]`.
    pub fn interval(&self, i: usize) -> (f64, f64) {
        let p = self.curve.points[i].p;
        let h = self.halfwidths[i];
        ((p - h).max(0.0), (p + h).min(1.0))
    }

    pub fn brackets(&self, i: usize, value: f64) -> bool {
        let (lo, hi) = self.interval(i);
        lo <= value && value <= hi
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("eta,tail,ci_halfwidth,n,seed,method\n");
        for (p, h) in self.curve.points.iter().zip(&self.halfwidths) {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                p.eta, p.p, h, self.n, self.seed, self.curve.method
            ));
        }
        out
    }
}

fn check_runs(n: usize) -> Result<(), McError> {
    if n < 1000 {
        return Err(McError::Invalid(format!("n = {n}: at least 1000 realizations are required")));
    }
    Ok(())
}

/// Empirical C/I tail; the spec's noise is ignored.
pub fn empirical_tail_ci(spec: &NetworkSpec, etas: &[f64], n: usize, seed: u64) -> Result<EmpiricalTail, McError> {
    empirical_tail_ci_with(spec, etas, n, seed, &McConfig::default())
}

pub fn empirical_tail_ci_with(
    spec: &NetworkSpec,
    etas: &[f64],
    n: usize,
    seed: u64,
    config: &McConfig,
) -> Result<EmpiricalTail, McError> {
    check_runs(n)?;
    check_etas(etas)?;
    let sim = simulate(spec, n, seed, config)?;
    let mut tail = sim.tail(etas, 0.0)?;
    tail.curve.meta.nprime = 0.0;
    Ok(tail)
}

/// Empirical C/(I+N) tail at the spec's noise.
pub fn empirical_tail_cin(spec: &NetworkSpec, etas: &[f64], n: usize, seed: u64) -> Result<EmpiricalTail, McError> {
    empirical_tail_cin_with(spec, etas, n, seed, &McConfig::default())
}

pub fn empirical_tail_cin_with(
    spec: &NetworkSpec,
    etas: &[f64],
    n: usize,
    seed: u64,
    config: &McConfig,
) -> Result<EmpiricalTail, McError> {
    check_runs(n)?;
    check_etas(etas)?;
    let sim = simulate(spec, n, seed, config)?;
    let tail = sim.tail(etas, spec.noise)?;
    Ok(tail)
}

/// Empirical tail of `C/I_k`: the `k − 1` nearest interferers exactly, the
/// rest replaced by their conditional mean given `R_k`.
///
/// Only a single tier with constant power and no fading or sectoring is
/// supported. The spec's noise is ignored.
pub fn empirical_tail_fewbs(
    spec: &NetworkSpec,
    k: usize,
    etas: &[f64],
    n: usize,
    seed: u64,
) -> Result<EmpiricalTail, McError> {
    check_runs(n)?;
    check_etas(etas)?;
    spec.validate()?;
    if k < 2 {
        return Err(McError::Invalid(format!("k = {k}: at least two base stations are needed")));
    }
    if spec.tiers.len() != 1 || spec.tiers[0].sector.is_some() || spec.fading != FadingSpec::None {
        return Err(McError::Unsupported(
            "the few-BS approximation needs one tier with constant power, no fading and no sectoring".into(),
        ));
    }
    let tier = spec.tiers[0];
    if !(tier.power > 0.0) {
        return Err(McError::Unsupported("the few-BS approximation needs positive power".into()));
    }
    let dim = spec.dim;
    let l = dim.as_f64();
    let ratio = spec.epsilon / spec.dim.as_f64();
    let t_scale = l / (tier.density * dim.surface_constant());
    let base = ChaCha8Rng::seed_from_u64(seed);
    let ratios = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(&base, i);
            let mut t = 0.0;
            let mut p_s = 0.0;
            let mut p_i = 0.0;
            let mut rl = 0.0;
            for j in 0..k {
                let e: f64 = Exp1.sample(&mut rng);
                t += e;
                rl = t * t_scale;
                let g = tier.power * rl.powf(-ratio);
                if j == 0 {
                    p_s = g;
                } else {
                    p_i += g;
                }
            }
            let far = conditional_tail_mean(tier.density, tier.power, dim, spec.epsilon, rl.powf(1.0 / l))
                .expect("validated spec");
            p_s / (p_i + far)
        })
        .collect::<Vec<f64>>();
    let mut meta = reduce(spec)?.canonical;
    meta.nprime = 0.0;
    let mut tail = EmpiricalTail::from_ratios(&ratios, etas, seed, 0, meta);
    tail.curve.method = Method::FewBs;
    Ok(tail)
}

/// Draws of the interference from base stations beyond distance `r_k`,
/// given that the k-th nearest sits exactly at `r_k`. Fields are drawn out
/// to `r_max` and the remainder is added as its mean.
#[allow(clippy::too_many_arguments)]
pub fn conditional_interference_samples(
    lambda0: f64,
    power: f64,
    dim: Dimension,
    epsilon: f64,
    r_k: f64,
    r_max: f64,
    n: usize,
    seed: u64,
) -> Result<Vec<f64>, McError> {
    if !(r_k > 0.0 && r_max > r_k && lambda0 > 0.0 && power >= 0.0) {
        return Err(McError::Invalid(format!(
            "need lambda0 > 0, power >= 0 and 0 < r_k < r_max (got {lambda0}, {power}, {r_k}, {r_max})"
        )));
    }
    let l = dim.as_f64();
    let ratio = epsilon / l;
    let compensation = conditional_tail_mean(lambda0, power, dim, epsilon, r_max)
        .map_err(|e| McError::Invalid(e.to_string()))?;
    let t_scale = l / (lambda0 * dim.surface_constant());
    let t0 = r_k.powf(l) / t_scale;
    let t_max = r_max.powf(l) / t_scale;
    let base = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(&base, i);
            let mut t = t0;
            let mut sum = 0.0;
            loop {
                let e: f64 = Exp1.sample(&mut rng);
                t += e;
                if t > t_max {
                    break;
                }
                sum += power * (t * t_scale).powf(-ratio);
            }
            sum + compensation
        })
        .collect())
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

impl MeanEstimate {
    pub fn from_samples(values: &[f64]) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
        Self {
            mean,
            std_error: (var / n as f64).sqrt(),
            n,
        }
    }
}

/// Monte Carlo estimate of the conditional far-field mean.
#[allow(clippy::too_many_arguments)]
pub fn empirical_conditional_tail_mean(
    lambda0: f64,
    power: f64,
    dim: Dimension,
    epsilon: f64,
    r_k: f64,
    r_max: f64,
    n: usize,
    seed: u64,
) -> Result<MeanEstimate, McError> {
    if n < 2 {
        return Err(McError::Invalid(format!("n = {n}: at least two draws are required")));
    }
    let v = conditional_interference_samples(lambda0, power, dim, epsilon, r_k, r_max, n, seed)?;
    Ok(MeanEstimate::from_samples(&v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Sector, Tier};
    use std::f64::consts::PI;

    fn d2() -> Dimension {
        Dimension::new(2).unwrap()
    }

    #[test]
    fn same_stream_same_field() {
        let a = sample_field(d2(), 1.0, 5.0, &mut RngSeed::new(7, 3).rng());
        let b = sample_field(d2(), 1.0, 5.0, &mut RngSeed::new(7, 3).rng());
        let c = sample_field(d2(), 1.0, 5.0, &mut RngSeed::new(7, 4).rng());
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a.windows(2).all(|w| w[0] <= w[1]));
        assert!(a.iter().all(|&r| r <= 5.0));
    }

    #[test]
    fn nearest_is_serving_without_marks() {
        let spec = NetworkSpec::single_tier(2, 4.0, 1.0, 1.0, 0.0).unwrap();
        let mut rng = RngSeed::new(1, 0).rng();
        for _ in 0..200 {
            let r = realize(&spec, 6.0, &mut rng).unwrap();
            assert_eq!(r.serving_index, 0);
            assert!((r.p_s - r.distances[0].powi(-4)).abs() <= 1e-12 * r.p_s, "{} {}", r.p_s, r.distances[0]);
            assert!(r.p_i > 0.0);
        }
    }

    #[test]
    fn full_beamwidth_matches_unsectored() {
        let plain = NetworkSpec::single_tier(2, 4.0, 1.0, 2.0, 0.0).unwrap();
        let mut sectored = plain.clone();
        sectored.tiers[0] = Tier::new(1.0, 2.0).with_sector(Sector {
            gain: 2.0,
            beamwidth: 2.0 * PI,
        });
        for stream in 0..20 {
            let a = realize(&plain, 5.0, &mut RngSeed::new(9, stream).rng()).unwrap();
            let b = realize(&sectored, 5.0, &mut RngSeed::new(9, stream).rng()).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn rejected_fields_are_resampled() {
        // With an expected 0.03 stations per field almost every draw is empty.
        let spec = NetworkSpec::single_tier(2, 4.0, 0.01, 1.0, 0.0).unwrap();
        let mut rng = RngSeed::new(2, 0).rng();
        let r = realize(&spec, 1.0, &mut rng).unwrap();
        assert!(r.rejections > 0);
        assert!(!r.distances.is_empty());
        assert_eq!(r.distances.len(), r.marks.len());
    }

    #[test]
    fn moment_only_fading_is_unsupported() {
        let mut spec = NetworkSpec::single_tier(2, 4.0, 1.0, 1.0, 0.0).unwrap();
        spec.fading = FadingSpec::MomentOnly { moment: 2.0 };
        assert!(matches!(
            realize(&spec, 3.0, &mut RngSeed::new(0, 0).rng()),
            Err(McError::Unsupported(_))
        ));
    }

    #[test]
    fn zero_threshold_and_csv() {
        let spec = NetworkSpec::single_tier(2, 4.0, 1.0, 1.0, 0.5).unwrap();
        let t = empirical_tail_cin(&spec, &[0.0, 1.0, 1e9], 1000, 5).unwrap();
        assert_eq!(t.curve.points[0].p, 1.0);
        assert_eq!(t.curve.points[2].p, 0.0);
        let csv = t.to_csv();
        assert!(csv.starts_with("eta,tail,ci_halfwidth,n,seed,method\n0,1,0,1000,5,montecarlo\n"));
        assert!(empirical_tail_ci(&spec, &[1.0], 999, 5).is_err());
        assert!(empirical_tail_ci(&spec, &[2.0, 1.0], 1000, 5).is_err());
    }

    #[test]
    fn fewbs_setting_guard() {
        let mut spec = NetworkSpec::single_tier(2, 4.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(empirical_tail_fewbs(&spec, 2, &[0.0], 1000, 1).unwrap().curve.points[0].p, 1.0);
        assert!(empirical_tail_fewbs(&spec, 1, &[1.0], 1000, 1).is_err());
        spec.fading = FadingSpec::LogNormal { sigma: 1.0 };
        assert!(matches!(
            empirical_tail_fewbs(&spec, 2, &[1.0], 1000, 1),
            Err(McError::Unsupported(_))
        ));
        spec.fading = FadingSpec::None;
        spec.tiers.push(Tier::new(1.0, 3.0));
        assert!(matches!(
            empirical_tail_fewbs(&spec, 2, &[1.0], 1000, 1),
            Err(McError::Unsupported(_))
        ));
    }

    #[test]
    fn halfwidth_shrinks_with_n() {
        let h1 = ci_halfwidth(0.3, 1000);
        let h2 = ci_halfwidth(0.3, 4000);
        assert!((h1 / h2 - 2.0).abs() < 1e-12);
        assert_eq!(ci_halfwidth(0.0, 1000), 0.0);
    }
}
