//! Network descriptions and the equivalence reductions that collapse any
//! multi-tier, shadow-faded, sectored network onto a [`CanonicalSystem`]:
//! unit density, unit power, no fading, and a single normalized noise `N′`.
//!
//! The reduction chain is
//! `superpose_tiers → apply_sectoring → power_moment → fading_moment`,
//! giving an effective density `λ_eff = λ₀ E[K^{l/ε}] E[Ψ^{l/ε}]` and
//! `N′ = N λ_eff^{−ε/l}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("invalid network spec: `{field}`: {message}")]
    InvalidSpec { field: String, message: String },
    #[error("degenerate network: all transmission power mass is at zero")]
    DegenerateNetwork,
    #[error("malformed network spec: {0}")]
    Parse(String),
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> NetworkError {
    NetworkError::InvalidSpec {
        field: field.into(),
        message: message.into(),
    }
}

/// Spatial dimension `l` of the deployment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dimension(u8);

impl Dimension {
    pub fn new(l: u8) -> Result<Self, NetworkError> {
        if (1..=3).contains(&l) {
            Ok(Self(l))
        } else {
            Err(invalid("dimension", format!("{l} is not one of 1, 2, 3")))
        }
    }

    pub fn l(self) -> u8 {
        self.0
    }

    pub fn as_f64(self) -> f64 {
        f64::from(self.0)
    }

    /// Surface constant `b_l`: 2, 2π, 4π for l = 1, 2, 3.
    pub fn surface_constant(self) -> f64 {
        match self.0 {
            1 => 2.0,
            2 => 2.0 * PI,
            _ => 4.0 * PI,
        }
    }
}

/// Ideal sectorized antenna: transmits with `gain` towards the mobile with
/// probability `beamwidth / 2π`, otherwise not at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector {
    pub gain: f64,
    /// Radians, in (0, 2π].
    pub beamwidth: f64,
}

impl Sector {
    pub fn validate(&self, field: &str) -> Result<(), NetworkError> {
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return Err(invalid(format!("{field}.gain"), "must be finite and > 0"));
        }
        if !(self.beamwidth > 0.0 && self.beamwidth <= 2.0 * PI) {
            return Err(invalid(
                format!("{field}.beamwidth"),
                format!("{} rad is outside (0, 2pi]", self.beamwidth),
            ));
        }
        Ok(())
    }

    /// Probability that the main lobe faces the mobile.
    pub fn facing_probability(&self) -> f64 {
        self.beamwidth / (2.0 * PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tier {
    /// Base stations per unit l-volume.
    pub density: f64,
    /// Linear transmission power.
    pub power: f64,
    pub sector: Option<Sector>,
}

impl Tier {
    pub fn new(density: f64, power: f64) -> Self {
        Self {
            density,
            power,
            sector: None,
        }
    }

    pub fn with_sector(mut self, sector: Sector) -> Self {
        self.sector = Some(sector);
        self
    }

    fn validate(&self, field: &str) -> Result<(), NetworkError> {
        if !(self.density > 0.0 && self.density.is_finite()) {
            return Err(invalid(format!("{field}.density"), "must be finite and > 0"));
        }
        if !(self.power >= 0.0 && self.power.is_finite()) {
            return Err(invalid(format!("{field}.power"), "must be finite and >= 0"));
        }
        if let Some(s) = &self.sector {
            s.validate(&format!("{field}.sector"))?;
        }
        Ok(())
    }
}

/// Shadow fading factor `Ψ`, i.i.d. per link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingSpec {
    None,
    /// `Ψ = e^X`, `X ~ Normal(0, sigma²)` in natural-log units.
    LogNormal { sigma: f64 },
    /// Only the moment `E[Ψ^{l/ε}]` is known.
    MomentOnly { moment: f64 },
}

/// dB standard deviation to natural-log units (`ln 10 / 10` per dB).
pub fn sigma_db_to_natural(sigma_db: f64) -> f64 {
    sigma_db * std::f64::consts::LN_10 / 10.0
}

impl FadingSpec {
    fn validate(&self) -> Result<(), NetworkError> {
        match *self {
            FadingSpec::None => Ok(()),
            FadingSpec::LogNormal { sigma } if sigma >= 0.0 && sigma.is_finite() => Ok(()),
            FadingSpec::LogNormal { .. } => Err(invalid("fading.sigma", "must be finite and >= 0")),
            FadingSpec::MomentOnly { moment } if moment > 0.0 && moment.is_finite() => Ok(()),
            FadingSpec::MomentOnly { .. } => {
                Err(invalid("fading.value", "moment must be finite and > 0"))
            }
        }
    }
}

/// Full M-tier network description.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSpec {
    pub dim: Dimension,
    /// Path-loss exponent, must exceed `l`.
    pub epsilon: f64,
    pub tiers: Vec<Tier>,
    pub fading: FadingSpec,
    /// Linear noise power.
    pub noise: f64,
}

impl NetworkSpec {
    /// Single unsectored tier without fading.
    pub fn single_tier(l: u8, epsilon: f64, density: f64, power: f64, noise: f64) -> Result<Self, NetworkError> {
        let spec = Self {
            dim: Dimension::new(l)?,
            epsilon,
            tiers: vec![Tier::new(density, power)],
            fading: FadingSpec::None,
            noise,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), NetworkError> {
        if !(self.epsilon.is_finite() && self.epsilon > self.dim.as_f64()) {
            return Err(invalid(
                "epsilon",
                format!(
                    "{} must exceed the dimension l = {} (the path-loss exponent must satisfy eps > l)",
                    self.epsilon,
                    self.dim.l()
                ),
            ));
        }
        if self.tiers.is_empty() {
            return Err(invalid("tiers", "at least one tier is required"));
        }
        for (i, t) in self.tiers.iter().enumerate() {
            t.validate(&format!("tiers[{i}]"))?;
        }
        self.fading.validate()?;
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(invalid("noise", "must be finite and >= 0"));
        }
        Ok(())
    }

    /// `a = l/ε`.
    pub fn exponent_ratio(&self) -> f64 {
        self.dim.as_f64() / self.epsilon
    }

    pub fn total_density(&self) -> f64 {
        self.tiers.iter().map(|t| t.density).sum()
    }

    /// Parses the JSON document format.
    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let raw: RawSpec = serde_json::from_str(text).map_err(|e| NetworkError::Parse(e.to_string()))?;
        raw.into_spec()
    }

    /// Serializes to the JSON document format (log-normal sigma in natural units).
    pub fn to_json(&self) -> String {
        let raw = RawSpec::from_spec(self);
        serde_json::to_string_pretty(&raw).expect("spec serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSector {
    gain: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beamwidth_deg: Option<f64>,
    /// Radians.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beamwidth: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTier {
    density: f64,
    power: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sector: Option<RawSector>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum RawFading {
    None,
    Lognormal {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma_db: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma: Option<f64>,
    },
    Moment {
        value: f64,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    dimension: u8,
    epsilon: f64,
    #[serde(default)]
    noise: f64,
    #[serde(default)]
    fading: Option<RawFading>,
    tiers: Vec<RawTier>,
}

impl RawSpec {
    fn into_spec(self) -> Result<NetworkSpec, NetworkError> {
        let fading = match self.fading {
            None | Some(RawFading::None) => FadingSpec::None,
            Some(RawFading::Lognormal { sigma_db, sigma }) => match (sigma_db, sigma) {
                (Some(db), None) => FadingSpec::LogNormal {
                    sigma: sigma_db_to_natural(db),
                },
                (None, Some(s)) => FadingSpec::LogNormal { sigma: s },
                _ => {
                    return Err(invalid(
                        "fading",
                        "lognormal fading needs exactly one of `sigma_db` or `sigma`",
                    ))
                }
            },
            Some(RawFading::Moment { value }) => FadingSpec::MomentOnly { moment: value },
        };
        let tiers = self
            .tiers
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                let sector = match t.sector {
                    None => None,
                    Some(s) => {
                        let beamwidth = match (s.beamwidth_deg, s.beamwidth) {
                            (Some(deg), None) => deg.to_radians(),
                            (None, Some(rad)) => rad,
                            _ => {
                                return Err(invalid(
                                    format!("tiers[{i}].sector"),
                                    "needs exactly one of `beamwidth_deg` or `beamwidth`",
                                ))
                            }
                        };
                        Some(Sector { gain: s.gain, beamwidth })
                    }
                };
                Ok(Tier {
                    density: t.density,
                    power: t.power,
                    sector,
                })
            })
            .collect::<Result<_, _>>()?;
        let spec = NetworkSpec {
            dim: Dimension::new(self.dimension)?,
            epsilon: self.epsilon,
            tiers,
            fading,
            noise: self.noise,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn from_spec(spec: &NetworkSpec) -> Self {
        let fading = match spec.fading {
            FadingSpec::None => RawFading::None,
            FadingSpec::LogNormal { sigma } => RawFading::Lognormal {
                sigma_db: None,
                sigma: Some(sigma),
            },
            FadingSpec::MomentOnly { moment } => RawFading::Moment { value: moment },
        };
        RawSpec {
            dimension: spec.dim.l(),
            epsilon: spec.epsilon,
            noise: spec.noise,
            fading: Some(fading),
            tiers: spec
                .tiers
                .iter()
                .map(|t| RawTier {
                    density: t.density,
                    power: t.power,
                    sector: t.sector.map(|s| RawSector {
                        gain: s.gain,
                        beamwidth_deg: None,
                        beamwidth: Some(s.beamwidth),
                    }),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerAtom {
    pub power: f64,
    pub probability: f64,
}

/// Discrete distribution of base-station transmission powers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerPmf {
    atoms: Vec<PowerAtom>,
}

impl PowerPmf {
    /// Builds a p.m.f., merging atoms with exactly equal power.
    pub fn from_atoms(atoms: impl IntoIterator<Item = PowerAtom>) -> Result<Self, NetworkError> {
        let mut merged: Vec<PowerAtom> = Vec::new();
        for atom in atoms {
            if !(atom.power >= 0.0 && atom.power.is_finite()) {
                return Err(invalid("pmf.power", format!("{} is not a finite power >= 0", atom.power)));
            }
            if !(0.0..=1.0).contains(&atom.probability) {
                return Err(invalid("pmf.probability", format!("{} is outside [0, 1]", atom.probability)));
            }
            match merged.iter_mut().find(|m| m.power == atom.power) {
                Some(m) => m.probability += atom.probability,
                None => merged.push(atom),
            }
        }
        let total: f64 = merged.iter().map(|a| a.probability).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid("pmf", format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { atoms: merged })
    }

    pub fn atoms(&self) -> &[PowerAtom] {
        &self.atoms
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.probability).sum()
    }

    /// Probability of the zero-power atom (zero if absent).
    pub fn zero_mass(&self) -> f64 {
        self.atoms
            .iter()
            .filter(|a| a.power == 0.0)
            .map(|a| a.probability)
            .sum()
    }
}

/// Unit-density, unit-power, fading-free equivalent of a network.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalSystem {
    #[serde(serialize_with = "serialize_dim")]
    pub dim: Dimension,
    pub epsilon: f64,
    /// `l/ε`.
    pub a: f64,
    /// Normalized noise `N′`.
    pub nprime: f64,
}

fn serialize_dim<S: serde::Serializer>(d: &Dimension, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u8(d.l())
}

impl CanonicalSystem {
    pub fn new(dim: Dimension, epsilon: f64, nprime: f64) -> Result<Self, NetworkError> {
        if !(epsilon.is_finite() && epsilon > dim.as_f64()) {
            return Err(invalid("epsilon", format!("{epsilon} must exceed l = {}", dim.l())));
        }
        if !(nprime >= 0.0 && nprime.is_finite()) {
            return Err(invalid("nprime", "must be finite and >= 0"));
        }
        Ok(Self {
            dim,
            epsilon,
            a: dim.as_f64() / epsilon,
            nprime,
        })
    }

    /// `ε/l`.
    pub fn ratio(&self) -> f64 {
        self.epsilon / self.dim.as_f64()
    }

    /// The canonical system written back as a one-tier network.
    pub fn to_spec(&self) -> NetworkSpec {
        NetworkSpec {
            dim: self.dim,
            epsilon: self.epsilon,
            tiers: vec![Tier::new(1.0, 1.0)],
            fading: FadingSpec::None,
            noise: self.nprime,
        }
    }
}

/// Every intermediate quantity of the reduction chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Reduction {
    pub total_density: f64,
    pub pmf: PowerPmf,
    /// `E[K^{l/ε}]` after sectoring.
    pub power_moment: f64,
    /// `E[Ψ^{l/ε}]`.
    pub fading_moment: f64,
    pub effective_density: f64,
    pub canonical: CanonicalSystem,
}

/// Superposition of independent tiers: total density and the power p.m.f.
/// `P(K = κ_i) = λ_i / Σλ_j`.
pub fn superpose_tiers(spec: &NetworkSpec) -> Result<(f64, PowerPmf), NetworkError> {
    spec.validate()?;
    let total = spec.total_density();
    let pmf = PowerPmf::from_atoms(spec.tiers.iter().map(|t| PowerAtom {
        power: t.power,
        probability: t.density / total,
    }))?;
    Ok((total, pmf))
}

fn sectored_atoms<'a>(
    pairs: impl IntoIterator<Item = (PowerAtom, Option<&'a Sector>)>,
) -> Result<PowerPmf, NetworkError> {
    let mut atoms = Vec::new();
    let mut off_mass = 0.0;
    for (i, (atom, sector)) in pairs.into_iter().enumerate() {
        match sector {
            None => atoms.push(atom),
            Some(s) => {
                s.validate(&format!("sectors[{i}]"))?;
                let on = atom.probability * s.facing_probability();
                atoms.push(PowerAtom {
                    power: s.gain,
                    probability: on,
                });
                off_mass += atom.probability - on;
            }
        }
    }
    if off_mass > 0.0 {
        atoms.push(PowerAtom {
            power: 0.0,
            probability: off_mass,
        });
    }
    PowerPmf::from_atoms(atoms)
}

/// Replaces each sectored atom `(κ_i, p_i)` by `(G_i, p_i θ_i/2π)` and moves
/// the remaining mass to the zero-power atom.
pub fn apply_sectoring(pmf: &PowerPmf, sectors: &[Option<Sector>]) -> Result<PowerPmf, NetworkError> {
    if sectors.len() != pmf.atoms.len() {
        return Err(invalid(
            "sectors",
            format!("{} entries for {} atoms", sectors.len(), pmf.atoms.len()),
        ));
    }
    sectored_atoms(pmf.atoms.iter().copied().zip(sectors.iter().map(Option::as_ref)))
}

/// `E[K^a]`; zero-power atoms contribute nothing.
pub fn power_moment(pmf: &PowerPmf, a: f64) -> f64 {
    pmf.atoms
        .iter()
        .filter(|at| at.power > 0.0)
        .map(|at| at.probability * at.power.powf(a))
        .sum()
}

/// `E[Ψ^a]`.
pub fn fading_moment(fading: &FadingSpec, a: f64) -> f64 {
    match *fading {
        FadingSpec::None => 1.0,
        FadingSpec::LogNormal { sigma } => (0.5 * a * a * sigma * sigma).exp(),
        FadingSpec::MomentOnly { moment } => moment,
    }
}

/// Runs the full reduction chain.
pub fn reduce(spec: &NetworkSpec) -> Result<Reduction, NetworkError> {
    spec.validate()?;
    let total = spec.total_density();
    if spec.dim.l() != 2 && spec.tiers.iter().any(|t| t.sector.is_some()) {
        log::warn!(
            "sector facing probability theta/2pi is applied as-is in dimension l = {}",
            spec.dim.l()
        );
    }
    // Sectoring is applied per tier before merging, so tiers that share a
    // power but differ in antennas stay distinct.
    let pmf = sectored_atoms(spec.tiers.iter().map(|t| {
        (
            PowerAtom {
                power: t.power,
                probability: t.density / total,
            },
            t.sector.as_ref(),
        )
    }))?;
    let a = spec.exponent_ratio();
    let pm = power_moment(&pmf, a);
    let fm = fading_moment(&spec.fading, a);
    let effective_density = total * pm * fm;
    if !(effective_density > 0.0) {
        return Err(NetworkError::DegenerateNetwork);
    }
    let nprime = spec.noise * effective_density.powf(-spec.epsilon / spec.dim.as_f64());
    let canonical = CanonicalSystem::new(spec.dim, spec.epsilon, nprime)?;
    Ok(Reduction {
        total_density: total,
        pmf,
        power_moment: pm,
        fading_moment: fm,
        effective_density,
        canonical,
    })
}

pub fn canonicalize(spec: &NetworkSpec) -> Result<CanonicalSystem, NetworkError> {
    reduce(spec).map(|r| r.canonical)
}

/// Normalized noise of a base tier alone (`N1`) and after overlaying the
/// `added` tiers (`N2`). `N2 ≤ N1` always.
pub fn noise_after_adding_tiers(
    base: &Tier,
    added: &[Tier],
    dim: Dimension,
    epsilon: f64,
    noise: f64,
) -> Result<(f64, f64), NetworkError> {
    if !(base.power > 0.0) {
        return Err(invalid("base.power", "must be > 0"));
    }
    let a = dim.as_f64() / epsilon;
    let rho = epsilon / dim.as_f64();
    let n1 = noise * base.density.powf(-rho) / base.power;
    let gain: f64 = added
        .iter()
        .map(|t| (t.density / base.density) * (t.power / base.power).powf(a))
        .sum();
    let n2 = n1 * (1.0 + gain).powf(-rho);
    Ok((n1, n2))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(l: u8, eps: f64, tiers: Vec<Tier>, fading: FadingSpec, noise: f64) -> NetworkSpec {
        NetworkSpec {
            dim: Dimension::new(l).unwrap(),
            epsilon: eps,
            tiers,
            fading,
            noise,
        }
    }

    #[test]
    fn surface_constants() {
        assert_eq!(Dimension::new(1).unwrap().surface_constant(), 2.0);
        assert_eq!(Dimension::new(2).unwrap().surface_constant(), 2.0 * PI);
        assert_eq!(Dimension::new(3).unwrap().surface_constant(), 4.0 * PI);
        assert!(Dimension::new(0).is_err());
        assert!(Dimension::new(4).is_err());
    }

    #[test]
    fn superpose_examples() {
        let s = spec(2, 4.0, vec![Tier::new(1.0, 5.0)], FadingSpec::None, 0.0);
        let (d, pmf) = superpose_tiers(&s).unwrap();
        assert_eq!(d, 1.0);
        assert_eq!(pmf.atoms(), &[PowerAtom { power: 5.0, probability: 1.0 }]);

        let s = spec(2, 4.0, vec![Tier::new(1.0, 1.0), Tier::new(3.0, 1.0)], FadingSpec::None, 0.0);
        let (d, pmf) = superpose_tiers(&s).unwrap();
        assert_eq!(d, 4.0);
        assert_eq!(pmf.atoms(), &[PowerAtom { power: 1.0, probability: 1.0 }]);

        let s = spec(2, 4.0, vec![Tier::new(1.0, 10.0), Tier::new(3.0, 1.0)], FadingSpec::None, 0.0);
        let (d, pmf) = superpose_tiers(&s).unwrap();
        assert_eq!(d, 4.0);
        assert_eq!(
            pmf.atoms(),
            &[
                PowerAtom { power: 10.0, probability: 0.25 },
                PowerAtom { power: 1.0, probability: 0.75 }
            ]
        );
    }

    #[test]
    fn sectoring_examples() {
        let pmf = PowerPmf::from_atoms([
            PowerAtom { power: 2.0, probability: 0.5 },
            PowerAtom { power: 1.0, probability: 0.5 },
        ])
        .unwrap();
        let omni = apply_sectoring(
            &pmf,
            &[
                Some(Sector { gain: 2.0, beamwidth: 2.0 * PI }),
                Some(Sector { gain: 1.0, beamwidth: 2.0 * PI }),
            ],
        )
        .unwrap();
        assert_eq!(omni, pmf);

        let unit = PowerPmf::from_atoms([PowerAtom { power: 1.0, probability: 1.0 }]).unwrap();
        let half = apply_sectoring(&unit, &[Some(Sector { gain: 1.0, beamwidth: PI })]).unwrap();
        assert_eq!(
            half.atoms(),
            &[
                PowerAtom { power: 1.0, probability: 0.5 },
                PowerAtom { power: 0.0, probability: 0.5 }
            ]
        );

        let mixed = apply_sectoring(&pmf, &[Some(Sector { gain: 4.0, beamwidth: PI }), None]).unwrap();
        assert_eq!(
            mixed.atoms(),
            &[
                PowerAtom { power: 4.0, probability: 0.25 },
                PowerAtom { power: 1.0, probability: 0.5 },
                PowerAtom { power: 0.0, probability: 0.25 }
            ]
        );
        assert!(apply_sectoring(&unit, &[Some(Sector { gain: 1.0, beamwidth: 7.0 })]).is_err());
        assert!(apply_sectoring(&unit, &[Some(Sector { gain: 1.0, beamwidth: 0.0 })]).is_err());
    }

    #[test]
    fn moment_examples() {
        let unit = PowerPmf::from_atoms([PowerAtom { power: 1.0, probability: 1.0 }]).unwrap();
        assert_eq!(power_moment(&unit, 0.37), 1.0);
        let p16 = PowerPmf::from_atoms([PowerAtom { power: 16.0, probability: 1.0 }]).unwrap();
        assert_eq!(power_moment(&p16, 0.5), 4.0);
        let half = PowerPmf::from_atoms([
            PowerAtom { power: 1.0, probability: 0.5 },
            PowerAtom { power: 0.0, probability: 0.5 },
        ])
        .unwrap();
        assert_eq!(power_moment(&half, 0.5), 0.5);

        assert_eq!(fading_moment(&FadingSpec::LogNormal { sigma: 0.0 }, 0.3), 1.0);
        let v = fading_moment(&FadingSpec::LogNormal { sigma: 2.0 }, 0.5);
        assert!((v - 0.5f64.exp()).abs() < 1e-15);
        // l = 2: exp(2σ²/ε²).
        let eps: f64 = 4.0;
        assert!((v - (2.0 * 4.0 / (eps * eps)).exp()).abs() < 1e-15);
        assert_eq!(fading_moment(&FadingSpec::MomentOnly { moment: 1.3 }, 0.5), 1.3);
        assert_eq!(fading_moment(&FadingSpec::None, 0.5), 1.0);
    }

    #[test]
    fn canonicalize_examples() {
        let s = spec(2, 4.0, vec![Tier::new(1.0, 1.0)], FadingSpec::None, 0.7);
        assert_eq!(canonicalize(&s).unwrap().nprime, 0.7);

        let s = spec(2, 4.0, vec![Tier::new(4.0, 2.0)], FadingSpec::None, 1.0);
        assert!((canonicalize(&s).unwrap().nprime - 0.03125).abs() < 1e-15);

        let s = spec(2, 4.0, vec![Tier::new(1.0, 1.0)], FadingSpec::LogNormal { sigma: 2.0 }, 1.0);
        assert!((canonicalize(&s).unwrap().nprime - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn all_power_at_zero_is_degenerate() {
        let s = spec(2, 4.0, vec![Tier::new(1.0, 0.0)], FadingSpec::None, 1.0);
        assert_eq!(canonicalize(&s), Err(NetworkError::DegenerateNetwork));
    }

    #[test]
    fn equal_power_tiers_with_different_antennas_stay_apart() {
        let s = spec(
            2,
            4.0,
            vec![
                Tier::new(1.0, 1.0),
                Tier::new(1.0, 1.0).with_sector(Sector { gain: 3.0, beamwidth: 2.0 * PI / 3.0 }),
            ],
            FadingSpec::None,
            0.0,
        );
        let r = reduce(&s).unwrap();
        let expect = 0.5 + 0.5 / 3.0 * 3f64.sqrt();
        assert!((r.power_moment - expect).abs() < 1e-15);
        assert!((r.pmf.zero_mass() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn added_tier_noise_examples() {
        let d = Dimension::new(2).unwrap();
        let base = Tier::new(2.0, 3.0);
        let (n1, n2) = noise_after_adding_tiers(&base, &[], d, 4.0, 5.0).unwrap();
        assert_eq!(n1, n2);
        assert!((n1 - 5.0 / (4.0 * 3.0)).abs() < 1e-15);
        let (_, n2) = noise_after_adding_tiers(&base, &[base], d, 4.0, 5.0).unwrap();
        assert!((n2 - n1 / 4.0).abs() < 1e-15);
        let (_, n2) = noise_after_adding_tiers(&base, &[base, base], d, 4.0, 5.0).unwrap();
        assert!((n2 - n1 / 9.0).abs() < 1e-15);
        assert!(noise_after_adding_tiers(&Tier::new(1.0, 0.0), &[], d, 4.0, 1.0).is_err());
    }

    #[test]
    fn validation_names_fields() {
        let s = spec(2, 2.0, vec![Tier::new(1.0, 1.0)], FadingSpec::None, 0.0);
        let e = s.validate().unwrap_err().to_string();
        assert!(e.contains("epsilon") && e.contains("eps > l"), "{e}");
        let s = spec(2, 4.0, vec![Tier::new(1.0, 1.0), Tier::new(-1.0, 1.0)], FadingSpec::None, 0.0);
        assert!(s.validate().unwrap_err().to_string().contains("tiers[1].density"));
        let s = spec(2, 4.0, vec![], FadingSpec::None, 0.0);
        assert!(s.validate().is_err());
    }

    #[test]
    fn json_document() {
        let doc = r#"{"dimension": 2, "epsilon": 4.0, "noise": 1.0e-9,
            "fading": {"type": "lognormal", "sigma_db": 8.0},
            "tiers": [{"density": 1.0, "power": 10.0,
                       "sector": {"gain": 20.0, "beamwidth_deg": 120.0}},
                      {"density": 5.0, "power": 0.1}]}"#;
        let s = NetworkSpec::from_json(doc).unwrap();
        assert_eq!(s.dim.l(), 2);
        assert_eq!(s.tiers.len(), 2);
        let sector = s.tiers[0].sector.unwrap();
        assert!((sector.beamwidth - 2.0 * PI / 3.0).abs() < 1e-15);
        match s.fading {
            FadingSpec::LogNormal { sigma } => assert!((sigma - 8.0 * 0.230_258_509_299_404_6).abs() < 1e-12),
            _ => panic!(),
        }
        let back = NetworkSpec::from_json(&s.to_json()).unwrap();
        assert_eq!(back.fading, s.fading);
        assert_eq!(back.tiers[1], s.tiers[1]);

        for (doc, field) in [
            (r#"{"dimension": 2, "epsilon": 1.5, "tiers": [{"density": 1, "power": 1}]}"#, "epsilon"),
            (r#"{"dimension": 5, "epsilon": 6, "tiers": [{"density": 1, "power": 1}]}"#, "dimension"),
            (r#"{"dimension": 2, "epsilon": 4, "tiers": [{"density": 1}]}"#, "power"),
            (r#"{"dimension": 2, "epsilon": 4, "tiers": [{"density": 1, "power": 1, "sector": {"gain": 2, "beamwidth_deg": 400}}]}"#, "tiers[0].sector.beamwidth"),
            (r#"{"dimension": 2, "epsilon": 4, "fading": {"type": "moment", "value": -1}, "tiers": [{"density": 1, "power": 1}]}"#, "fading.value"),
        ] {
            let e = NetworkSpec::from_json(doc).unwrap_err().to_string();
            assert!(e.contains(field), "{doc}: {e}");
        }
    }
}
