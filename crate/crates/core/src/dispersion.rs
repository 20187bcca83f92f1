//! On-shell dispersion relations and the elementary transition kernels.
//!
//! Natural units throughout: ħ = c = 1. Energies, momenta and masses share one
//! unit; times and positions carry its inverse.
//!
//! Two kernels connect the observable bases:
//!
//! * `⟨p|t⟩ = (2π)^{-1/2} √(p/E_p) e^{±iE_p t}` on a single momentum half-line,
//!   used when position is the evolution parameter;
//! * `⟨x|E⟩ = (2π)^{-1/2} √(E/p_E) e^{±ip_E x}` on a single energy branch,
//!   used when time is the evolution parameter.
//!
//! Both moduli are the square root of a Jacobian (`dE/dp` resp. `dp/dE`), so the
//! nonrelativistic regime reuses the same formulas with `E_p = p²/2m`, i.e. with
//! the rest-mass phase `e^{∓imt}` removed.
//!
//! Plane waves use the `e^{ipx}/√(2π)` normalization everywhere.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Relativistic,
    Nonrelativistic,
}

/// Mass and regime of a free particle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dispersion {
    mass: f64,
    regime: Regime,
}

impl Dispersion {
    /// Rejects negative or non-finite masses. A massless nonrelativistic
    /// particle is representable but every evaluation on it fails.
    pub fn new(mass: f64, regime: Regime) -> Result<Self> {
        if !mass.is_finite() || mass < 0.0 {
            return Err(Error::InvalidInput(format!(
                "mass must be finite and non-negative, got {mass}"
            )));
        }
        Ok(Self { mass, regime })
    }

    pub fn relativistic(mass: f64) -> Result<Self> {
        Self::new(mass, Regime::Relativistic)
    }

    pub fn nonrelativistic(mass: f64) -> Result<Self> {
        Self::new(mass, Regime::Nonrelativistic)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// `√(p²+m²)` or `p²/2m`.
    pub fn energy_of_momentum(&self, p: f64) -> Result<f64> {
        self.check()?;
        Ok(self.energy(p))
    }

    /// Magnitude `√(E²−m²)` or `√(2mE)`.
    ///
    /// The relativistic gap `|E| < m` holds no on-shell momentum and is reported
    /// as a domain error.
    pub fn momentum_of_energy(&self, energy: f64) -> Result<f64> {
        self.check()?;
        match self.regime {
            Regime::Relativistic => {
                let e = energy.abs();
                if !(e >= self.mass) {
                    return Err(Error::Domain(format!(
                        "energy {energy} lies in the forbidden gap [-{m}, {m}]",
                        m = self.mass
                    )));
                }
                // (E-m)(E+m) keeps the small-momentum end accurate.
                Ok(((e - self.mass) * (e + self.mass)).sqrt())
            }
            Regime::Nonrelativistic => {
                if !(energy >= 0.0) {
                    return Err(Error::Domain(format!(
                        "nonrelativistic kinetic energy must be non-negative, got {energy}"
                    )));
                }
                Ok((2.0 * self.mass * energy).sqrt())
            }
        }
    }

    /// Signed group velocity `dE/dp`.
    pub fn group_velocity(&self, p: f64) -> Result<f64> {
        self.check()?;
        Ok(self.velocity(p))
    }

    /// Lowest on-shell energy: `m` or `0`.
    pub fn threshold_energy(&self) -> f64 {
        match self.regime {
            Regime::Relativistic => self.mass,
            Regime::Nonrelativistic => 0.0,
        }
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.regime == Regime::Nonrelativistic && self.mass == 0.0 {
            return Err(Error::Domain(
                "nonrelativistic dispersion needs a positive mass".into(),
            ));
        }
        Ok(())
    }

    /// Unchecked; callers must have run [`Dispersion::check`].
    #[inline]
    pub(crate) fn energy(&self, p: f64) -> f64 {
        match self.regime {
            Regime::Relativistic => p.hypot(self.mass),
            Regime::Nonrelativistic => p * p / (2.0 * self.mass),
        }
    }

    #[inline]
    pub(crate) fn velocity(&self, p: f64) -> f64 {
        match self.regime {
            Regime::Relativistic => {
                let e = self.energy(p);
                if e == 0.0 {
                    // massless at p = 0: the light-cone limit, |v| = 1
                    1.0
                } else {
                    p / e
                }
            }
            Regime::Nonrelativistic => p / self.mass,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergySign {
    Positive,
    Negative,
}

impl EnergySign {
    pub fn sign(self) -> f64 {
        match self {
            EnergySign::Positive => 1.0,
            EnergySign::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            EnergySign::Positive => EnergySign::Negative,
            EnergySign::Negative => EnergySign::Positive,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HalfLine {
    /// `[0, ∞)`
    NonNegative,
    /// `(-∞, 0]`
    NonPositive,
}

impl HalfLine {
    pub fn sign(self) -> f64 {
        match self {
            HalfLine::NonNegative => 1.0,
            HalfLine::NonPositive => -1.0,
        }
    }

    pub fn contains(self, p: f64) -> bool {
        match self {
            HalfLine::NonNegative => p >= 0.0,
            HalfLine::NonPositive => p <= 0.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            HalfLine::NonNegative => HalfLine::NonPositive,
            HalfLine::NonPositive => HalfLine::NonNegative,
        }
    }
}

/// Which energy branch and which momentum half-line a kernel lives on.
///
/// There is deliberately no `Default`: unrestricted ranges break orthogonality,
/// so every kernel call names its branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchConfig {
    pub energy_sign: EnergySign,
    pub momentum_half_line: HalfLine,
}

impl BranchConfig {
    pub const fn new(energy_sign: EnergySign, momentum_half_line: HalfLine) -> Self {
        Self {
            energy_sign,
            momentum_half_line,
        }
    }

    /// Positive energy, non-negative momentum.
    pub const fn forward() -> Self {
        Self::new(EnergySign::Positive, HalfLine::NonNegative)
    }
}

impl std::fmt::Display for BranchConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let e = match self.energy_sign {
            EnergySign::Positive => "E+",
            EnergySign::Negative => "E-",
        };
        let p = match self.momentum_half_line {
            HalfLine::NonNegative => "p>=0",
            HalfLine::NonPositive => "p<=0",
        };
        write!(f, "{e},{p}")
    }
}

/// A kernel value together with the point it was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub argument: f64,
    pub value: Complex64,
}

impl KernelSample {
    pub fn modulus(&self) -> f64 {
        self.value.norm()
    }
}

/// `⟨p|t⟩` on the branch `b`.
///
/// Exactly zero at `p = 0` for a massive particle. For a massless one `p/E_p` is
/// 1 on the whole half-line and the endpoint takes that limit.
pub fn kernel_p_t(p: f64, t: f64, d: &Dispersion, b: BranchConfig) -> Result<Complex64> {
    d.check()?;
    if !b.momentum_half_line.contains(p) {
        return Err(Error::ContractViolation(format!(
            "momentum {p} is off the {:?} half-line",
            b.momentum_half_line
        )));
    }
    Ok(time_kernel(p, t, d, b.energy_sign))
}

/// `⟨x|E⟩` on the branch `b`.
///
/// The modulus diverges like `p_E^{-1/2}` at threshold; `|E|` at or below
/// threshold is a domain error and the singularity is left to callers that
/// integrate it away.
pub fn kernel_x_e(x: f64, energy: f64, d: &Dispersion, b: BranchConfig) -> Result<Complex64> {
    d.check()?;
    let on_branch = match b.energy_sign {
        EnergySign::Positive => energy >= 0.0,
        EnergySign::Negative => energy <= 0.0,
    };
    if !on_branch {
        return Err(Error::ContractViolation(format!(
            "energy {energy} is off the {:?} energy branch",
            b.energy_sign
        )));
    }
    let threshold = d.threshold_energy();
    if !(energy.abs() > threshold) {
        return Err(Error::Domain(format!(
            "|E| = {} is at or below threshold {threshold}; ⟨x|E⟩ diverges as p_E → 0",
            energy.abs()
        )));
    }
    let p_e = d.momentum_of_energy(energy)?;
    let modulus = (1.0 / d.velocity(p_e)).sqrt() * INV_SQRT_2PI;
    Ok(Complex64::from_polar(modulus, b.momentum_half_line.sign() * p_e * x))
}

/// The even alternative `(2π)^{-1/2} √(|p|/2E_p) e^{±iE_p t}`, defined on the
/// whole momentum line.
pub fn kernel_p_t_even(p: f64, t: f64, d: &Dispersion, sign: EnergySign) -> Result<Complex64> {
    d.check()?;
    Ok(even_time_kernel(p, t, d, sign))
}

#[inline]
pub(crate) fn time_kernel(p: f64, t: f64, d: &Dispersion, sign: EnergySign) -> Complex64 {
    // At p = 0 the velocity is the one-sided limit: 0 when massive, 1 when massless.
    let modulus = d.velocity(p).abs().sqrt() * INV_SQRT_2PI;
    Complex64::from_polar(modulus, sign.sign() * d.energy(p) * t)
}

#[inline]
pub(crate) fn even_time_kernel(p: f64, t: f64, d: &Dispersion, sign: EnergySign) -> Complex64 {
    let modulus = (0.5 * d.velocity(p).abs()).sqrt() * INV_SQRT_2PI;
    Complex64::from_polar(modulus, sign.sign() * d.energy(p) * t)
}

/// Tabulates `⟨p|t⟩` over `times` at fixed `p`.
pub fn tabulate_p_t(
    p: f64,
    times: &[f64],
    d: &Dispersion,
    b: BranchConfig,
) -> Result<Vec<KernelSample>> {
    times
        .iter()
        .map(|&t| {
            kernel_p_t(p, t, d, b).map(|value| KernelSample { argument: t, value })
        })
        .collect()
}
