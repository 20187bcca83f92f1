//! Time-of-arrival amplitudes with position as the evolution parameter.
//!
//! A momentum-space state prepared at the source position `x1` is carried to
//! the detector position `x2`. The amplitude over detection times is
//!
//! ```text
//! φ₂(t) = ∫ ⟨t|p⟩ e^{ip(x2 − x1)} φ₁(p) dp,   ⟨t|p⟩ = (2π)^{-1/2} √|dE/dp| e^{∓iE_p t}
//! ```
//!
//! with `p` confined to one half-line. Every integral is a trapezoid sum over
//! the momentum grid in ascending node order; time nodes are independent and
//! evaluated in parallel, so results do not depend on the thread count.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dispersion::{
    even_time_kernel, time_kernel, BranchConfig, Dispersion, EnergySign, HalfLine,
};
use crate::error::{Error, Result};
use crate::quadrature::{linspace, trapezoid, trapezoid_weight, uniform_spacing};

/// Relative tolerance on grid uniformity.
pub const SPACING_TOLERANCE: f64 = 1e-12;
/// Tolerance for the normalization flag.
pub const NORM_TOLERANCE: f64 = 1e-6;
/// Largest allowed `|φ|` at the outermost node, relative to `max |φ|`.
pub const BOUNDARY_DECAY: f64 = 1e-6;

/// Uniform momentum grid on one half-line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumGrid {
    nodes: Vec<f64>,
    spacing: f64,
    half_line: HalfLine,
}

impl MomentumGrid {
    /// Validates ascending uniform `nodes` lying on `half_line`.
    pub fn new(nodes: Vec<f64>, half_line: HalfLine) -> Result<Self> {
        if nodes.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidInput("momentum nodes must be finite".into()));
        }
        if let Some(p) = nodes.iter().find(|&&p| !half_line.contains(p)) {
            return Err(Error::ContractViolation(format!(
                "momentum node {p} is off the {half_line:?} half-line; \
                 a grid must not mix momentum signs"
            )));
        }
        let spacing = uniform_spacing(&nodes, SPACING_TOLERANCE)?;
        Ok(Self { nodes, spacing, half_line })
    }

    /// `n` nodes from `p_min` to `p_max` inclusive.
    pub fn uniform(p_min: f64, p_max: f64, n: usize, half_line: HalfLine) -> Result<Self> {
        if n < 2 || !(p_max > p_min) {
            return Err(Error::InvalidInput(format!(
                "need n ≥ 2 and p_max > p_min, got n = {n}, [{p_min}, {p_max}]"
            )));
        }
        Self::new(linspace(p_min, p_max, n), half_line)
    }

    /// One node standing for a cell of width `spacing`.
    pub fn single(p: f64, spacing: f64, half_line: HalfLine) -> Result<Self> {
        if !half_line.contains(p) {
            return Err(Error::ContractViolation(format!(
                "momentum {p} is off the {half_line:?} half-line"
            )));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidInput(format!("cell width {spacing} must be positive")));
        }
        Ok(Self { nodes: vec![p], spacing, half_line })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn half_line(&self) -> HalfLine {
        self.half_line
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        trapezoid_weight(i, self.nodes.len(), self.spacing)
    }

    /// The grid mirrored through `p = 0`, still ascending.
    pub fn reflected(&self) -> Self {
        Self {
            nodes: self.nodes.iter().rev().map(|p| -p).collect(),
            spacing: self.spacing,
            half_line: self.half_line.flipped(),
        }
    }
}

/// `φ₁(p)` on a single-sign momentum grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumWavefunction {
    grid: MomentumGrid,
    amplitudes: Vec<Complex64>,
}

impl MomentumWavefunction {
    /// Wraps `amplitudes`, rejecting states that have not decayed at the
    /// outermost node.
    pub fn new(grid: MomentumGrid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} amplitudes for {} momentum nodes",
                amplitudes.len(),
                grid.len()
            )));
        }
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::InvalidInput("amplitudes must be finite".into()));
        }
        let state = Self { grid, amplitudes };
        state.check_boundary_decay()?;
        Ok(state)
    }

    /// Unit-norm Gaussian `(2πσ²)^{-1/4} exp(−(p−p0)²/4σ²)`.
    pub fn gaussian(grid: MomentumGrid, p0: f64, sigma_p: f64) -> Result<Self> {
        if !(sigma_p > 0.0 && sigma_p.is_finite()) {
            return Err(Error::InvalidInput(format!("sigma_p = {sigma_p} must be positive")));
        }
        let norm = (2.0 * PI * sigma_p * sigma_p).powf(-0.25);
        let amplitudes = grid
            .nodes()
            .iter()
            .map(|p| {
                let z = (p - p0) / sigma_p;
                Complex64::new(norm * (-0.25 * z * z).exp(), 0.0)
            })
            .collect();
        Self::new(grid, amplitudes)
    }

    /// Momentum eigenstate as one node of amplitude `1/√Δp`, the discrete
    /// stand-in for `δ(p − p1)`.
    pub fn eigenstate(p1: f64, spacing: f64, half_line: HalfLine) -> Result<Self> {
        let grid = MomentumGrid::single(p1, spacing, half_line)?;
        let amplitudes = vec![Complex64::new(spacing.sqrt().recip(), 0.0)];
        Ok(Self { grid, amplitudes })
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn is_eigenstate(&self) -> bool {
        self.grid.len() == 1
    }

    /// `∫|φ|² dp` with the grid's quadrature weights.
    pub fn norm_squared(&self) -> f64 {
        let dens: Vec<f64> = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        if dens.len() == 1 {
            return dens[0] * self.grid.spacing();
        }
        trapezoid(&dens, self.grid.spacing())
    }

    /// Flag, not an error: deliberately unnormalized inputs are allowed.
    pub fn is_normalized(&self) -> bool {
        (self.norm_squared() - 1.0).abs() <= NORM_TOLERANCE
    }

    /// Multiplies every amplitude by `f(p)`.
    pub fn map<F: Fn(f64) -> Complex64>(&self, f: F) -> Self {
        let amplitudes = self
            .grid
            .nodes()
            .iter()
            .zip(&self.amplitudes)
            .map(|(&p, a)| a * f(p))
            .collect();
        Self { grid: self.grid.clone(), amplitudes }
    }

    /// `φ(−p)` on the reflected grid.
    pub fn reflected(&self) -> Self {
        Self {
            grid: self.grid.reflected(),
            amplitudes: self.amplitudes.iter().rev().copied().collect(),
        }
    }

    fn check_boundary_decay(&self) -> Result<()> {
        if self.grid.len() < 2 {
            return Ok(());
        }
        let peak = self.amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
        let outer = match self.grid.half_line() {
            HalfLine::NonNegative => self.amplitudes[self.amplitudes.len() - 1],
            HalfLine::NonPositive => self.amplitudes[0],
        };
        if outer.norm() > BOUNDARY_DECAY * peak {
            return Err(Error::Leakage(format!(
                "|φ| at the outermost momentum node is {:.3e} of its maximum; \
                 widen the grid",
                outer.norm() / peak
            )));
        }
        Ok(())
    }
}

/// `φ₁(p)` on a grid symmetric about `p = 0`, for the even-kernel routes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FullLineWavefunction {
    nodes: Vec<f64>,
    spacing: f64,
    amplitudes: Vec<Complex64>,
}

impl FullLineWavefunction {
    pub fn new(nodes: Vec<f64>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != nodes.len() {
            return Err(Error::InvalidInput(format!(
                "{} amplitudes for {} momentum nodes",
                amplitudes.len(),
                nodes.len()
            )));
        }
        let spacing = uniform_spacing(&nodes, SPACING_TOLERANCE)?;
        let (lo, hi) = (nodes[0], nodes[nodes.len() - 1]);
        if !(lo < 0.0 && hi > 0.0) || (lo + hi).abs() > SPACING_TOLERANCE * hi {
            return Err(Error::ContractViolation(format!(
                "the even-kernel routes need a grid symmetric about p = 0, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { nodes, spacing, amplitudes })
    }

    /// Sum of unit-norm Gaussians `Σ c_k g(p; p_k, σ)`.
    pub fn gaussians(p_max: f64, n: usize, sigma_p: f64, centres: &[(f64, Complex64)]) -> Result<Self> {
        if n < 3 || !(p_max > 0.0) || !(sigma_p > 0.0) {
            return Err(Error::InvalidInput(format!(
                "need n ≥ 3, p_max > 0 and sigma_p > 0, got n = {n}, p_max = {p_max}, sigma_p = {sigma_p}"
            )));
        }
        let nodes = linspace(-p_max, p_max, n);
        let norm = (2.0 * PI * sigma_p * sigma_p).powf(-0.25);
        let amplitudes = nodes
            .iter()
            .map(|p| {
                centres.iter().fold(Complex64::new(0.0, 0.0), |acc, (p0, c)| {
                    let z = (p - p0) / sigma_p;
                    acc + c * (norm * (-0.25 * z * z).exp())
                })
            })
            .collect();
        Self::new(nodes, amplitudes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }
}

/// `φ₂(t)` at a fixed detector position.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArrivalAmplitude {
    pub detector_position: f64,
    pub source_position: f64,
    pub times: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub branch: BranchConfig,
}

/// `|φ₂(t)|²` and its integral.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArrivalDistribution {
    pub times: Vec<f64>,
    pub density: Vec<f64>,
    pub total_mass: f64,
}

impl ArrivalDistribution {
    /// Time of the largest density sample; the first one on ties.
    pub fn peak_time(&self) -> Option<f64> {
        let mut best: Option<(f64, f64)> = None;
        for (&t, &rho) in self.times.iter().zip(&self.density) {
            if best.is_none_or(|(_, b)| rho > b) {
                best = Some((t, rho));
            }
        }
        best.map(|(t, _)| t)
    }
}

/// Direct quadrature of the arrival amplitude.
pub fn arrival_amplitude(
    state: &MomentumWavefunction,
    x1: f64,
    x2: f64,
    times: &[f64],
    d: &Dispersion,
    b: BranchConfig,
) -> Result<ArrivalAmplitude> {
    prepare(state, x1, x2, times, d, b)?;
    let distance = x2 - x1;
    let grid = state.grid();
    let amplitudes = times
        .par_iter()
        .map(|&t| {
            grid.nodes()
                .iter()
                .zip(state.amplitudes())
                .enumerate()
                .fold(Complex64::new(0.0, 0.0), |acc, (i, (&p, phi))| {
                    let k = time_kernel(p, t, d, b.energy_sign).conj();
                    acc + k * Complex64::cis(p * distance) * phi * grid.weight(i)
                })
        })
        .collect();
    Ok(ArrivalAmplitude {
        detector_position: x2,
        source_position: x1,
        times: times.to_vec(),
        amplitudes,
        branch: b,
    })
}

/// The same amplitude after inserting a complete set of times at the source
/// and collapsing the resulting `δ(E_pm − E_pn)` analytically.
///
/// For each input momentum `p_n` the surviving `p_m` is the one on the same
/// half-line with `E_pm = E_pn`; the collapse contributes
/// `2π ⟨p_m|t₁⟩⟨t₁|p_n⟩ · |dp_m/dE_pm|`, evaluated at `t₁ = 0`.
pub fn arrival_amplitude_via_time_basis(
    state: &MomentumWavefunction,
    x1: f64,
    x2: f64,
    times: &[f64],
    d: &Dispersion,
    b: BranchConfig,
) -> Result<ArrivalAmplitude> {
    prepare(state, x1, x2, times, d, b)?;
    let grid = state.grid();
    let sign = b.momentum_half_line.sign();
    // per-node collapse factors, independent of the detection time
    let collapsed: Vec<(f64, Complex64)> = grid
        .nodes()
        .iter()
        .zip(state.amplitudes())
        .enumerate()
        .map(|(i, (&p_n, phi))| {
            let energy = d.energy(p_n);
            let p_m = sign * momentum_on_shell(d, energy);
            let weight = collapse_weight(
                time_kernel(p_m, 0.0, d, b.energy_sign) * time_kernel(p_n, 0.0, d, b.energy_sign).conj(),
                d.velocity(p_m).abs(),
            );
            let source = Complex64::cis(-p_m * x1);
            (p_m, weight * source * phi * grid.weight(i))
        })
        .collect();
    let amplitudes = times
        .par_iter()
        .map(|&t| {
            collapsed.iter().fold(Complex64::new(0.0, 0.0), |acc, &(p_m, c)| {
                let k = time_kernel(p_m, t, d, b.energy_sign).conj();
                acc + k * Complex64::cis(p_m * x2) * c
            })
        })
        .collect();
    Ok(ArrivalAmplitude {
        detector_position: x2,
        source_position: x1,
        times: times.to_vec(),
        amplitudes,
        branch: b,
    })
}

/// Both routes with the even kernel `√(|p|/2E_p)` on the full momentum line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvenKernelRoutes {
    pub route_direct: ArrivalAmplitude,
    pub route_collapsed: ArrivalAmplitude,
    /// `‖direct − collapsed‖ / ‖direct‖` over the time grid.
    pub l2_discrepancy: f64,
}

/// Route A integrates the even kernel over the full line. Route B collapses
/// the energy delta with `p_m` parameterized by `E_pm ≥ m`, which fixes
/// `p_m = +|p_n|` whatever the sign of `p_n`. The two differ unless the state
/// has one momentum sign or `x2 = x1`.
pub fn even_kernel_arrival_routes(
    state: &FullLineWavefunction,
    x1: f64,
    x2: f64,
    times: &[f64],
    d: &Dispersion,
    sign: EnergySign,
) -> Result<EvenKernelRoutes> {
    d.check()?;
    check_times(times)?;
    let distance = x2 - x1;
    let nodes = state.nodes();
    let (lo, hi) = (nodes[0], nodes[nodes.len() - 1]);
    check_time_resolution(times, d, 0.0, hi.abs().max(lo.abs()))?;
    check_momentum_resolution(state.spacing(), times, d, sign, &[lo, hi], distance)?;
    let n = nodes.len();
    let h = state.spacing();
    let branch = BranchConfig::new(sign, HalfLine::NonNegative);

    let direct: Vec<Complex64> = times
        .par_iter()
        .map(|&t| {
            nodes
                .iter()
                .zip(state.amplitudes())
                .enumerate()
                .fold(Complex64::new(0.0, 0.0), |acc, (i, (&p, phi))| {
                    let k = even_time_kernel(p, t, d, sign).conj();
                    acc + k * Complex64::cis(p * distance) * phi * trapezoid_weight(i, n, h)
                })
        })
        .collect();

    let collapsed_terms: Vec<(f64, Complex64)> = nodes
        .iter()
        .zip(state.amplitudes())
        .enumerate()
        .map(|(i, (&p_n, phi))| {
            let p_m = momentum_on_shell(d, d.energy(p_n));
            // the even measure counts both roots of E_pm = E_pn, hence 2|dp/dE|
            let weight = collapse_weight(
                even_time_kernel(p_m, 0.0, d, sign) * even_time_kernel(p_n, 0.0, d, sign).conj() * 2.0,
                d.velocity(p_m).abs(),
            );
            (p_m, weight * phi * trapezoid_weight(i, n, h))
        })
        .collect();
    let collapsed: Vec<Complex64> = times
        .par_iter()
        .map(|&t| {
            collapsed_terms.iter().fold(Complex64::new(0.0, 0.0), |acc, &(p_m, c)| {
                let k = even_time_kernel(p_m, t, d, sign).conj();
                acc + k * Complex64::cis(p_m * distance) * c
            })
        })
        .collect();

    let l2_discrepancy = relative_l2(&direct, &collapsed, times);
    let wrap = |amplitudes| ArrivalAmplitude {
        detector_position: x2,
        source_position: x1,
        times: times.to_vec(),
        amplitudes,
        branch,
    };
    Ok(EvenKernelRoutes {
        route_direct: wrap(direct),
        route_collapsed: wrap(collapsed),
        l2_discrepancy,
    })
}

/// Arrival amplitude with `E = p²/2m`, positive energy branch.
pub fn nonrel_arrival_amplitude(
    state: &MomentumWavefunction,
    x1: f64,
    x2: f64,
    times: &[f64],
    mass: f64,
) -> Result<ArrivalAmplitude> {
    let d = Dispersion::nonrelativistic(mass)?;
    let b = BranchConfig::new(EnergySign::Positive, state.grid().half_line());
    arrival_amplitude(state, x1, x2, times, &d, b)
}

/// `|φ₂|²` and its trapezoid integral over the time grid.
pub fn arrival_distribution(a: &ArrivalAmplitude) -> ArrivalDistribution {
    let density: Vec<f64> = a.amplitudes.iter().map(|z| z.norm_sqr()).collect();
    let total_mass = match a.times.len() {
        0 | 1 => 0.0,
        _ => a
            .times
            .windows(2)
            .zip(density.windows(2))
            .fold(0.0, |acc, (t, r)| acc + 0.5 * (t[1] - t[0]) * (r[0] + r[1])),
    };
    ArrivalDistribution { times: a.times.clone(), density, total_mass }
}

/// `‖a − b‖ / ‖a‖` with trapezoid weights over `times`; absolute when `a = 0`.
pub fn relative_l2(a: &[Complex64], b: &[Complex64], times: &[f64]) -> f64 {
    let weights = node_weights(times);
    let (num, den) = a.iter().zip(b).zip(&weights).fold((0.0, 0.0), |(n, d), ((x, y), w)| {
        (n + w * (x - y).norm_sqr(), d + w * x.norm_sqr())
    });
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    }
}

fn node_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    if n < 2 {
        return vec![1.0; n];
    }
    (0..n)
        .map(|i| {
            let left = if i > 0 { times[i] - times[i - 1] } else { 0.0 };
            let right = if i + 1 < n { times[i + 1] - times[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// `|p|` on shell at `energy`, clamped at threshold so rounding in `E_p`
/// cannot push it into the gap.
fn momentum_on_shell(d: &Dispersion, energy: f64) -> f64 {
    d.momentum_of_energy(energy).unwrap_or(0.0)
}

/// `2π · (kernel product) · |dp/dE|`, taking the limit 1 where the velocity
/// vanishes together with the kernels.
fn collapse_weight(product: Complex64, speed: f64) -> Complex64 {
    if speed > 0.0 {
        product * (2.0 * PI / speed)
    } else {
        Complex64::new(1.0, 0.0)
    }
}

fn prepare(
    state: &MomentumWavefunction,
    x1: f64,
    x2: f64,
    times: &[f64],
    d: &Dispersion,
    b: BranchConfig,
) -> Result<()> {
    d.check()?;
    if state.grid().half_line() != b.momentum_half_line {
        return Err(Error::ContractViolation(format!(
            "state lives on the {:?} half-line but the branch asks for {:?}",
            state.grid().half_line(),
            b.momentum_half_line
        )));
    }
    if !(x1.is_finite() && x2.is_finite()) {
        return Err(Error::InvalidInput("positions must be finite".into()));
    }
    check_times(times)?;
    let nodes = state.grid().nodes();
    let (p_lo, p_hi) = (nodes[0].abs(), nodes[nodes.len() - 1].abs());
    check_time_resolution(times, d, p_lo.min(p_hi), p_lo.max(p_hi))?;
    if nodes.len() > 1 {
        check_momentum_resolution(
            state.grid().spacing(),
            times,
            d,
            b.energy_sign,
            &[nodes[0], nodes[nodes.len() - 1]],
            x2 - x1,
        )?;
    }
    Ok(())
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidInput("the time grid is empty".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidInput("times must be finite".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("times must be strictly ascending".into()));
    }
    Ok(())
}

/// The samples of `φ₂` must resolve its energy bandwidth: `ΔE · Δt ≤ π`.
fn check_time_resolution(times: &[f64], d: &Dispersion, p_abs_min: f64, p_abs_max: f64) -> Result<()> {
    let bandwidth = d.energy(p_abs_max) - d.energy(p_abs_min);
    let dt = times.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    if bandwidth * dt > PI {
        return Err(Error::Resolution(format!(
            "time step {dt} aliases the energy bandwidth {bandwidth} (ΔE·Δt = {:.3} > π); \
             use at least {} time nodes",
            bandwidth * dt,
            required_nodes(times, bandwidth)
        )));
    }
    Ok(())
}

/// The momentum quadrature must resolve the phase `p(x2 − x1) ∓ E_p t`:
/// `Δp · max |x2 − x1 ∓ v t| ≤ π`.
fn check_momentum_resolution(
    dp: f64,
    times: &[f64],
    d: &Dispersion,
    sign: EnergySign,
    p_ends: &[f64],
    distance: f64,
) -> Result<()> {
    let t_ends = [times[0], times[times.len() - 1]];
    let rate = p_ends
        .iter()
        .flat_map(|&p| t_ends.iter().map(move |&t| (p, t)))
        .map(|(p, t)| (distance - sign.sign() * d.velocity(p) * t).abs())
        .fold(distance.abs(), f64::max);
    if rate * dp > PI {
        return Err(Error::Resolution(format!(
            "momentum step {dp} cannot resolve the phase rate {rate} (Δp·rate = {:.3} > π)",
            rate * dp
        )));
    }
    Ok(())
}

fn required_nodes(times: &[f64], bandwidth: f64) -> usize {
    let span = times[times.len() - 1] - times[0];
    (span * bandwidth / PI).ceil() as usize + 1
}

#[cfg(test)]
mod tests {
    use super::*;

    const FWD: BranchConfig = BranchConfig::forward();

    fn rel(m: f64) -> Dispersion {
        Dispersion::relativistic(m).unwrap()
    }

    fn scenario_state() -> MomentumWavefunction {
        let grid = MomentumGrid::uniform(1e-3, 12.0, 4096, HalfLine::NonNegative).unwrap();
        MomentumWavefunction::gaussian(grid, 5.0, 0.25).unwrap()
    }

    #[test]
    fn grid_rejects_mixed_signs() {
        let err = MomentumGrid::uniform(-1.0, 1.0, 5, HalfLine::NonNegative).unwrap_err();
        assert!(matches!(err, Error::ContractViolation(_)));
        assert!(MomentumGrid::uniform(-1.0, 0.0, 5, HalfLine::NonPositive).is_ok());
        assert!(MomentumGrid::new(vec![0.0, 1.0, 3.0], HalfLine::NonNegative).is_err());
    }

    #[test]
    fn gaussian_is_normalized_and_decays() {
        let s = scenario_state();
        assert!(s.is_normalized(), "{}", s.norm_squared());
        let grid = MomentumGrid::uniform(1e-3, 5.5, 256, HalfLine::NonNegative).unwrap();
        assert!(matches!(
            MomentumWavefunction::gaussian(grid, 5.0, 0.25),
            Err(Error::Leakage(_))
        ));
    }

    #[test]
    fn eigenstate_density_is_flat() {
        let s = MomentumWavefunction::eigenstate(1.0, 1e-3, HalfLine::NonNegative).unwrap();
        let times = linspace(-50.0, 50.0, 1001);
        let a = arrival_amplitude(&s, 0.0, 7.0, &times, &rel(1.0), FWD).unwrap();
        let dist = arrival_distribution(&a);
        let mean = dist.density.iter().sum::<f64>() / dist.density.len() as f64;
        let dev = dist.density.iter().map(|r| (r / mean - 1.0).abs()).fold(0.0, f64::max);
        assert!(dev < 1e-12, "{dev}");
        // |φ₂|² = (v/2π)·Δp with v = 1/√2
        assert!((mean - 1e-3 / (2.0 * PI * 2f64.sqrt())).abs() < 1e-15);
    }

    #[test]
    fn zero_distance_zero_time_is_real() {
        let grid = MomentumGrid::uniform(1e-3, 12.0, 2048, HalfLine::NonNegative).unwrap();
        let s = MomentumWavefunction::gaussian(grid, 5.0, 0.5).unwrap();
        let a = arrival_amplitude(&s, 3.0, 3.0, &[0.0], &rel(1.0), FWD).unwrap();
        let z = a.amplitudes[0];
        assert!(z.im.abs() < 1e-12 * z.re.abs(), "{z}");
        // (2π)^{-1/2} ∫ √(p/E_p) φ dp, frozen from an independent 30-digit evaluation
        assert!((z.re - 0.625_070_017_360_008_7).abs() < 1e-10, "{z}");
    }

    #[test]
    fn unitarity_and_peak() {
        let s = scenario_state();
        let times = linspace(0.0, 40.0, 2000);
        let a = arrival_amplitude(&s, 0.0, 20.0, &times, &rel(1.0), FWD).unwrap();
        let dist = arrival_distribution(&a);
        assert!((dist.total_mass / s.norm_squared() - 1.0).abs() < 1e-3, "{}", dist.total_mass);
        let expected = 20.0 * 26f64.sqrt() / 5.0;
        let peak = dist.peak_time().unwrap();
        assert!((peak / expected - 1.0).abs() < 0.02, "{peak} vs {expected}");
    }

    #[test]
    fn nonrelativistic_peak() {
        let s = scenario_state();
        let times = linspace(0.0, 10.0, 2000);
        let a = nonrel_arrival_amplitude(&s, 0.0, 20.0, &times, 1.0).unwrap();
        let dist = arrival_distribution(&a);
        assert!((dist.peak_time().unwrap() / 4.0 - 1.0).abs() < 0.02);
        assert!((dist.total_mass - 1.0).abs() < 1e-3, "{}", dist.total_mass);
    }

    #[test]
    fn routes_agree() {
        let s = scenario_state();
        let times = linspace(0.0, 40.0, 500);
        let a = arrival_amplitude(&s, 1.0, 21.0, &times, &rel(1.0), FWD).unwrap();
        let b = arrival_amplitude_via_time_basis(&s, 1.0, 21.0, &times, &rel(1.0), FWD).unwrap();
        assert!(relative_l2(&a.amplitudes, &b.amplitudes, &times) < 1e-8);
    }

    #[test]
    fn half_line_mismatch_is_a_contract_violation() {
        let s = scenario_state();
        let b = BranchConfig::new(EnergySign::Positive, HalfLine::NonPositive);
        let err = arrival_amplitude(&s, 0.0, 1.0, &[0.0, 1.0], &rel(1.0), b).unwrap_err();
        assert!(matches!(err, Error::ContractViolation(_)));
    }

    #[test]
    fn coarse_time_grid_is_a_resolution_error() {
        let s = scenario_state();
        let times = linspace(0.0, 40.0, 20);
        let err = arrival_amplitude(&s, 0.0, 20.0, &times, &rel(1.0), FWD).unwrap_err();
        assert!(err.is_resolution(), "{err}");
    }

    #[test]
    fn coarse_momentum_grid_is_a_resolution_error() {
        let grid = MomentumGrid::uniform(1e-3, 12.0, 64, HalfLine::NonNegative).unwrap();
        let s = MomentumWavefunction::gaussian(grid, 5.0, 0.5).unwrap();
        let times = linspace(0.0, 400.0, 40_000);
        let err = arrival_amplitude(&s, 0.0, 200.0, &times, &rel(1.0), FWD).unwrap_err();
        assert!(matches!(err, Error::Resolution(_)), "{err}");
    }

    #[test]
    fn even_routes() {
        let d = rel(1.0);
        let times = linspace(0.0, 30.0, 600);
        let pos = FullLineWavefunction::gaussians(12.0, 4097, 0.25, &[(5.0, Complex64::new(1.0, 0.0))]).unwrap();
        let r = even_kernel_arrival_routes(&pos, 0.0, 10.0, &times, &d, EnergySign::Positive).unwrap();
        assert!(r.l2_discrepancy < 1e-6, "{}", r.l2_discrepancy);

        let c = Complex64::new(0.5f64.sqrt(), 0.0);
        let mixed = FullLineWavefunction::gaussians(12.0, 4097, 0.25, &[(-5.0, c), (5.0, c)]).unwrap();
        let r = even_kernel_arrival_routes(&mixed, 2.0, 2.0, &times, &d, EnergySign::Positive).unwrap();
        assert!(r.l2_discrepancy < 1e-6, "{}", r.l2_discrepancy);
        let r = even_kernel_arrival_routes(&mixed, 0.0, 10.0, &times, &d, EnergySign::Positive).unwrap();
        assert!(r.l2_discrepancy > 0.1, "{}", r.l2_discrepancy);
    }

    #[test]
    fn zero_amplitudes_give_zero_mass() {
        let grid = MomentumGrid::uniform(0.0, 1.0, 8, HalfLine::NonNegative).unwrap();
        let s = MomentumWavefunction::new(grid, vec![Complex64::new(0.0, 0.0); 8]).unwrap();
        let a = arrival_amplitude(&s, 0.0, 1.0, &linspace(0.0, 1.0, 5), &rel(1.0), FWD).unwrap();
        let dist = arrival_distribution(&a);
        assert!(dist.density.iter().all(|&r| r == 0.0));
        assert_eq!(dist.total_mass, 0.0);
    }
}
