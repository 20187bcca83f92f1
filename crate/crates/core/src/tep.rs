//! Ordinary time evolution, used to cross-check arrival densities.
//!
//! Free evolution is exact in the momentum representation: the state is
//! transformed with an FFT, each plane wave picks up `e^{∓iE_p Δt}`, and the
//! result is transformed back. The detector-side observable is the
//! probability current at a fixed position.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::dispersion::{BranchConfig, Dispersion, HalfLine, Regime};
use crate::error::{Error, Result};
use crate::pep::{arrival_amplitude, arrival_distribution, MomentumWavefunction, SPACING_TOLERANCE};
use crate::quadrature::{linspace, trapezoid, uniform_spacing};

/// Largest density allowed at either end of the position grid, relative to
/// the maximum density.
pub const LEAKAGE_THRESHOLD: f64 = 1e-6;
/// Largest `σ_p / ⟨p⟩` accepted by the cross-check.
pub const MAX_RELATIVE_SPREAD: f64 = 0.1;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `ψ(x)` on a uniform position grid at a fixed time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PositionWavefunction {
    positions: Vec<f64>,
    spacing: f64,
    amplitudes: Vec<Complex64>,
    timestamp: f64,
}

impl PositionWavefunction {
    pub fn new(positions: Vec<f64>, amplitudes: Vec<Complex64>, timestamp: f64) -> Result<Self> {
        if positions.len() != amplitudes.len() {
            return Err(Error::InvalidInput(format!(
                "{} amplitudes for {} positions",
                amplitudes.len(),
                positions.len()
            )));
        }
        if !timestamp.is_finite() {
            return Err(Error::InvalidInput("timestamp must be finite".into()));
        }
        let spacing = uniform_spacing(&positions, SPACING_TOLERANCE)?;
        Ok(Self { positions, spacing, amplitudes, timestamp })
    }

    /// Unit-norm Gaussian `(2πσ²)^{-1/4} e^{−(x−x0)²/4σ²} e^{ip0 x}`.
    pub fn gaussian(positions: Vec<f64>, x0: f64, p0: f64, sigma_x: f64, timestamp: f64) -> Result<Self> {
        if !(sigma_x > 0.0) {
            return Err(Error::InvalidInput(format!("sigma_x = {sigma_x} must be positive")));
        }
        let norm = (2.0 * PI * sigma_x * sigma_x).powf(-0.25);
        let amplitudes = positions
            .iter()
            .map(|&x| {
                let z = (x - x0) / sigma_x;
                Complex64::from_polar(norm * (-0.25 * z * z).exp(), p0 * x)
            })
            .collect();
        Self::new(positions, amplitudes, timestamp)
    }

    /// `ψ(x) = (2π)^{-1/2} ∫ e^{ip(x − x1)} φ(p) dp`, the packet centred on
    /// `x1` that the momentum state describes, at time `timestamp`.
    pub fn from_momentum(
        state: &MomentumWavefunction,
        x1: f64,
        positions: Vec<f64>,
        timestamp: f64,
    ) -> Result<Self> {
        let grid = state.grid();
        let amplitudes = positions
            .par_iter()
            .map(|&x| {
                grid.nodes()
                    .iter()
                    .zip(state.amplitudes())
                    .enumerate()
                    .fold(Complex64::new(0.0, 0.0), |acc, (i, (&p, phi))| {
                        acc + Complex64::cis(p * (x - x1)) * phi * grid.weight(i)
                    })
                    * INV_SQRT_2PI
            })
            .collect();
        Self::new(positions, amplitudes, timestamp)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn timestamp(&self) -> f64 {
        self.timestamp
    }

    /// `Σ|ψ|² Δx`.
    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.spacing
    }

    /// Flag, not an error.
    pub fn is_normalized(&self) -> bool {
        (self.norm_squared() - 1.0).abs() <= 1e-6
    }

    /// `⟨x⟩` under `|ψ|²`.
    pub fn centroid(&self) -> f64 {
        let (num, den) = self
            .positions
            .iter()
            .zip(&self.amplitudes)
            .fold((0.0, 0.0), |(n, d), (x, a)| (n + x * a.norm_sqr(), d + a.norm_sqr()));
        num / den
    }

    /// `ψ(−x)` on the negated grid; the grid must be symmetric for the nodes
    /// to line up.
    pub fn mirrored(&self) -> Self {
        Self {
            positions: self.positions.iter().rev().map(|x| -x).collect(),
            spacing: self.spacing,
            amplitudes: self.amplitudes.iter().rev().copied().collect(),
            timestamp: self.timestamp,
        }
    }

    /// `⟨p⟩` from the fourth-order derivative stencil.
    fn mean_momentum(&self) -> f64 {
        let (num, den) = (2..self.amplitudes.len().saturating_sub(2)).fold((0.0, 0.0), |(n, d), i| {
            let a = self.amplitudes[i];
            (n + (a.conj() * self.derivative(i)).im, d + a.norm_sqr())
        });
        if den > 0.0 {
            num / den
        } else {
            0.0
        }
    }

    /// Fourth-order centred difference; valid for `2 ≤ i < n − 2`.
    fn derivative(&self, i: usize) -> Complex64 {
        let a = &self.amplitudes;
        (a[i - 2] - a[i - 1] * 8.0 + a[i + 1] * 8.0 - a[i + 2]) / (12.0 * self.spacing)
    }
}

/// Evolves `state` to `t2` on the energy branch of `b`.
///
/// The momentum half-line of `b` plays no role here: ordinary evolution keeps
/// both momentum signs and restricts only the energy sign.
pub fn evolve_tep(
    state: &PositionWavefunction,
    t2: f64,
    d: &Dispersion,
    b: BranchConfig,
) -> Result<PositionWavefunction> {
    d.check()?;
    let dt = t2 - state.timestamp;
    if !(dt >= 0.0) {
        return Err(Error::ContractViolation(format!(
            "cannot evolve backwards from t = {} to t = {t2}",
            state.timestamp
        )));
    }
    if dt == 0.0 {
        return Ok(state.clone());
    }
    let n = state.amplitudes.len();
    let mut buf = state.amplitudes.clone();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let dk = 2.0 * PI / (n as f64 * state.spacing);
    let sign = b.energy_sign.sign();
    for (j, z) in buf.iter_mut().enumerate() {
        // FFT ordering: non-negative frequencies first, then negative ones
        let k = if 2 * j < n { j as f64 } else { j as f64 - n as f64 } * dk;
        *z *= Complex64::cis(-sign * d.energy(k) * dt) / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);

    let evolved = PositionWavefunction {
        positions: state.positions.clone(),
        spacing: state.spacing,
        amplitudes: buf,
        timestamp: t2,
    };
    check_leakage(&evolved)?;
    Ok(evolved)
}

/// Probability current at `x`, linearly interpolated between nodes.
///
/// `J = Im(ψ* ∂ψ/∂x) / m_eff` with a fourth-order centred difference. In the
/// nonrelativistic regime `m_eff = m`. In the relativistic regime
/// `m_eff = E_{⟨p⟩}` with `⟨p⟩` taken from the state, an approximation that
/// holds for quasi-monochromatic packets.
pub fn probability_current(state: &PositionWavefunction, x: f64, d: &Dispersion) -> Result<f64> {
    d.check()?;
    let n = state.positions.len();
    if n < 5 {
        return Err(Error::InvalidInput("the current needs at least five grid nodes".into()));
    }
    let (lo, hi) = (state.positions[2], state.positions[n - 3]);
    if !(x >= lo && x <= hi) {
        return Err(Error::Domain(format!(
            "x = {x} is outside the grid interior [{lo}, {hi}]"
        )));
    }
    let m_eff = effective_mass(state, d);
    if !(m_eff > 0.0) {
        return Err(Error::Domain(
            "the current of a massless packet at rest is undefined".into(),
        ));
    }
    let s = (x - state.positions[0]) / state.spacing;
    let i = (s.floor() as usize).clamp(2, n - 4);
    let frac = s - i as f64;
    let j = |i: usize| (state.amplitudes[i].conj() * state.derivative(i)).im / m_eff;
    Ok(if frac == 0.0 { j(i) } else { (1.0 - frac) * j(i) + frac * j(i + 1) })
}

fn effective_mass(state: &PositionWavefunction, d: &Dispersion) -> f64 {
    match d.regime() {
        Regime::Nonrelativistic => d.mass(),
        Regime::Relativistic => d.energy(state.mean_momentum()),
    }
}

fn check_leakage(state: &PositionWavefunction) -> Result<()> {
    let a = &state.amplitudes;
    let peak = a.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    let edge = a[0].norm_sqr().max(a[a.len() - 1].norm_sqr());
    if edge > LEAKAGE_THRESHOLD * peak {
        return Err(Error::Leakage(format!(
            "density at the grid edge is {:.3e} of its maximum at t = {}; widen the position grid",
            edge / peak,
            state.timestamp
        )));
    }
    Ok(())
}

/// Detection-time window `[t_min, t_max]` sampled at `nodes` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeWindow {
    pub t_min: f64,
    pub t_max: f64,
    pub nodes: usize,
}

impl TimeWindow {
    pub fn new(t_min: f64, t_max: f64, nodes: usize) -> Result<Self> {
        if nodes < 2 || !(t_max > t_min) {
            return Err(Error::InvalidInput(format!(
                "need nodes ≥ 2 and t_max > t_min, got {nodes} on [{t_min}, {t_max}]"
            )));
        }
        Ok(Self { t_min, t_max, nodes })
    }

    pub fn times(&self) -> Vec<f64> {
        linspace(self.t_min, self.t_max, self.nodes)
    }
}

/// Both traces of the cross-check, each normalized to unit mass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrosscheckReport {
    pub times: Vec<f64>,
    pub arrival_density: Vec<f64>,
    pub current: Vec<f64>,
    /// `∫|φ₂|² dt` before normalization.
    pub arrival_mass: f64,
    /// `∫J dt` before normalization.
    pub current_mass: f64,
    pub relative_spread: f64,
    /// Position grid used for the ordinary evolution.
    pub position_nodes: usize,
    pub position_spacing: f64,
    pub l1_distance: f64,
}

/// Compares the arrival density at `x2` with the current trace of the same
/// packet evolved in time.
///
/// The state must move right (non-negative momenta, `x2 > x1`) and be
/// quasi-monochromatic, `σ_p/⟨p⟩ ≤ 0.1`. The position grid is chosen from the
/// packet's classical trajectory and spread over the window.
pub fn crosscheck_arrival_vs_current(
    state: &MomentumWavefunction,
    x1: f64,
    x2: f64,
    window: TimeWindow,
    d: &Dispersion,
) -> Result<CrosscheckReport> {
    d.check()?;
    if state.is_eigenstate() {
        return Err(Error::ContractViolation(
            "a momentum eigenstate has a flat arrival density with no normalizable window".into(),
        ));
    }
    if state.grid().half_line() != HalfLine::NonNegative || !(x2 > x1) {
        return Err(Error::ContractViolation(
            "the cross-check needs a right-moving state: p ≥ 0 and x2 > x1".into(),
        ));
    }
    let (p_mean, sigma_p) = momentum_moments(state);
    let relative_spread = sigma_p / p_mean;
    if !(relative_spread <= MAX_RELATIVE_SPREAD) {
        return Err(Error::ContractViolation(format!(
            "σ_p/⟨p⟩ = {relative_spread:.4} exceeds {MAX_RELATIVE_SPREAD}; the current comparison \
             needs a quasi-monochromatic packet"
        )));
    }

    let times = window.times();
    let branch = BranchConfig::forward();
    let pep = arrival_distribution(&arrival_amplitude(state, x1, x2, &times, d, branch)?);

    let positions = position_grid(state, x1, x2, window, d, p_mean, sigma_p);
    let (position_nodes, position_spacing) = (positions.len(), positions[1] - positions[0]);
    let start = PositionWavefunction::from_momentum(state, x1, positions, window.t_min)?;
    let current = times
        .par_iter()
        .map(|&t| {
            let psi = evolve_tep(&start, t, d, branch)?;
            probability_current(&psi, x2, d)
        })
        .collect::<Result<Vec<f64>>>()?;

    let dt = times[1] - times[0];
    let arrival_mass = trapezoid(&pep.density, dt);
    let current_mass = trapezoid(&current, dt);
    if !(arrival_mass > 0.0 && current_mass > 0.0) {
        return Err(Error::Domain(
            "no flux reaches the detector inside the window".into(),
        ));
    }
    let arrival_density: Vec<f64> = pep.density.iter().map(|r| r / arrival_mass).collect();
    let current: Vec<f64> = current.iter().map(|j| j / current_mass).collect();
    let gaps: Vec<f64> = arrival_density.iter().zip(&current).map(|(a, j)| (a - j).abs()).collect();
    let l1_distance = trapezoid(&gaps, dt);
    Ok(CrosscheckReport {
        times,
        arrival_density,
        current,
        arrival_mass,
        current_mass,
        relative_spread,
        position_nodes,
        position_spacing,
        l1_distance,
    })
}

fn momentum_moments(state: &MomentumWavefunction) -> (f64, f64) {
    let grid = state.grid();
    let (w, m1, m2) = grid.nodes().iter().zip(state.amplitudes()).enumerate().fold(
        (0.0, 0.0, 0.0),
        |(w, m1, m2), (i, (&p, a))| {
            let r = a.norm_sqr() * grid.weight(i);
            (w + r, m1 + r * p, m2 + r * p * p)
        },
    );
    let mean = m1 / w;
    (mean, (m2 / w - mean * mean).max(0.0).sqrt())
}

/// Spans the packet from `t_min` to `t_max` with twelve standard deviations
/// of margin on each side, at a spacing that resolves the momentum grid.
fn position_grid(
    state: &MomentumWavefunction,
    x1: f64,
    x2: f64,
    window: TimeWindow,
    d: &Dispersion,
    p_mean: f64,
    sigma_p: f64,
) -> Vec<f64> {
    const MARGIN: f64 = 12.0;
    let p_max = state.grid().nodes().last().copied().unwrap_or(p_mean).abs();
    let dx = 0.05f64.min(PI / (2.0 * p_max));
    let v0 = d.velocity(p_mean);
    // spread of velocities across the packet, dv/dp · σ_p
    let h = 1e-4 * p_mean.max(1e-8);
    let sigma_v = ((d.velocity(p_mean + h) - d.velocity(p_mean - h)) / (2.0 * h)).abs() * sigma_p;
    let sigma_x0 = 0.5 / sigma_p;
    let extent = |t: f64| {
        let dt = t - window.t_min;
        let centre = x1 + v0 * dt;
        let spread = sigma_x0.hypot(sigma_v * dt);
        (centre - MARGIN * spread, centre + MARGIN * spread)
    };
    let (a0, b0) = extent(window.t_min);
    let (a1, b1) = extent(window.t_max);
    let lo = a0.min(a1).min(x2 - 1.0);
    let hi = b0.max(b1).max(x2 + 1.0);
    // a power-of-two length keeps every FFT on the fast radix-2 path
    let n = (((hi - lo) / dx).ceil() as usize + 1).next_power_of_two();
    linspace(lo, lo + dx * (n - 1) as f64, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pep::MomentumGrid;

    fn rel(m: f64) -> Dispersion {
        Dispersion::relativistic(m).unwrap()
    }

    fn packet(sigma_x: f64) -> PositionWavefunction {
        PositionWavefunction::gaussian(linspace(-100.0, 100.0, 8001), -40.0, 5.0, sigma_x, 0.0).unwrap()
    }

    #[test]
    fn identity_and_norm() {
        let s = packet(2.0);
        assert!(s.is_normalized(), "{}", s.norm_squared());
        let same = evolve_tep(&s, 0.0, &rel(1.0), BranchConfig::forward()).unwrap();
        assert_eq!(same, s);
        let later = evolve_tep(&s, 3.0, &rel(1.0), BranchConfig::forward()).unwrap();
        assert!((later.norm_squared() - s.norm_squared()).abs() < 1e-10);
        assert!(evolve_tep(&later, 2.0, &rel(1.0), BranchConfig::forward()).is_err());
    }

    #[test]
    fn centroid_moves_at_group_velocity() {
        let s = packet(4.0);
        let d = rel(1.0);
        let a = evolve_tep(&s, 1.0, &d, BranchConfig::forward()).unwrap();
        let b = evolve_tep(&s, 3.0, &d, BranchConfig::forward()).unwrap();
        let v = (b.centroid() - a.centroid()) / 2.0;
        let expected = 5.0 / 26f64.sqrt();
        assert!((v / expected - 1.0).abs() < 1e-2, "{v} vs {expected}");
    }

    #[test]
    fn composition() {
        let s = packet(2.0);
        let d = rel(1.0);
        let f = BranchConfig::forward();
        let two_step = evolve_tep(&evolve_tep(&s, 1.5, &d, f).unwrap(), 4.0, &d, f).unwrap();
        let one_step = evolve_tep(&s, 4.0, &d, f).unwrap();
        let err = two_step
            .amplitudes()
            .iter()
            .zip(one_step.amplitudes())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn leakage_is_reported() {
        let s = packet(2.0);
        // centroid reaches the right edge near t = 142.8
        let err = evolve_tep(&s, 142.8, &rel(1.0), BranchConfig::forward()).unwrap_err();
        assert!(matches!(err, Error::Leakage(_)), "{err}");
    }

    #[test]
    fn plane_wave_current() {
        let s = PositionWavefunction::gaussian(linspace(-100.0, 100.0, 4001), 0.0, 5.0, 30.0, 0.0).unwrap();
        let d = Dispersion::nonrelativistic(1.0).unwrap();
        let j = probability_current(&s, 0.0, &d).unwrap();
        let rho = s.amplitudes()[2000].norm_sqr();
        assert!((j / (5.0 * rho) - 1.0).abs() < 1e-2, "{j} vs {}", 5.0 * rho);
    }

    #[test]
    fn real_state_has_no_current_and_mirror_flips_it() {
        let d = Dispersion::nonrelativistic(1.0).unwrap();
        let real = PositionWavefunction::gaussian(linspace(-20.0, 20.0, 801), 1.0, 0.0, 2.0, 0.0).unwrap();
        assert!(probability_current(&real, 0.3, &d).unwrap().abs() < 1e-12);

        let s = PositionWavefunction::gaussian(linspace(-20.0, 20.0, 801), 1.0, 3.0, 2.0, 0.0).unwrap();
        let m = s.mirrored();
        for x in [-2.0, 0.37, 1.0, 4.2] {
            let a = probability_current(&s, x, &d).unwrap();
            let b = probability_current(&m, -x, &d).unwrap();
            assert!((a + b).abs() < 1e-10, "{a} {b}");
        }
        assert!(matches!(probability_current(&s, 20.0, &d), Err(Error::Domain(_))));
    }

    #[test]
    fn crosscheck_contracts() {
        let d = rel(1.0);
        let w = TimeWindow::new(0.0, 40.0, 400).unwrap();
        let eig = MomentumWavefunction::eigenstate(5.0, 1e-3, HalfLine::NonNegative).unwrap();
        assert!(matches!(
            crosscheck_arrival_vs_current(&eig, 0.0, 20.0, w, &d),
            Err(Error::ContractViolation(_))
        ));
        let grid = MomentumGrid::uniform(1e-3, 20.0, 4096, HalfLine::NonNegative).unwrap();
        let wide = MomentumWavefunction::gaussian(grid, 5.0, 1.0).unwrap();
        assert!(matches!(
            crosscheck_arrival_vs_current(&wide, 0.0, 20.0, w, &d),
            Err(Error::ContractViolation(_))
        ));
    }
}
