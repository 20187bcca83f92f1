//! Smeared-delta validation of the orthogonality relations `⟨t|t'⟩ = δ(t−t')`
//! and `⟨x|x'⟩ = δ(x−x')`.
//!
//! A delta distribution is only meaningful against test functions, so each check
//! builds the truncated kernel `K_Λ(y, y')` from the point kernels in
//! [`crate::dispersion`], applies it to a Gaussian `f`, and reports the relative
//! L² error `‖K_Λ f − f‖ / ‖f‖` for every cutoff `Λ` in an ascending sequence.
//!
//! Branch bookkeeping follows the completeness sums the kernels come from:
//!
//! * time: momentum restricted to one half-line, both energy signs summed;
//! * position: energy restricted to one sign, both momentum signs summed.
//!
//! The position integral `∫ dE (E/p_E) …` is carried out in `p_E`, which removes
//! the threshold singularity exactly. All quadratures are uniform trapezoid
//! rules with an explicit aliasing guard.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{
    even_time_kernel, kernel_x_e, time_kernel, BranchConfig, Dispersion, EnergySign, HalfLine,
    INV_SQRT_2PI,
};
use crate::error::{Error, Result};
use crate::quadrature::trapezoid_weight;

/// Half-width of the sampled window, in units of the Gaussian width.
const WINDOW_WIDTHS: f64 = 10.0;

/// Errors below this are quadrature noise and count as converged.
pub const CONVERGED_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TestFunction {
    /// `exp(−(y−center)²/(2 width²))`
    Gaussian { center: f64, width: f64 },
}

impl TestFunction {
    fn eval(&self, y: f64) -> f64 {
        match *self {
            TestFunction::Gaussian { center, width } => {
                let z = (y - center) / width;
                (-0.5 * z * z).exp()
            }
        }
    }

    fn support(&self) -> (f64, f64) {
        match *self {
            TestFunction::Gaussian { center, width } => (
                center - WINDOW_WIDTHS * width,
                center + WINDOW_WIDTHS * width,
            ),
        }
    }

    fn width(&self) -> f64 {
        match *self {
            TestFunction::Gaussian { width, .. } => width,
        }
    }
}

/// A test function, the spectral cutoffs to sweep, and the number of
/// quadrature nodes per half-line of the spectral variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmearingTest {
    pub test_function: TestFunction,
    pub cutoffs: Vec<f64>,
    pub resolution: usize,
}

impl SmearingTest {
    pub fn gaussian(center: f64, width: f64, cutoffs: &[f64], resolution: usize) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() || !center.is_finite() {
            return Err(Error::InvalidInput(format!(
                "Gaussian test function needs a finite center and positive width, got ({center}, {width})"
            )));
        }
        if cutoffs.is_empty() {
            return Err(Error::InvalidInput("at least one cutoff is required".into()));
        }
        if cutoffs.iter().any(|c| !(*c > 0.0) || !c.is_finite()) {
            return Err(Error::InvalidInput("cutoffs must be positive".into()));
        }
        if cutoffs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("cutoffs must ascend strictly".into()));
        }
        if resolution < 2 {
            return Err(Error::InvalidInput("resolution must be at least 2".into()));
        }
        Ok(Self {
            test_function: TestFunction::Gaussian { center, width },
            cutoffs: cutoffs.to_vec(),
            resolution,
        })
    }

    /// Each cutoff must resolve the test function: `Λ·width ≥ 1`.
    fn check_resolved(&self) -> Result<()> {
        let width = self.test_function.width();
        if let Some(c) = self.cutoffs.iter().find(|c| **c * width < 1.0) {
            return Err(Error::Resolution(format!(
                "cutoff {c} times test width {width} is below 1; the test function is under-resolved"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    Time,
    Position,
    EvenKernel,
    /// Both momentum half-lines with the signed weight `p/E_p`.
    TimeUnrestricted,
    /// Both energy signs with the signed weight `E/p_E`.
    PositionUnrestricted,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Time => "time",
            CheckKind::Position => "position",
            CheckKind::EvenKernel => "even-kernel",
            CheckKind::TimeUnrestricted => "time-unrestricted",
            CheckKind::PositionUnrestricted => "position-unrestricted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrthogonalityReport {
    pub check: CheckKind,
    /// `None` for checks that deliberately span both branches.
    pub branch: Option<BranchConfig>,
    /// `(cutoff, relative L² error)`, ascending in cutoff.
    pub cutoff_sequence: Vec<(f64, f64)>,
    /// Error at the largest cutoff.
    pub reproduction_error: f64,
}

impl OrthogonalityReport {
    pub fn cutoffs(&self) -> Vec<f64> {
        self.cutoff_sequence.iter().map(|c| c.0).collect()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.cutoff_sequence.iter().map(|c| c.1).collect()
    }

    /// Non-increasing along the sequence, allowing each step to grow by the
    /// factor `1 + jitter`; steps that stay below [`CONVERGED_FLOOR`] always pass.
    pub fn is_monotone(&self, jitter: f64) -> bool {
        self.cutoff_sequence
            .windows(2)
            .all(|w| w[1].1 <= CONVERGED_FLOOR || w[1].1 <= w[0].1 * (1.0 + jitter))
    }
}

/// One term of the truncated completeness sum: `weight · b(y) · conj(b(y'))`.
struct Mode<F: Fn(f64) -> Complex64> {
    weight: f64,
    amplitude: F,
}

/// `⟨t|t'⟩ = ∫ dp ⟨t|p⟩⟨p|t'⟩` with `p` on `b.momentum_half_line`, `|p| ≤ Λ`.
pub fn check_time_orthogonality(
    d: &Dispersion,
    b: BranchConfig,
    s: &SmearingTest,
) -> Result<OrthogonalityReport> {
    d.check()?;
    s.check_resolved()?;
    let d = *d;
    let sweep = run_sweep(s, |cutoff| {
        let nodes = half_line_nodes(cutoff, s.resolution, b.momentum_half_line);
        let dp = cutoff / (s.resolution - 1) as f64;
        let modes = [b.energy_sign, b.energy_sign.flipped()]
            .into_iter()
            .flat_map(|sign| {
                nodes.iter().enumerate().map(move |(i, &p)| Mode {
                    weight: trapezoid_weight(i, s.resolution, dp),
                    amplitude: move |t| time_kernel(p, t, &d, sign).conj(),
                })
            })
            .collect::<Vec<_>>();
        let max_freq = d.energy(cutoff);
        let alias_rate = dp * d.velocity(cutoff).abs();
        Ok((modes, max_freq, alias_rate))
    })?;
    Ok(report(CheckKind::Time, Some(b), sweep))
}

/// `⟨x|x'⟩ = ∫ dE ⟨x|E⟩⟨E|x'⟩` with `E` on `b.energy_sign`, `|E| ≤ Λ`.
pub fn check_position_orthogonality(
    d: &Dispersion,
    b: BranchConfig,
    s: &SmearingTest,
) -> Result<OrthogonalityReport> {
    d.check()?;
    s.check_resolved()?;
    let d = *d;
    let sweep = run_sweep(s, |cutoff| {
        let (nodes, dq) = energy_cutoff_nodes(&d, cutoff, s.resolution)?;
        let mut modes = Vec::with_capacity(2 * nodes.len());
        for half in [b.momentum_half_line, b.momentum_half_line.flipped()] {
            let branch = BranchConfig::new(b.energy_sign, half);
            for (i, &q) in nodes.iter().enumerate() {
                modes.push(position_mode(&d, branch, q, trapezoid_weight(i, nodes.len(), dq))?);
            }
        }
        Ok((modes, *nodes.last().unwrap(), dq))
    })?;
    Ok(report(CheckKind::Position, Some(b), sweep))
}

/// Same as the time check but with the even kernel `√(|p|/2E_p)` over the
/// whole momentum line; no branch restriction on momentum.
pub fn check_even_kernel_orthogonality(
    d: &Dispersion,
    s: &SmearingTest,
) -> Result<OrthogonalityReport> {
    d.check()?;
    s.check_resolved()?;
    let d = *d;
    let sweep = run_sweep(s, |cutoff| {
        let n = 2 * s.resolution - 1;
        let dp = cutoff / (s.resolution - 1) as f64;
        let nodes = symmetric_nodes(cutoff, s.resolution);
        let modes = [EnergySign::Positive, EnergySign::Negative]
            .into_iter()
            .flat_map(|sign| {
                nodes.iter().enumerate().map(move |(i, &p)| Mode {
                    weight: trapezoid_weight(i, n, dp),
                    amplitude: move |t| even_time_kernel(p, t, &d, sign).conj(),
                })
            })
            .collect::<Vec<_>>();
        let max_freq = d.energy(cutoff);
        let alias_rate = dp * d.velocity(cutoff).abs();
        Ok((modes, max_freq, alias_rate))
    })?;
    Ok(report(CheckKind::EvenKernel, None, sweep))
}

/// Control: both momentum half-lines, weighted by the signed `p/E_p` that the
/// unrestricted product `√(p/E_p)·√(p/E_p)` produces. The integrand is odd in
/// `p`, so the reproduced function collapses.
pub fn check_time_orthogonality_unrestricted(
    d: &Dispersion,
    s: &SmearingTest,
) -> Result<OrthogonalityReport> {
    d.check()?;
    s.check_resolved()?;
    let d = *d;
    let sweep = run_sweep(s, |cutoff| {
        let n = 2 * s.resolution - 1;
        let dp = cutoff / (s.resolution - 1) as f64;
        let nodes = symmetric_nodes(cutoff, s.resolution);
        let modes = [EnergySign::Positive, EnergySign::Negative]
            .into_iter()
            .flat_map(|sign| {
                nodes.iter().enumerate().map(move |(i, &p)| Mode {
                    weight: p.signum() * trapezoid_weight(i, n, dp),
                    amplitude: move |t| time_kernel(p, t, &d, sign).conj(),
                })
            })
            .collect::<Vec<_>>();
        let max_freq = d.energy(cutoff);
        let alias_rate = dp * d.velocity(cutoff).abs();
        Ok((modes, max_freq, alias_rate))
    })?;
    Ok(report(CheckKind::TimeUnrestricted, None, sweep))
}

/// Control: both energy signs weighted by the signed `E/p_E`.
pub fn check_position_orthogonality_unrestricted(
    d: &Dispersion,
    s: &SmearingTest,
) -> Result<OrthogonalityReport> {
    d.check()?;
    s.check_resolved()?;
    let d = *d;
    let sweep = run_sweep(s, |cutoff| {
        let (nodes, dq) = energy_cutoff_nodes(&d, cutoff, s.resolution)?;
        let mut modes = Vec::with_capacity(4 * nodes.len());
        for energy_sign in [EnergySign::Positive, EnergySign::Negative] {
            for half in [HalfLine::NonNegative, HalfLine::NonPositive] {
                let branch = BranchConfig::new(energy_sign, half);
                for (i, &q) in nodes.iter().enumerate() {
                    let w = energy_sign.sign() * trapezoid_weight(i, nodes.len(), dq);
                    modes.push(position_mode(&d, branch, q, w)?);
                }
            }
        }
        Ok((modes, *nodes.last().unwrap(), dq))
    })?;
    Ok(report(CheckKind::PositionUnrestricted, None, sweep))
}

/// `√(dE/dq)·⟨x|E(q)⟩`, finite at threshold where it tends to `e^{±iqx}/√(2π)`.
fn position_mode(
    d: &Dispersion,
    branch: BranchConfig,
    q: f64,
    weight: f64,
) -> Result<Mode<impl Fn(f64) -> Complex64>> {
    let energy = branch.energy_sign.sign() * d.energy(q);
    let (jacobian_root, probe) = if q == 0.0 {
        (1.0, None)
    } else {
        // evaluate once to surface domain/branch errors before the sweep
        kernel_x_e(0.0, energy, d, branch)?;
        (d.velocity(q).abs().sqrt(), Some(energy))
    };
    let d = *d;
    let k_sign = branch.momentum_half_line.sign();
    Ok(Mode {
        weight,
        amplitude: move |x| match probe {
            // kernel_x_e cannot fail here: branch and threshold were checked above
            Some(e) => kernel_x_e(x, e, &d, branch).unwrap() * jacobian_root,
            None => Complex64::from_polar(INV_SQRT_2PI, k_sign * q * x),
        },
    })
}

fn half_line_nodes(cutoff: f64, n: usize, half: HalfLine) -> Vec<f64> {
    let h = cutoff / (n - 1) as f64;
    (0..n)
        .map(|i| half.sign() * if i == n - 1 { cutoff } else { h * i as f64 })
        .collect()
}

fn symmetric_nodes(cutoff: f64, n_half: usize) -> Vec<f64> {
    let h = cutoff / (n_half - 1) as f64;
    let last = n_half as isize - 1;
    (-last..=last)
        .map(|i| match i {
            i if i == -last => -cutoff,
            i if i == last => cutoff,
            i => h * i as f64,
        })
        .collect()
}

/// Nodes in `q = p_E` on `[0, p_E(Λ)]`.
fn energy_cutoff_nodes(d: &Dispersion, cutoff: f64, n: usize) -> Result<(Vec<f64>, f64)> {
    if !(cutoff > d.threshold_energy()) {
        return Err(Error::Domain(format!(
            "energy cutoff {cutoff} does not exceed threshold {}",
            d.threshold_energy()
        )));
    }
    let q_max = d.momentum_of_energy(cutoff)?;
    let dq = q_max / (n - 1) as f64;
    Ok((half_line_nodes(q_max, n, HalfLine::NonNegative), dq))
}

fn run_sweep<F, A>(s: &SmearingTest, build: F) -> Result<Vec<(f64, f64)>>
where
    F: Fn(f64) -> Result<(Vec<Mode<A>>, f64, f64)>,
    A: Fn(f64) -> Complex64 + Sync,
{
    s.cutoffs
        .iter()
        .map(|&cutoff| {
            let (modes, max_freq, alias_rate) = build(cutoff)?;
            reproduce(&s.test_function, &modes, max_freq, alias_rate).map(|e| (cutoff, e))
        })
        .collect()
}

/// Applies the truncated kernel to `f` and returns `‖g − f‖/‖f‖`.
///
/// `max_freq` bounds the phase rate of every mode in `y`; `alias_rate` is the
/// largest phase step between adjacent spectral nodes per unit `|y − y'|`.
fn reproduce<A>(f: &TestFunction, modes: &[Mode<A>], max_freq: f64, alias_rate: f64) -> Result<f64>
where
    A: Fn(f64) -> Complex64 + Sync,
{
    let (lo, hi) = f.support();
    let span = hi - lo;
    if alias_rate * span > std::f64::consts::PI {
        return Err(Error::Resolution(format!(
            "spectral spacing aliases: phase step {:.4} rad across the {span}-wide window exceeds π; raise the resolution",
            alias_rate * span
        )));
    }
    // Sampling fine enough that f·e^{iωy} and |g−f|² are both unaliased.
    let dy_max = std::f64::consts::PI / (max_freq + 10.0 / f.width());
    let n_y = (span / dy_max).ceil() as usize + 1;
    let dy = span / (n_y - 1) as f64;
    let ys: Vec<f64> = (0..n_y).map(|i| lo + dy * i as f64).collect();
    let fs: Vec<f64> = ys.iter().map(|&y| f.eval(y)).collect();

    let coefficients: Vec<Complex64> = modes
        .par_iter()
        .map(|m| {
            ys.iter()
                .zip(&fs)
                .enumerate()
                .fold(Complex64::new(0.0, 0.0), |acc, (i, (&y, &fy))| {
                    acc + (m.amplitude)(y).conj() * (fy * trapezoid_weight(i, n_y, dy))
                })
        })
        .collect();

    let residual: Vec<f64> = ys
        .par_iter()
        .zip(fs.par_iter())
        .map(|(&y, &fy)| {
            let g = modes
                .iter()
                .zip(&coefficients)
                .fold(Complex64::new(0.0, 0.0), |acc, (m, c)| {
                    acc + (m.amplitude)(y) * c * m.weight
                });
            (g - fy).norm_sqr()
        })
        .collect();

    let num: f64 = residual
        .iter()
        .enumerate()
        .fold(0.0, |acc, (i, r)| acc + trapezoid_weight(i, n_y, dy) * r);
    let den: f64 = fs
        .iter()
        .enumerate()
        .fold(0.0, |acc, (i, fy)| acc + trapezoid_weight(i, n_y, dy) * fy * fy);
    Ok((num / den).sqrt())
}

fn report(
    check: CheckKind,
    branch: Option<BranchConfig>,
    sweep: Vec<(f64, f64)>,
) -> OrthogonalityReport {
    let reproduction_error = sweep.last().map(|c| c.1).unwrap_or(f64::NAN);
    OrthogonalityReport {
        check,
        branch,
        cutoff_sequence: sweep,
        reproduction_error,
    }
}
