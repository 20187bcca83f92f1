//! WKB tunneling through a one-dimensional barrier.
//!
//! Under the barrier the generalized momentum `√(2m(E − V))` is imaginary and
//! the Jacobi action `W = ∫p dx` picks up `i·Im W`. The tunneling probability
//! is reported as the bare exponent `exp(−2 Im W)`, with no prefactor.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_chebyshev_sqrt_endpoints, linspace};

/// Nodes of the endpoint-weighted rule used for smooth barriers.
pub const ACTION_NODES: usize = 256;
/// Samples used to locate sign changes of `V − E` before bisection.
pub const SCAN_SAMPLES: usize = 4096;

/// One-dimensional barrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PotentialSpec {
    /// `V0` on `[left, left + width]`, zero elsewhere.
    Rectangular { v0: f64, left: f64, width: f64 },
    /// `V0 − k(x − center)²/2`.
    Parabolic { v0: f64, curvature: f64, center: f64 },
    /// Linear interpolation through `(x, V)` pairs, constant beyond the ends.
    Tabulated { points: Vec<(f64, f64)> },
}

impl PotentialSpec {
    pub fn rectangular(v0: f64, left: f64, width: f64) -> Result<Self> {
        if !(v0 > 0.0 && width > 0.0 && left.is_finite() && v0.is_finite() && width.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "a rectangular barrier needs V0 > 0 and width > 0, got V0 = {v0}, width = {width}"
            )));
        }
        Ok(Self::Rectangular { v0, left, width })
    }

    pub fn parabolic(v0: f64, curvature: f64, center: f64) -> Result<Self> {
        if !(curvature > 0.0 && v0.is_finite() && curvature.is_finite() && center.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "a parabolic barrier needs a positive curvature, got k = {curvature}"
            )));
        }
        Ok(Self::Parabolic { v0, curvature, center })
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidInput("a tabulated barrier needs at least two points".into()));
        }
        if points.iter().any(|(x, v)| !(x.is_finite() && v.is_finite())) {
            return Err(Error::InvalidInput("tabulated points must be finite".into()));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::InvalidInput(
                "tabulated x values must be strictly ascending".into(),
            ));
        }
        Ok(Self::Tabulated { points })
    }

    /// `V(x)`.
    pub fn value(&self, x: f64) -> f64 {
        match self {
            Self::Rectangular { v0, left, width } => {
                if x >= *left && x <= left + width {
                    *v0
                } else {
                    0.0
                }
            }
            Self::Parabolic { v0, curvature, center } => {
                let z = x - center;
                v0 - 0.5 * curvature * z * z
            }
            Self::Tabulated { points } => interpolate(points, x),
        }
    }

    /// A bracket that contains the whole barrier.
    pub fn default_bracket(&self) -> (f64, f64) {
        match self {
            Self::Rectangular { left, width, .. } => (left - width.max(1.0), left + 2.0 * width.max(1.0)),
            Self::Parabolic { v0, curvature, center } => {
                let half = 2.0 * (2.0 * v0.abs().max(1.0) / curvature).sqrt() + 1.0;
                (center - half, center + half)
            }
            Self::Tabulated { points } => (points[0].0, points[points.len() - 1].0),
        }
    }

    /// Scale used for root tolerances: `max(1, |V|max)`.
    fn scale(&self) -> f64 {
        let top = match self {
            Self::Rectangular { v0, .. } | Self::Parabolic { v0, .. } => v0.abs(),
            Self::Tabulated { points } => points.iter().map(|p| p.1.abs()).fold(0.0, f64::max),
        };
        top.max(1.0)
    }

    /// Abscissae where `V` has a kink, inside `(lo, hi)`.
    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let xs: Vec<f64> = match self {
            Self::Rectangular { left, width, .. } => vec![*left, left + width],
            Self::Parabolic { .. } => Vec::new(),
            Self::Tabulated { points } => points.iter().map(|p| p.0).collect(),
        };
        xs.into_iter().filter(|&x| x > lo && x < hi).collect()
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let n = points.len();
    if x <= points[0].0 {
        return points[0].1;
    }
    if x >= points[n - 1].0 {
        return points[n - 1].1;
    }
    // first point strictly to the right of x
    let j = points.partition_point(|p| p.0 <= x);
    let (x0, v0) = points[j - 1];
    let (x1, v1) = points[j];
    if x == x0 {
        return v0;
    }
    v0 + (v1 - v0) * (x - x0) / (x1 - x0)
}

/// Outcome of a WKB evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunnelingResult {
    pub energy: f64,
    pub turning_points: (f64, f64),
    pub im_w: f64,
    pub probability: f64,
}

/// Ends `(a, b)` of the single classically forbidden interval in `bracket`.
///
/// Rectangular barriers return their exact edges. Other barriers are scanned
/// for sign changes of `V − E` and each root is refined by bisection.
pub fn find_turning_points(v: &PotentialSpec, energy: f64, bracket: (f64, f64)) -> Result<(f64, f64)> {
    let (lo, hi) = bracket;
    if !(hi > lo) || !energy.is_finite() {
        return Err(Error::InvalidInput(format!(
            "need a finite energy and an ascending bracket, got E = {energy}, [{lo}, {hi}]"
        )));
    }
    if let PotentialSpec::Rectangular { v0, left, width } = v {
        if energy >= *v0 {
            return Err(Error::NoTunneling { energy, top: *v0 });
        }
        if energy < 0.0 {
            return Err(Error::Domain(format!(
                "E = {energy} is below the potential outside the barrier; \
                 the forbidden region is unbounded"
            )));
        }
        let (a, b) = (*left, left + width);
        if a <= lo || b >= hi {
            return Err(Error::Domain(format!(
                "the barrier [{a}, {b}] is not inside the bracket [{lo}, {hi}]"
            )));
        }
        return Ok((a, b));
    }

    let f = |x: f64| v.value(x) - energy;
    let mut xs = linspace(lo, hi, SCAN_SAMPLES);
    xs.extend(v.breakpoints(lo, hi));
    xs.sort_by(f64::total_cmp);
    xs.dedup();

    let top = xs.iter().map(|&x| v.value(x)).fold(f64::NEG_INFINITY, f64::max);
    let forbidden: Vec<bool> = xs.iter().map(|&x| f(x) > 0.0).collect();
    if !forbidden.iter().any(|&b| b) {
        return Err(Error::NoTunneling { energy, top });
    }
    if forbidden[0] || forbidden[forbidden.len() - 1] {
        return Err(Error::Domain(format!(
            "the forbidden region reaches the bracket edge [{lo}, {hi}]; widen the bracket"
        )));
    }
    let entries: Vec<usize> = (1..xs.len()).filter(|&i| forbidden[i] && !forbidden[i - 1]).collect();
    let exits: Vec<usize> = (1..xs.len()).filter(|&i| !forbidden[i] && forbidden[i - 1]).collect();
    if entries.len() != 1 {
        return Err(Error::Ambiguous(format!(
            "{} forbidden intervals at E = {energy} in [{lo}, {hi}]; only a single barrier is supported",
            entries.len()
        )));
    }
    let tol = 1e-12 * v.scale();
    let a = bisect(&f, xs[entries[0] - 1], xs[entries[0]], tol);
    let b = bisect(&f, xs[exits[0]], xs[exits[0] - 1], tol);
    Ok((a, b))
}

/// Root of `f` between `outside` (`f ≤ 0`) and `inside` (`f > 0`).
fn bisect<F: Fn(f64) -> f64>(f: &F, mut outside: f64, mut inside: f64, tol: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (outside + inside);
        if mid == outside || mid == inside {
            break;
        }
        let fm = f(mid);
        if fm.abs() <= tol {
            return mid;
        }
        if fm > 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    // the endpoint where |f| is smaller
    if f(outside).abs() <= f(inside).abs() {
        outside
    } else {
        inside
    }
}

/// `Im W = ∫_a^b √(2m(V − E)) dx`.
///
/// Rectangular and tabulated barriers are integrated exactly piece by piece.
/// Smooth barriers use the endpoint-weighted Gauss–Chebyshev rule, which
/// absorbs the square-root zeros at the turning points.
pub fn jacobi_action_im(v: &PotentialSpec, energy: f64, mass: f64, a: f64, b: f64) -> Result<f64> {
    if !(mass > 0.0) {
        return Err(Error::Domain(format!("mass {mass} must be positive")));
    }
    if !(b >= a) {
        return Err(Error::InvalidInput(format!("turning points must satisfy a ≤ b, got ({a}, {b})")));
    }
    if a == b {
        return Ok(0.0);
    }
    check_forbidden(v, energy, a, b)?;
    let im_w = match v {
        PotentialSpec::Parabolic { .. } => gauss_chebyshev_sqrt_endpoints(
            |x| (2.0 * mass * (v.value(x) - energy)).max(0.0).sqrt(),
            a,
            b,
            ACTION_NODES,
        ),
        PotentialSpec::Rectangular { .. } | PotentialSpec::Tabulated { .. } => {
            let mut xs = vec![a];
            xs.extend(v.breakpoints(a, b));
            xs.push(b);
            xs.windows(2)
                .map(|w| {
                    // one-sided values so the rectangle's jumps are respected
                    let h = w[1] - w[0];
                    let u0 = 2.0 * mass * (value_right_of(v, w[0], h) - energy);
                    let u1 = 2.0 * mass * (value_left_of(v, w[1], h) - energy);
                    sqrt_linear_integral(u0.max(0.0), u1.max(0.0), h)
                })
                .sum()
        }
    };
    Ok(im_w)
}

fn value_right_of(v: &PotentialSpec, x: f64, h: f64) -> f64 {
    match v {
        PotentialSpec::Rectangular { .. } => v.value(x + 0.5 * h),
        _ => v.value(x),
    }
}

fn value_left_of(v: &PotentialSpec, x: f64, h: f64) -> f64 {
    match v {
        PotentialSpec::Rectangular { .. } => v.value(x - 0.5 * h),
        _ => v.value(x),
    }
}

/// `∫₀^h √u dx` for `u` linear from `u0` to `u1`:
/// `(2h/3)(u0 + √(u0 u1) + u1)/(√u0 + √u1)`, stable as `u1 → u0`.
fn sqrt_linear_integral(u0: f64, u1: f64, h: f64) -> f64 {
    let (s0, s1) = (u0.sqrt(), u1.sqrt());
    if s0 + s1 == 0.0 {
        return 0.0;
    }
    2.0 * h / 3.0 * (u0 + s0 * s1 + u1) / (s0 + s1)
}

fn check_forbidden(v: &PotentialSpec, energy: f64, a: f64, b: f64) -> Result<()> {
    let tol = 1e-9 * v.scale();
    let mut xs = linspace(a, b, 257);
    if matches!(v, PotentialSpec::Rectangular { .. }) {
        // the edges themselves sit on the jump; probe just inside
        let n = xs.len();
        let eps = 1e-9 * (b - a);
        xs[0] += eps;
        xs[n - 1] -= eps;
    }
    if let Some(x) = xs.into_iter().find(|&x| v.value(x) - energy < -tol) {
        return Err(Error::Domain(format!(
            "V({x}) = {} lies below E = {energy} inside [{a}, {b}]; \
             the interval is not classically forbidden",
            v.value(x)
        )));
    }
    Ok(())
}

/// Turning points, `Im W` and `P = exp(−2 Im W)`.
pub fn tunneling_probability(
    v: &PotentialSpec,
    energy: f64,
    mass: f64,
    bracket: (f64, f64),
) -> Result<TunnelingResult> {
    if !(mass > 0.0) {
        return Err(Error::Domain(format!("mass {mass} must be positive")));
    }
    let (a, b) = find_turning_points(v, energy, bracket)?;
    let im_w = jacobi_action_im(v, energy, mass, a, b)?;
    Ok(TunnelingResult {
        energy,
        turning_points: (a, b),
        im_w,
        probability: (-2.0 * im_w).exp(),
    })
}

/// Exact transmission through a rectangular barrier,
/// `[1 + V0² sinh²(κL) / (4E(V0 − E))]⁻¹` with `κ = √(2m(V0 − E))`.
pub fn exact_rectangular_transmission(v0: f64, width: f64, energy: f64, mass: f64) -> Result<f64> {
    if !(energy > 0.0 && energy < v0) {
        return Err(Error::Domain(format!(
            "exact transmission needs 0 < E < V0, got E = {energy}, V0 = {v0}"
        )));
    }
    if !(mass > 0.0 && width > 0.0) {
        return Err(Error::Domain(format!(
            "mass and width must be positive, got m = {mass}, L = {width}"
        )));
    }
    let kappa = (2.0 * mass * (v0 - energy)).sqrt();
    let s = (kappa * width).sinh();
    Ok(1.0 / (1.0 + v0 * v0 * s * s / (4.0 * energy * (v0 - energy))))
}
