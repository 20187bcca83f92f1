//! Fixed-rule quadratures shared by the modules.
//!
//! Uniform trapezoid sums are accumulated in ascending node order with no
//! reassociation, so results are reproducible bit for bit.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `n` evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (end - start) / (n - 1) as f64;
            (0..n)
                .map(|i| if i == n - 1 { end } else { start + step * i as f64 })
                .collect()
        }
    }
}

/// Trapezoid weight of node `i` out of `n` at spacing `h`.
#[inline]
pub fn trapezoid_weight(i: usize, n: usize, h: f64) -> f64 {
    if n == 1 {
        // a lone node stands for a cell of width h
        h
    } else if i == 0 || i + 1 == n {
        0.5 * h
    } else {
        h
    }
}

pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    values
        .iter()
        .enumerate()
        .fold(0.0, |acc, (i, v)| acc + trapezoid_weight(i, n, h) * v)
}

pub fn trapezoid_complex(values: &[Complex64], h: f64) -> Complex64 {
    let n = values.len();
    values
        .iter()
        .enumerate()
        .fold(Complex64::new(0.0, 0.0), |acc, (i, v)| {
            acc + v * trapezoid_weight(i, n, h)
        })
}

/// Trapezoid on a possibly non-uniform ascending abscissa.
pub fn trapezoid_nonuniform(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2)
        .zip(y.windows(2))
        .fold(0.0, |acc, (xw, yw)| acc + 0.5 * (xw[1] - xw[0]) * (yw[0] + yw[1]))
}

/// Checks that `nodes` is strictly ascending with uniform spacing (relative
/// tolerance `rel_tol`) and returns the spacing.
pub fn uniform_spacing(nodes: &[f64], rel_tol: f64) -> Result<f64> {
    if nodes.len() < 2 {
        return Err(Error::InvalidInput(
            "a uniform grid needs at least two nodes".into(),
        ));
    }
    let h = (nodes[nodes.len() - 1] - nodes[0]) / (nodes.len() - 1) as f64;
    if !(h > 0.0) {
        return Err(Error::InvalidInput("grid nodes must ascend".into()));
    }
    for (i, w) in nodes.windows(2).enumerate() {
        let step = w[1] - w[0];
        if !((step - h).abs() <= rel_tol * h) {
            return Err(Error::InvalidInput(format!(
                "grid spacing {step} at node {i} departs from uniform spacing {h}"
            )));
        }
    }
    Ok(h)
}

/// Integrates `f` over `[a, b]` when `f` vanishes like a square root at both
/// ends.
///
/// Substituting `x = c + r cos θ` turns `∫ f dx` into `r ∫₀^π f(x(θ)) sin θ dθ`,
/// whose integrand is smooth and periodic for `f ≈ √((x−a)(b−x)) g(x)`. The
/// midpoint-free rule on `θ_i = iπ/(n+1)` is the second-kind Gauss–Chebyshev
/// rule, exact for `g` polynomial of degree `< 2n`.
pub fn gauss_chebyshev_sqrt_endpoints<F>(f: F, a: f64, b: f64, n: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let centre = 0.5 * (a + b);
    let radius = 0.5 * (b - a);
    let step = PI / (n + 1) as f64;
    let mut sum = 0.0;
    for i in 1..=n {
        let theta = step * i as f64;
        sum += theta.sin() * f(centre + radius * theta.cos());
    }
    radius * step * sum
}
