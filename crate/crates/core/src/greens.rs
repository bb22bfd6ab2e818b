//! Fundamental solutions G_n of `A_n = −Δ` and their large-scale transformation.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::specfun::sphere_area;

pub(crate) fn check_dimension(n: u32) -> Result<()> {
    if n == 0 {
        Err(Error::invalid("dimension n must be >= 1"))
    } else {
        Ok(())
    }
}

/// G_n(r): `−ln r / 2π` for n = 2 and `r^{2−n} / ((n−2) S_{n−1})` otherwise.
///
/// For n = 1 the value `G₁(0) = 0` is admitted; for n ≥ 2 the origin is rejected.
pub fn fundamental_solution(n: u32, r: f64) -> Result<f64> {
    check_dimension(n)?;
    if !r.is_finite() || r < 0.0 || (r == 0.0 && n >= 2) {
        return Err(Error::invalid(format!(
            "fundamental solution in dimension {n} needs r > 0, got {r}"
        )));
    }
    Ok(green(n, r))
}

/// Unchecked G_n for internal hot loops.
#[inline]
pub(crate) fn green(n: u32, r: f64) -> f64 {
    match n {
        1 => -0.5 * r,
        2 => -r.ln() / (2.0 * PI),
        3 => 1.0 / (4.0 * PI * r),
        _ => r.powi(2 - n as i32) / ((n as f64 - 2.0) * sphere_area(n)),
    }
}

/// dG_n/dr = −r^{1−n}/S_{n−1}.
#[inline]
pub(crate) fn green_derivative(n: u32, r: f64) -> f64 {
    -r.powi(1 - n as i32) / sphere_area(n)
}

/// G_n(r/Λ) written through the transformation law: `G₂(r) + ln Λ/2π` for
/// n = 2 and `Λ^{n−2} G_n(r)` otherwise.
pub fn scaled(n: u32, r: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::invalid(format!("scale Λ must be positive, got {lambda}")));
    }
    let g = fundamental_solution(n, r)?;
    Ok(if n == 2 {
        g + lambda.ln() / (2.0 * PI)
    } else {
        lambda.powi(n as i32 - 2) * g
    })
}
