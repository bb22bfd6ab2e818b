//! The double-sphere average k_n(r, s, t) of G_n, its radial derivative, its
//! Laplacian and the gluing identities of the shell function g_n.
//!
//! The shell function is
//!
//! ```text
//! g_n(r,s,t) = 2^{n−2} S_{n−2} / S_{n−1}² ∫_r^{t+s} u^{1−n} B_n((u² − (t−s)²)/(4ts)) du
//! ```
//!
//! with `B_n` the symmetric incomplete beta integral. With `a = |t−s|`,
//! `b = t+s` and `u² = a² cos²θ + b² sin²θ` the argument of `B_n` becomes
//! `sin²θ` and the integrand is analytic on the whole range, so the outer
//! integral is done in θ.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::greens::{check_dimension, green, green_derivative};
use crate::quadrature::{integrate, QuadOptions};
use crate::specfun::{sphere_area, sym_beta_trig};

/// Radii of the evaluation point and of the two averaging spheres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereTriple {
    pub r: f64,
    pub s: f64,
    pub t: f64,
}

impl SphereTriple {
    pub fn new(r: f64, s: f64, t: f64) -> Result<Self> {
        for (name, v) in [("r", r), ("s", s), ("t", t)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if r == 0.0 && s == 0.0 && t == 0.0 {
            return Err(Error::invalid("(r, s, t) = (0, 0, 0) is not admitted"));
        }
        Ok(SphereTriple { r, s, t })
    }

    fn lower(&self) -> f64 {
        (self.t - self.s).abs()
    }

    fn upper(&self) -> f64 {
        self.t + self.s
    }
}

/// Which of the three piecewise formulas applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// `r < |t−s|`
    Inner,
    /// `|t−s| ≤ r ≤ t+s`
    Shell,
    /// `r > t+s`
    Outer,
}

pub fn classify(triple: &SphereTriple) -> Region {
    region(triple.r, triple.lower(), triple.upper())
}

#[inline]
fn region(r: f64, a: f64, b: f64) -> Region {
    if r < a {
        Region::Inner
    } else if r > b {
        Region::Outer
    } else {
        Region::Shell
    }
}

/// 2^{n−2} S_{n−2} / S_{n−1}, the constant for which h_n(t+s; s, t) = 1.
fn shell_constant(n: u32) -> f64 {
    debug_assert!(n >= 2);
    2f64.powi(n as i32 - 2) * sphere_area(n - 1) / sphere_area(n)
}

/// sin θ and cos θ of the shell variable at radius r, where sin²θ = (r²−a²)/(4ts).
#[inline]
fn shell_angle(r: f64, a: f64, b: f64, ts4: f64) -> (f64, f64) {
    let sin2 = ((r - a) * (r + a) / ts4).clamp(0.0, 1.0);
    let cos2 = ((b - r) * (b + r) / ts4).clamp(0.0, 1.0);
    (sin2.sqrt(), cos2.sqrt())
}

/// The shell function g_n(r, s, t) for `|t−s| ≤ r ≤ t+s` and s, t > 0.
///
/// For n = 1 the value comes from the four-point average, `(t+s−r)/4`.
pub fn shell_g(n: u32, r: f64, s: f64, t: f64) -> Result<f64> {
    check_dimension(n)?;
    let triple = SphereTriple::new(r, s, t)?;
    if s == 0.0 || t == 0.0 {
        return Err(Error::invalid("the shell function needs s > 0 and t > 0"));
    }
    if classify(&triple) != Region::Shell {
        return Err(Error::invalid(format!(
            "r = {r} lies outside the shell [{}, {}]",
            triple.lower(),
            triple.upper()
        )));
    }
    shell_g_unchecked(n, r, s, t)
}

pub(crate) fn shell_g_unchecked(n: u32, r: f64, s: f64, t: f64) -> Result<f64> {
    let a = (t - s).abs();
    let b = t + s;
    let ts = t * s;
    match n {
        1 => Ok((b - r) / 4.0),
        3 => {
            let tilt = if a == 0.0 { 1.0 } else { 1.0 - a * a / (b * r) };
            Ok((b - r) * tilt / (16.0 * PI * ts))
        }
        _ => shell_g_quadrature(n, r, a, b, 4.0 * ts),
    }
}

/// Generic quadrature form of g_n, valid for every n ≥ 2.
fn shell_g_quadrature(n: u32, r: f64, a: f64, b: f64, ts4: f64) -> Result<f64> {
    let (sin_r, cos_r) = shell_angle(r, a, b, ts4);
    let theta_r = sin_r.atan2(cos_r);
    if theta_r >= FRAC_PI_2 {
        return Ok(0.0);
    }
    let diff = (b - a) * (b + a);
    let integrand = |theta: f64| {
        let (st, ct) = theta.sin_cos();
        let u = (a * a * ct * ct + b * b * st * st).sqrt();
        u.powi(-(n as i32)) * diff * st * ct * sym_beta_trig(n, st, ct)
    };
    let pref = shell_constant(n) / sphere_area(n);
    // scale of the result: |G_n(b)|-like magnitude for a relative target
    let scale = if n == 2 { 1.0 } else { b.powi(2 - n as i32) };
    let opts = QuadOptions {
        abs_tol: 1e-15 * scale / pref,
        rel_tol: 1e-13,
        max_subdivisions: 4000,
    };
    let q = integrate(integrand, theta_r, FRAC_PI_2, opts)?;
    Ok(pref * q.value)
}

/// Printed n = 1 shell function `(r − t − s)/2`, kept only as the witness for
/// its mismatch with the four-point average.
pub fn printed_g1(r: f64, s: f64, t: f64) -> f64 {
    (r - t - s) / 2.0
}

/// (1/4) Σ_{ε,η = ±1} G₁(|r + εs + ηt|), the n = 1 double-sphere average.
pub fn four_point_average(r: f64, s: f64, t: f64) -> f64 {
    let mut acc = 0.0;
    for e in [-1.0, 1.0] {
        for h in [-1.0, 1.0] {
            acc += green(1, (r + e * s + h * t).abs());
        }
    }
    acc / 4.0
}

/// k_n(r, s, t).
pub fn k(n: u32, triple: &SphereTriple) -> Result<f64> {
    check_dimension(n)?;
    k_unchecked(n, triple.r, triple.s, triple.t)
}

/// k_n without argument validation, for callers integrating over valid triples.
pub(crate) fn k_unchecked(n: u32, r: f64, s: f64, t: f64) -> Result<f64> {
    let a = (t - s).abs();
    let b = t + s;
    if s == 0.0 || t == 0.0 {
        // one sphere collapses to its center
        return Ok(green(n, r.max(b)));
    }
    Ok(match region(r, a, b) {
        Region::Inner => green(n, s.max(t)),
        Region::Outer => green(n, r),
        Region::Shell => green(n, b) + shell_g_unchecked(n, r, s, t)?,
    })
}

/// ∂_r k_n(r, s, t) for n ≥ 2.
pub fn k_derivative(n: u32, triple: &SphereTriple) -> Result<f64> {
    check_dimension(n)?;
    if n == 1 {
        return Err(Error::invalid(
            "k_1 has jump discontinuities in its derivative; n = 1 is not admitted",
        ));
    }
    Ok(dk_unchecked(n, triple.r, triple.s, triple.t))
}

/// ∂_r k_n, including the piecewise-constant n = 1 case used under integrals.
pub(crate) fn dk_unchecked(n: u32, r: f64, s: f64, t: f64) -> f64 {
    let a = (t - s).abs();
    let b = t + s;
    if n == 1 {
        return match region(r, a, b) {
            Region::Inner => 0.0,
            Region::Shell => -0.25,
            Region::Outer => -0.5,
        };
    }
    if s == 0.0 || t == 0.0 {
        return if r < b { 0.0 } else { green_derivative(n, r) };
    }
    match region(r, a, b) {
        Region::Inner => 0.0,
        Region::Outer => green_derivative(n, r),
        Region::Shell => {
            let h = shell_h(n, r, a, b, 4.0 * t * s);
            if r == 0.0 {
                // s = t: h ~ c r^{n−1}, so r^{1−n} h has a finite limit
                let x_over_r2 = 1.0 / (4.0 * t * s);
                -shell_constant(n) * 2.0 * x_over_r2.powf((n as f64 - 1.0) / 2.0)
                    / (n as f64 - 1.0)
                    / sphere_area(n)
            } else {
                -r.powi(1 - n as i32) / sphere_area(n) * h
            }
        }
    }
}

/// h_n(r; s, t) = 2^{n−2} S_{n−2}/S_{n−1} · B_n((r² − (t−s)²)/(4ts)).
fn shell_h(n: u32, r: f64, a: f64, b: f64, ts4: f64) -> f64 {
    let (st, ct) = shell_angle(r, a, b, ts4);
    shell_constant(n) * sym_beta_trig(n, st, ct)
}

/// The factor h_n(r; s, t) of the shell derivative, for n ≥ 2.
pub fn shell_derivative_factor(n: u32, r: f64, s: f64, t: f64) -> Result<f64> {
    check_dimension(n)?;
    if n < 2 || s <= 0.0 || t <= 0.0 {
        return Err(Error::invalid("h_n needs n >= 2 and s, t > 0"));
    }
    let triple = SphereTriple::new(r, s, t)?;
    if classify(&triple) != Region::Shell {
        return Err(Error::invalid(format!("r = {r} lies outside the shell")));
    }
    Ok(shell_h(n, r, triple.lower(), triple.upper(), 4.0 * s * t))
}

/// A_n k_n(r, s, t) = −r^{1−n} ∂_r (r^{n−1} ∂_r k_n) for n ≥ 2.
///
/// Zero off the closed shell; on the open shell
/// `(2 S_{n−2}/S_{n−1}²)(2tsr)^{2−n}[(r²−(t−s)²)((t+s)²−r²)]^{(n−3)/2}`.
pub fn k_laplacian(n: u32, triple: &SphereTriple) -> Result<f64> {
    check_dimension(n)?;
    if n == 1 {
        return Err(Error::invalid("the kernel Laplacian is defined for n >= 2"));
    }
    let SphereTriple { r, s, t } = *triple;
    let a = triple.lower();
    let b = triple.upper();
    if s == 0.0 || t == 0.0 {
        if r == b {
            return Err(Error::invalid("degenerate shell: A_n k is a surface measure at r = s + t"));
        }
        return Ok(0.0);
    }
    if r == 0.0 && a == 0.0 {
        return Err(Error::invalid("A_n k is singular at r = 0 when s = t"));
    }
    if (n == 2 || n == 3) && (r == a || r == b) {
        return Err(Error::invalid(format!(
            "A_{n} k is singular or discontinuous at the shell boundary r = {r}"
        )));
    }
    if classify(triple) != Region::Shell {
        return Ok(0.0);
    }
    let nf = n as f64;
    let s1 = sphere_area(n);
    let prod = (r - a) * (r + a) * (b - r) * (b + r);
    let c = 2.0 * sphere_area(n - 1) / (s1 * s1);
    Ok(c * (2.0 * t * s * r).powi(2 - n as i32) * prod.powf((nf - 3.0) / 2.0))
}

/// Residuals of the gluing identities at the two shell boundaries:
/// `g_n(|t−s|) − [G_n(max(t,s)) − G_n(t+s)]` and `g_n(t+s)`.
///
/// For s = t the inner boundary is r = 0, where the inner value is G_n(t).
pub fn gluing_residuals(n: u32, s: f64, t: f64) -> Result<(f64, f64)> {
    check_dimension(n)?;
    if !(s > 0.0 && t > 0.0) || !s.is_finite() || !t.is_finite() {
        return Err(Error::invalid("gluing residuals need s, t > 0"));
    }
    let a = (t - s).abs();
    let b = t + s;
    let inner = shell_g_unchecked(n, a, s, t)? - (green(n, s.max(t)) - green(n, b));
    let outer = shell_g_unchecked(n, b, s, t)?;
    Ok((inner, outer))
}
