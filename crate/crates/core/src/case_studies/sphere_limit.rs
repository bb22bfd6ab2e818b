//! Averaging over the sphere of radius 1/2, reached through the box densities
//! ω̂_k(r) = k r^{1−n}/S_{n−1} on [1/2 − 1/k, 1/2].

use crate::averaging::{exponent_shift, RadialKernel, HALF};
use crate::error::{Error, Result};
use crate::greens::{check_dimension, green};
use crate::quadrature::{integrate, QuadOptions};
use crate::specfun::sphere_area;
use crate::sphere_kernel::{four_point_average, k, printed_g1, SphereTriple};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereLimitKernel {
    n: u32,
    k: u32,
}

impl SphereLimitKernel {
    pub fn new(n: u32, k: u32) -> Result<Self> {
        check_dimension(n)?;
        if k < 3 {
            return Err(Error::invalid(format!("sphere-limit index k must be >= 3, got {k}")));
        }
        Ok(SphereLimitKernel { n, k })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// Left edge 1/2 − 1/k of the support.
    pub fn lower(&self) -> f64 {
        HALF - 1.0 / self.k as f64
    }

    pub fn omega(&self, r: f64) -> f64 {
        if r < self.lower() || r > HALF {
            return 0.0;
        }
        self.k as f64 * r.powi(1 - self.n as i32) / sphere_area(self.n)
    }

    /// The density as a general kernel, with its gap and partial integral
    /// `M(s) = k (s − c)₊ / S_{n−1}`.
    pub fn radial_kernel(&self) -> Result<RadialKernel> {
        let (n, kf, c) = (self.n, self.k as f64, self.lower());
        let area = sphere_area(n);
        let shift = exponent_shift(n);
        // ω = t^{ν − shift} w with ν = shift, so w is ω itself
        let w = move |t: f64| if t < c { 0.0 } else { kf * t.powi(1 - n as i32) / area };
        Ok(RadialKernel::new(n, shift, w)?
            .with_gap(c)?
            .with_partial_integral(move |s| kf * (s - c).max(0.0) / area)
            .with_label(format!("sphere-limit(k={})", self.k)))
    }

    /// G_{n,ω̂_k}(0) = G_n(1/2) + (k²/S_{n−1}) ∫_c^{1/2} s^{1−n} (s − c)² ds.
    pub fn value_at_zero(&self) -> Result<f64> {
        let kf = self.k as f64;
        Ok(green(self.n, HALF) + kf * kf * self.tail_integral()? / sphere_area(self.n))
    }

    fn tail_integral(&self) -> Result<f64> {
        let (n, c) = (self.n, self.lower());
        let q = integrate(
            |s: f64| s.powi(1 - n as i32) * (s - c) * (s - c),
            c,
            HALF,
            QuadOptions::relative(1e-14),
        )?;
        Ok(q.value)
    }
}

pub fn sphere_limit_value_at_zero(n: u32, k: u32) -> Result<f64> {
    SphereLimitKernel::new(n, k)?.value_at_zero()
}

/// The same display without the factor k² multiplying the integral. It falls
/// below [`sphere_limit_value_at_zero`] and below the direct functional of ω̂_k.
pub fn printed_sphere_limit_value_at_zero(n: u32, k: u32) -> Result<f64> {
    let kernel = SphereLimitKernel::new(n, k)?;
    Ok(green(n, HALF) + kernel.tail_integral()? / sphere_area(n))
}

fn check_unit_radius(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::invalid(format!("profile radius must lie in [0, 1], got {r}")));
    }
    Ok(())
}

/// G_{n,ω̂}(r) = k_n(r, 1/2, 1/2) for n ≥ 2.
pub fn sphere_kernel_profile(n: u32, r: f64) -> Result<f64> {
    check_dimension(n)?;
    if n == 1 {
        return Err(Error::invalid(
            "the n = 1 sphere profile is ambiguous; use sphere_kernel_profile_1d",
        ));
    }
    check_unit_radius(r)?;
    k(n, &SphereTriple::new(r, HALF, HALF)?)
}

/// Both candidates for the n = 1 sphere profile `G₁(1) + g₁(r, 1/2, 1/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Profile1d {
    /// With g₁ from the four-point average, continuous at r = 1.
    pub four_point: f64,
    /// With g₁ = (r − 1)/2.
    pub printed: f64,
}

impl Profile1d {
    pub fn discrepancy(&self) -> f64 {
        self.printed - self.four_point
    }
}

pub fn sphere_kernel_profile_1d(r: f64) -> Result<Profile1d> {
    check_unit_radius(r)?;
    let g1 = green(1, 1.0);
    Ok(Profile1d {
        four_point: four_point_average(r, HALF, HALF),
        printed: g1 + printed_g1(r, HALF, HALF),
    })
}
