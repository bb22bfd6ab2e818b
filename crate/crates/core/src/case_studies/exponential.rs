//! Exponential kernels ω_α(t) = ρ_α e^{αt}/(2πt) in three dimensions.
//!
//! Every closed form below is written with h(y) = ((y − 1)e^y + 1)/y², so that
//! `(α − 2)e^{α/2} + 2 = α² h(α/2)/2` and `ρ_α = 2/h(α/2)`. Large positive α
//! uses the rescaled h(y)e^{−y} and small |α| a power series.

use std::f64::consts::PI;

use crate::averaging::{averaged_green, laplacian_at_zero, value_at_zero_i2_tol, RadialKernel, HALF};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadOptions};

/// Smallest |α| accepted by [`ExpKernel3D`].
pub const MIN_ALPHA: f64 = 1e-3;

/// Below this |α| the printed piecewise form loses more than 1e-7 to
/// cancellation and [`exp3d_green`] integrates the kernel instead.
const CLOSED_FORM_MIN_ALPHA: f64 = 0.05;

const SCALED_ABOVE: f64 = 40.0;

fn h_series(y: f64) -> f64 {
    // Σ_{m≥2} (m − 1) y^{m−2} / m!
    let mut term = 0.5;
    let mut acc = 0.5;
    for m in 3..40 {
        term *= y / m as f64;
        let add = term * (m - 1) as f64;
        acc += add;
        if add.abs() < 1e-17 * acc.abs() {
            break;
        }
    }
    acc
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() {
        return Err(Error::invalid(format!("α must be finite, got {alpha}")));
    }
    Ok(())
}

/// h(y) e^{−max(y,0)}.
fn h_scaled(y: f64) -> f64 {
    if y.abs() < 1.0 {
        h_series(y) * (-y.max(0.0)).exp()
    } else if y > 0.0 {
        ((y - 1.0) + (-y).exp()) / (y * y)
    } else {
        ((y - 1.0) * y.exp() + 1.0) / (y * y)
    }
}

/// N(α)/α³ e^{−max(α,0)} with N(α) = e^α(α − 3) + 4e^{α/2} − 1.
fn n_scaled(alpha: f64) -> f64 {
    if alpha.abs() < 1.0 {
        // Σ_{m≥3} c_m α^{m−3}, c_m = 1/(m−1)! − 3/m! + 4/(2^m m!)
        let mut fact = 1.0; // (m − 1)! after the update below
        let mut acc = 0.0;
        let mut pow = 1.0;
        for m in 3..40 {
            let mf = m as f64;
            fact *= mf - 1.0;
            let c = 1.0 / fact - 3.0 / (fact * mf) + 4.0 / (2f64.powi(m) * fact * mf);
            let add = c * pow;
            acc += add;
            if m > 5 && add.abs() < 1e-17 * acc.abs() {
                break;
            }
            pow *= alpha;
        }
        acc * (-alpha.max(0.0)).exp()
    } else if alpha > 0.0 {
        (alpha - 3.0 + 4.0 * (-alpha / 2.0).exp() - (-alpha).exp()) / alpha.powi(3)
    } else {
        (alpha.exp() * (alpha - 3.0) + 4.0 * (alpha / 2.0).exp() - 1.0) / alpha.powi(3)
    }
}

/// ρ_α = α²/((α − 2)e^{α/2} + 2), with the removable point α = 0 giving 4.
pub fn rho_alpha(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let y = alpha / 2.0;
    if y > SCALED_ABOVE {
        return Ok(2.0 * (-y).exp() / h_scaled(y));
    }
    Ok(2.0 / if y.abs() < 1.0 { h_series(y) } else { ((y - 1.0) * y.exp() + 1.0) / (y * y) })
}

/// φ_α = G_{3,ω_α}(0) = (α/2π) N(α) / ((α − 2)e^{α/2} + 2)².
pub fn exp3d_phi(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let hs = h_scaled(alpha / 2.0);
    Ok(2.0 / PI * n_scaled(alpha) / (hs * hs))
}

/// ψ_α = A₃G_{3,ω_α}(0) = (α³/2π)(e^α − 1) / ((α − 2)e^{α/2} + 2)², which is
/// the squared L² norm of ω_α.
pub fn exp3d_psi(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let hs = h_scaled(alpha / 2.0);
    let e = if alpha.abs() < 1e-8 {
        1.0 + alpha / 2.0
    } else if alpha > 0.0 {
        -(-alpha).exp_m1() / alpha
    } else {
        alpha.exp_m1() / alpha
    };
    Ok(2.0 / PI * e / (hs * hs))
}

/// The minimizer α_c of ψ_α by golden-section search on [1, 10].
pub fn exp3d_alpha_c() -> Result<f64> {
    let psi = |a: f64| exp3d_psi(a).unwrap_or(f64::NAN);
    let (mut a, mut b) = (1.0f64, 10.0f64);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (psi(c), psi(d));
    while b - a > 1e-10 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = psi(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = psi(d);
        }
    }
    let x = 0.5 * (a + b);
    let fx = psi(x);
    if !(fx < psi(1.0) && fx < psi(10.0)) {
        return Err(Error::Numerical(format!(
            "ψ has no interior minimum on [1, 10] (search ended at {x})"
        )));
    }
    Ok(x)
}

/// The n = 3 exponential kernel for one α.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpKernel3D {
    alpha: f64,
    rho: f64,
}

impl ExpKernel3D {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        if alpha.abs() < MIN_ALPHA {
            return Err(Error::invalid(format!(
                "exponential kernel needs |α| >= {MIN_ALPHA}, got {alpha}"
            )));
        }
        Ok(ExpKernel3D { alpha, rho: rho_alpha(alpha)? })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn omega(&self, t: f64) -> f64 {
        if !(t > 0.0 && t <= HALF) {
            return 0.0;
        }
        self.rho * (self.alpha * t).exp() / (2.0 * PI * t)
    }

    /// ω_α as a general kernel with ν = 1/2 and w(t) = ρ_α e^{αt}/2π.
    pub fn radial_kernel(&self) -> Result<RadialKernel> {
        let (a, rho) = (self.alpha, self.rho);
        let partial = move |s: f64| {
            // ρ/(2π) ∫₀^s t e^{αt} dt = ρ s² h(αs) / 2π
            let y = a * s;
            let h = if y.abs() < 1.0 { h_series(y) } else { ((y - 1.0) * y.exp() + 1.0) / (y * y) };
            rho * s * s * h / (2.0 * PI)
        };
        Ok(RadialKernel::new(3, 0.5, move |t| rho * (a * t).exp() / (2.0 * PI))?
            .with_partial_integral(partial)
            .with_label(format!("exp(alpha={a})")))
    }
}

/// Generic exponent shift σ = max(α, 0) and K_σ = 2ρ_α² e^σ / α².
fn k_sigma(alpha: f64) -> (f64, f64) {
    let sigma = alpha.max(0.0);
    let y = alpha / 2.0;
    // ρ e^{σ/2} = 2 e^{σ/2} / h(y) = 2 / h_scaled(y) when y > 0
    let re = 2.0 / h_scaled(y);
    (sigma, 2.0 * re * re / (alpha * alpha))
}

/// −expm1(−x r)/r with its limit x at r = 0.
fn one_minus_exp_over(x: f64, r: f64) -> f64 {
    if r == 0.0 {
        x
    } else {
        -(-x * r).exp_m1() / r
    }
}

/// e^{−σ}(1 − e^{αr})/r, the shifted `one_minus_exp_over(−α, r)`.
fn shifted_growth(alpha: f64, r: f64, sigma: f64) -> f64 {
    if alpha * r < 700.0 {
        (-sigma).exp() * one_minus_exp_over(-alpha, r)
    } else {
        ((-sigma).exp() - (alpha * r - sigma).exp()) / r
    }
}

/// Printed R_{α,1}(r) on r < 1/2.
pub fn exp3d_r1(alpha: f64, r: f64) -> f64 {
    let a = alpha;
    let (sigma, ks) = k_sigma(a);
    let e = |x: f64| (x - sigma).exp();
    let a2 = a * a;
    let t = e(a) / 2.0 * (1.0 - r)
        + (2.0 * e(a) - 2.0 * e(a / 2.0) - e(a) * one_minus_exp_over(a, r)) / a2
        - 2.0 / a2 * (2.0 * e(0.0) - 2.0 * e(a / 2.0) - shifted_growth(a, r, sigma))
        - (e(a / 2.0) - e(a * r)) / a
        + (3.0 + a) / a2 * (-e(0.0) - e(a) + 2.0 * e(a / 2.0))
        + (e(a) - e(a / 2.0)) / a
        - (e(a) - e(a / 2.0) * (2.0 * a - 4.0) - (a + 5.0) * e(0.0)) / a2;
    1.0 + ks * t
}

/// Printed R_{α,2}(r) on 1/2 ≤ r ≤ 1.
pub fn exp3d_r2(alpha: f64, r: f64) -> f64 {
    let a = alpha;
    let (sigma, ks) = k_sigma(a);
    let e = |x: f64| (x - sigma).exp();
    let a2 = a * a;
    let t = e(a) / 2.0 * (1.0 - r)
        + (3.0 + a) / a2 * (e(0.0) - e(a) - shifted_growth(a, r, sigma))
        + (e(a) - e(a * r)) / a
        + (1.0 - 1.0 / r) / a2 * (e(a) - e(a / 2.0) * (2.0 * a - 4.0) - (a + 5.0) * e(0.0));
    1.0 + ks * t
}

/// G_{3,ω_α}(r) = (1/4π)·{R_{α,1}(r), R_{α,2}(r), 1/r} on r < 1/2, [1/2, 1], r > 1.
pub fn exp3d_green(alpha: f64, r: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("radius must be finite and >= 0, got {r}")));
    }
    if r > 1.0 {
        return Ok(1.0 / (4.0 * PI * r));
    }
    if alpha.abs() < CLOSED_FORM_MIN_ALPHA {
        let kernel = ExpKernel3D::new(alpha)?.radial_kernel()?;
        return Ok(averaged_green(&kernel, r, 1e-11)?.value);
    }
    let big_r = if r < HALF { exp3d_r1(alpha, r) } else { exp3d_r2(alpha, r) };
    Ok(big_r / (4.0 * PI))
}

/// (φ_α, ψ_α) from the general value-at-zero and Laplacian functionals.
pub fn exp3d_phi_psi_quadrature(alpha: f64) -> Result<(f64, f64)> {
    let kernel = ExpKernel3D::new(alpha)?.radial_kernel()?;
    Ok((value_at_zero_i2_tol(&kernel, 1e-11)?, laplacian_at_zero(&kernel)?))
}

/// ‖ω_α‖_{L²} = (4π ∫ t² ω_α(t)² dt)^{1/2}, without the square.
pub fn exp3d_omega_l2_norm(alpha: f64) -> Result<f64> {
    let k = ExpKernel3D::new(alpha)?;
    let q = integrate(
        |t: f64| {
            let v = k.omega(t);
            t * t * v * v
        },
        0.0,
        HALF,
        QuadOptions::relative(1e-13),
    )?;
    Ok((4.0 * PI * q.value).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rho_direct(a: f64) -> f64 {
        a * a / ((a - 2.0) * (a / 2.0).exp() + 2.0)
    }

    fn phi_direct(a: f64) -> f64 {
        let d = (a / 2.0).exp() * (a - 2.0) + 2.0;
        a / (2.0 * PI) * (a.exp() * (a - 3.0) + 4.0 * (a / 2.0).exp() - 1.0) / (d * d)
    }

    fn psi_direct(a: f64) -> f64 {
        let d = (a / 2.0).exp() * (a - 2.0) + 2.0;
        a.powi(3) / (2.0 * PI) * (a.exp() - 1.0) / (d * d)
    }

    #[test]
    fn stable_forms_match_direct_formulas() {
        for &a in &[-30.0, -7.0, -2.5, -1.2, 1.5, 3.72, 9.0, 30.0, 60.0] {
            let tol = 1e-12;
            assert!((rho_alpha(a).unwrap() - rho_direct(a)).abs() <= tol * rho_direct(a), "ρ α={a}");
            assert!((exp3d_phi(a).unwrap() - phi_direct(a)).abs() <= tol * phi_direct(a), "φ α={a}");
            assert!((exp3d_psi(a).unwrap() - psi_direct(a)).abs() <= tol * psi_direct(a), "ψ α={a}");
        }
        // the direct forms are still accurate to ~1e-9 at |α| = 0.5
        for &a in &[-0.5, 0.5] {
            assert!((exp3d_phi(a).unwrap() - phi_direct(a)).abs() <= 1e-9);
            assert!((exp3d_psi(a).unwrap() - psi_direct(a)).abs() <= 1e-9);
        }
    }

    #[test]
    fn limits_at_zero() {
        assert_eq!(rho_alpha(0.0).unwrap(), 4.0);
        assert!((exp3d_phi(0.0).unwrap() - 2.0 / (3.0 * PI)).abs() < 1e-15);
        assert!((exp3d_psi(0.0).unwrap() - 8.0 / PI).abs() < 1e-14);
        // series and direct branches meet at |α| = 1
        for a in [1.0 - 1e-12, -1.0 + 1e-12] {
            let b = a * (1.0 + 2e-12);
            assert!((exp3d_phi(a).unwrap() - exp3d_phi(b).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn rho_stays_positive_without_overflow() {
        for &a in &[-700.0, -1e-6, 1e-6, 200.0, 1200.0] {
            let r = rho_alpha(a).unwrap();
            assert!(r > 0.0 && r.is_finite(), "α={a}: {r}");
        }
        assert!(exp3d_phi(1200.0).unwrap().is_finite());
    }

    #[test]
    fn kernel_is_normalized() {
        for &a in &[-20.0, -1.0, 0.01, 2.0, 15.0] {
            let k = ExpKernel3D::new(a).unwrap().radial_kernel().unwrap();
            assert!((k.mass().unwrap() - 1.0).abs() < 1e-12, "α={a}");
        }
        assert!(ExpKernel3D::new(1e-4).is_err());
    }

    #[test]
    fn alpha_c_location() {
        let ac = exp3d_alpha_c().unwrap();
        assert!((ac - 3.720423).abs() < 1e-5, "{ac}");
    }

    #[test]
    fn outer_branch() {
        assert!((exp3d_green(2.0, 1.3).unwrap() - 1.0 / (4.0 * PI * 1.3)).abs() < 1e-17);
        assert!(exp3d_green(2.0, -0.1).is_err());
    }

    #[test]
    fn extreme_alpha_stays_finite_and_tends_to_its_limits() {
        use crate::case_studies::sphere_kernel_profile;
        use crate::greens::fundamental_solution;
        for r in [0.0, 0.3, 0.6, 0.9] {
            // mass on the sphere |x| = 1/2
            let v = exp3d_green(5000.0, r).unwrap();
            let sphere = sphere_kernel_profile(3, r).unwrap();
            assert!((v - sphere).abs() < 1e-3 * sphere, "r={r}: {v} vs {sphere}");
            assert!(exp3d_green(2000.0, r).unwrap().is_finite());
        }
        // mass at the origin
        for r in [0.3, 0.6, 0.9] {
            let v = exp3d_green(-2000.0, r).unwrap();
            let g = fundamental_solution(3, r).unwrap();
            assert!((v - g).abs() < 1e-6 * g, "r={r}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn phi_decreasing(a in -15.0f64..25.0, da in 1e-3f64..1.0) {
            prop_assert!(exp3d_phi(a + da).unwrap() < exp3d_phi(a).unwrap());
        }

        #[test]
        fn branches_meet(a in prop_oneof![-12.0f64..-0.1, 0.1f64..12.0]) {
            let scale = 1.0 + exp3d_r1(a, 0.5).abs();
            prop_assert!((exp3d_r1(a, 0.5) - exp3d_r2(a, 0.5)).abs() < 1e-9 * scale);
            prop_assert!((exp3d_r2(a, 1.0) - 1.0).abs() < 1e-9 * scale);
        }
    }
}
