//! The two-dimensional kernel ω(s) = α J₁(αs) / (2π κ_α s) on s < 1/2 with
//! κ_α = 1 − J₀(α/2), its Fourier profile υ̂ and the functionals
//!
//! ```text
//! θ_j^α = 2π ∫₀^∞ (dt/t) (υ̂^{2j+2}(α,t) − υ̂^{2j}(α,t))
//! ```

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::averaging::HALF;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_with_breaks, QuadOptions};
use crate::specfun::{bessel_j0, bessel_j1};

/// Largest α accepted by [`theta`]; beyond it use [`theta_uncapped`].
pub const THETA_ALPHA_CAP: f64 = 1e3;

const MAX_TRUNCATION: f64 = 8192.0;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid(format!("α must be positive and finite, got {alpha}")));
    }
    Ok(())
}

fn check_tol(tol: f64) -> Result<()> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    Ok(())
}

fn kappa(alpha: f64) -> Result<f64> {
    let k = 1.0 - bessel_j0(alpha / 2.0);
    if !(k > 0.0) {
        return Err(Error::Numerical(format!("κ_α = {k} vanishes at α = {alpha}")));
    }
    Ok(k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselKernel2D {
    alpha: f64,
    kappa: f64,
}

impl BesselKernel2D {
    pub fn new(alpha: f64) -> Result<Self> {
        check_alpha(alpha)?;
        Ok(BesselKernel2D { alpha, kappa: kappa(alpha)? })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// ω(s); signed once α exceeds twice the first zero of J₁.
    pub fn omega(&self, s: f64) -> f64 {
        if !(s >= 0.0 && s < HALF) {
            return 0.0;
        }
        let a = self.alpha;
        if s == 0.0 {
            return a * a / (4.0 * PI * self.kappa);
        }
        a / (2.0 * PI * self.kappa) * bessel_j1(a * s) / s
    }

    /// 2π ∫₀^{1/2} s ω(s) ds.
    pub fn mass(&self) -> Result<f64> {
        let width = PI / self.alpha;
        let pts = panel_points(0.0, HALF, width);
        let q = integrate_with_breaks(|s| 2.0 * PI * s * self.omega(s), &pts, QuadOptions::absolute(1e-14))?;
        Ok(q.value)
    }
}

/// Evenly spaced points from `a` to `b` with spacing at most `width`.
fn panel_points(a: f64, b: f64, width: f64) -> Vec<f64> {
    let m = ((b - a) / width).ceil().max(1.0) as usize;
    (0..=m).map(|i| if i == m { b } else { a + (b - a) * i as f64 / m as f64 }).collect()
}

fn upsilon_raw(alpha: f64, kappa: f64, t: f64, tol: f64) -> Result<f64> {
    let pts = panel_points(0.0, alpha / 2.0, PI / (1.0 + t));
    let budget = 4 * pts.len() + 2000;
    let q = integrate_with_breaks(
        |s| bessel_j0(s * t) * bessel_j1(s),
        &pts,
        QuadOptions::absolute(tol * kappa).with_budget(budget),
    )?;
    Ok(q.value / kappa)
}

/// υ̂(α, t) = κ_α^{−1} ∫₀^{α/2} J₀(st) J₁(s) ds to absolute accuracy `tol`.
pub fn upsilon_hat(alpha: f64, t: f64, tol: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_tol(tol)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("t must be finite and >= 0, got {t}")));
    }
    upsilon_raw(alpha, kappa(alpha)?, t, tol)
}

/// θ_j^α with its three pieces over (1, ∞), (1/2, 1) and (0, 1/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theta {
    pub value: f64,
    pub parts: [f64; 3],
    /// Accumulated quadrature error plus the tail bound.
    pub error_bound: f64,
    /// Where the (1, ∞) integral was cut.
    pub truncation: f64,
    pub tail_bound: f64,
}

/// θ_j^α for α up to [`THETA_ALPHA_CAP`].
pub fn theta(j: u32, alpha: f64, tol: f64) -> Result<Theta> {
    check_alpha(alpha)?;
    if alpha > THETA_ALPHA_CAP {
        return Err(Error::invalid(format!(
            "α = {alpha} exceeds {THETA_ALPHA_CAP}; the cost grows linearly in α, use theta_uncapped"
        )));
    }
    theta_uncapped(j, alpha, tol)
}

pub fn theta_uncapped(j: u32, alpha: f64, tol: f64) -> Result<Theta> {
    check_alpha(alpha)?;
    check_tol(tol)?;
    if j == 0 {
        return Err(Error::invalid("θ_j needs j >= 1"));
    }
    let kap = kappa(alpha)?;
    let inner_tol = (tol * 1e-4).max(1e-14);
    let ups = |t: f64| upsilon_raw(alpha, kap, t, inner_tol);
    let jj = j as i32;

    // Outside [0, T] assume |υ̂(t)| <= E T/t, with E the largest |υ̂| sampled on
    // [T/2, T]; then the tail is at most 2π (E^{2j}/2j + E^{2j+2}/(2j+2)).
    let spacing = PI / alpha;
    let mut t_cut = 4.0;
    let tail_bound = loop {
        let samples = panel_points(t_cut / 2.0, t_cut, spacing);
        let envelope = samples
            .par_iter()
            .map(|&t| ups(t).map(f64::abs))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let bound = 2.0
            * PI
            * (envelope.powi(2 * jj) / (2.0 * j as f64) + envelope.powi(2 * jj + 2) / (2.0 * j as f64 + 2.0));
        if bound <= tol / 10.0 {
            break bound;
        }
        t_cut *= 2.0;
        if t_cut > MAX_TRUNCATION {
            return Err(Error::Numerical(format!(
                "θ tail bound {bound:e} still above {:e} at T = {MAX_TRUNCATION}",
                tol / 10.0
            )));
        }
    };

    let integrand = |t: f64| -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        match ups(t) {
            Ok(u) => 2.0 * PI * u.powi(2 * jj) * (u * u - 1.0) / t,
            Err(_) => f64::NAN,
        }
    };
    // half an oscillation period of υ̂ in t
    let width = 2.0 * PI / alpha;
    let ranges = [(1.0, t_cut), (0.5, 1.0), (0.0, 0.5)];
    let panels: Vec<(usize, f64, f64)> = ranges
        .iter()
        .enumerate()
        .flat_map(|(i, &(a, b))| panel_points(a, b, width).windows(2).map(|w| (i, w[0], w[1])).collect::<Vec<_>>())
        .collect();
    let panel_tol = 0.8 * tol / panels.len() as f64;
    let pieces = panels
        .par_iter()
        .map(|&(i, a, b)| integrate(integrand, a, b, QuadOptions::absolute(panel_tol).with_budget(200)).map(|q| (i, q)))
        .collect::<Result<Vec<_>>>()?;
    let mut parts = [0.0; 3];
    let mut err = tail_bound;
    for (i, q) in pieces {
        parts[i] += q.value;
        err += q.error;
    }
    Ok(Theta {
        value: parts.iter().sum(),
        parts,
        error_bound: err,
        truncation: t_cut,
        tail_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_normalized_and_kappa_positive() {
        for &a in &[0.5, 4.0, 7.0, 12.0, 40.0, 150.0] {
            let k = BesselKernel2D::new(a).unwrap();
            assert!(k.kappa() > 0.0);
            assert!((k.mass().unwrap() - 1.0).abs() < 1e-8, "α={a}");
        }
        assert!(BesselKernel2D::new(0.0).is_err());
    }

    #[test]
    fn omega_continuous_at_origin() {
        let k = BesselKernel2D::new(9.0).unwrap();
        assert!((k.omega(0.0) - k.omega(1e-9)).abs() < 1e-9 * k.omega(0.0));
        assert_eq!(k.omega(0.5), 0.0);
    }

    #[test]
    fn upsilon_at_zero_is_one() {
        for &a in &[1.0, 5.0, 20.0, 100.0, 320.0] {
            assert!((upsilon_hat(a, 0.0, 1e-12).unwrap() - 1.0).abs() < 1e-10, "α={a}");
        }
    }

    #[test]
    fn upsilon_is_fourier_transform_of_omega() {
        // υ̂(α, t) = 2π ∫₀^{1/2} s ω(s) J₀(αts) ds
        for &(a, t) in &[(6.0, 0.3), (20.0, 0.5), (20.0, 1.7)] {
            let k = BesselKernel2D::new(a).unwrap();
            let pts = panel_points(0.0, HALF, PI / (a * (1.0 + t)));
            let direct = integrate_with_breaks(
                |s| 2.0 * PI * s * k.omega(s) * bessel_j0(a * t * s),
                &pts,
                QuadOptions::absolute(1e-13),
            )
            .unwrap()
            .value;
            let u = upsilon_hat(a, t, 1e-13).unwrap();
            assert!((u - direct).abs() < 1e-11, "α={a} t={t}: {u} vs {direct}");
        }
    }

    #[test]
    fn upsilon_approaches_step() {
        // κ_α υ̂ converges like 1/α, κ_α itself only like α^{−1/2}
        let kap = BesselKernel2D::new(2000.0).unwrap().kappa();
        assert!((kap * upsilon_hat(2000.0, 0.5, 1e-10).unwrap() - 1.0).abs() < 5e-3);
        assert!((upsilon_hat(8000.0, 0.5, 1e-10).unwrap() - 1.0).abs() < 2e-2);
        assert!(upsilon_hat(2000.0, 2.0, 1e-10).unwrap().abs() < 2e-3);
        assert!(upsilon_hat(100.0, 2.0, 1e-10).unwrap().abs() <= 0.05);
    }

    #[test]
    fn theta_rejects_bad_input() {
        assert!(theta(0, 5.0, 1e-6).is_err());
        assert!(theta(1, -5.0, 1e-6).is_err());
        assert!(theta(1, 2000.0, 1e-6).is_err());
    }

    #[test]
    fn theta_parts_add_up() {
        let th = theta(1, 5.0, 1e-6).unwrap();
        assert!((th.parts.iter().sum::<f64>() - th.value).abs() < 1e-15);
        assert!(th.tail_bound <= 1e-7);
    }
}
