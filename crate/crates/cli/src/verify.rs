//! Invariant suites behind `avgreen verify`.

use std::str::FromStr;

use avgreen::averaging::{
    averaged_green, averaged_green_batch, derivative_endpoints, laplacian_at_zero, laplacian_profile, normalize,
    value_at_zero_i1, value_at_zero_i2, RadialKernel,
};
use avgreen::case_studies::{
    exp3d_alpha_c, exp3d_phi, exp3d_phi_psi_quadrature, exp3d_psi, theta, upsilon_hat, BesselKernel2D,
};
use avgreen::oracles::{fd_derivative, mc_double_ball, mc_double_sphere};
use avgreen::specfun::unit_sphere_area;
use avgreen::sphere_kernel::{gluing_residuals, k, SphereTriple};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::row;
use crate::table::Table;

const GLUING_TOL: f64 = 1e-9;
const I1_I2_TOL: f64 = 1e-7;
const ENDPOINT_TOL: f64 = 1e-7;
const FD_TOL: f64 = 1e-5;
const MC_SIGMAS: f64 = 3.0;
const ALPHA_C: f64 = 3.72;
const ALPHA_C_TOL: f64 = 0.01;
const PHI_PSI_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Gluing,
    Monotonicity,
    I1I2,
    OracleMc,
    Endpoints,
    Case3d,
    Case2d,
    All,
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "gluing" => Suite::Gluing,
            "monotonicity" => Suite::Monotonicity,
            "i1-i2" => Suite::I1I2,
            "oracle-mc" => Suite::OracleMc,
            "endpoints" => Suite::Endpoints,
            "case-3d" => Suite::Case3d,
            "case-2d" => Suite::Case2d,
            "all" => Suite::All,
            other => {
                return Err(CliError::usage(format!(
                    "unknown suite {other:?}; expected gluing, monotonicity, i1-i2, oracle-mc, endpoints, \
                     case-3d, case-2d or all"
                )))
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: f64,
    pub residual: f64,
    pub limit: f64,
}

impl Check {
    fn new(suite: &'static str, name: impl Into<String>, value: f64, residual: f64, limit: f64) -> Self {
        Check { suite, name: name.into(), value, residual, limit }
    }

    pub fn passed(&self) -> bool {
        self.residual <= self.limit
    }
}

pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn table(&self) -> Table {
        let mut table = Table::new(vec!["suite", "check", "value", "residual", "limit", "status"]);
        for c in &self.checks {
            let status = if c.passed() { "PASS" } else { "FAIL" };
            table.push(row![c.suite, c.name.clone(), c.value, c.residual, c.limit, status]);
        }
        table
    }
}

pub fn run(suite: Suite, cfg: &RunConfig) -> CliResult<Report> {
    let mut checks = Vec::new();
    let suites: &[Suite] = match suite {
        Suite::All => &[
            Suite::Gluing,
            Suite::Monotonicity,
            Suite::I1I2,
            Suite::OracleMc,
            Suite::Endpoints,
            Suite::Case3d,
            Suite::Case2d,
        ],
        _ => std::slice::from_ref(&suite),
    };
    for s in suites {
        match s {
            Suite::Gluing => gluing(cfg, &mut checks)?,
            Suite::Monotonicity => monotonicity(cfg, &mut checks)?,
            Suite::I1I2 => i1_i2(cfg, &mut checks)?,
            Suite::OracleMc => oracle_mc(cfg, &mut checks)?,
            Suite::Endpoints => endpoints(cfg, &mut checks)?,
            Suite::Case3d => case_3d(&mut checks)?,
            Suite::Case2d => case_2d(cfg, &mut checks)?,
            Suite::All => unreachable!(),
        }
    }
    Ok(Report { checks })
}

fn dimensions(cfg: &RunConfig, default: &[u32]) -> Vec<u32> {
    match cfg.n {
        Some(n) => vec![n],
        None => default.to_vec(),
    }
}

/// Fixed test kernels, or the one given with --kernel.
fn kernels(cfg: &RunConfig, default_dims: &[u32]) -> CliResult<Vec<(String, RadialKernel)>> {
    if cfg.kernel.is_some() {
        let kernel = cfg.radial_kernel()?;
        return Ok(vec![(cfg.kernel.clone().unwrap_or_default(), kernel)]);
    }
    let mut out = Vec::new();
    for n in dimensions(cfg, default_dims) {
        for (nu, coeffs) in [(0.75, [1.0, 0.0, 0.0]), (1.5, [0.3, 1.0, 0.2]), (2.0, [1.0, 0.0, 2.0])] {
            let kernel = normalize(&RadialKernel::polynomial(n, nu, &coeffs)?)?;
            out.push((format!("n={n} nu={nu} coeffs={coeffs:?}"), kernel));
        }
    }
    Ok(out)
}

fn gluing(cfg: &RunConfig, checks: &mut Vec<Check>) -> CliResult<()> {
    let radii = [0.05, 0.12, 0.23, 0.31, 0.5];
    for n in dimensions(cfg, &[1, 2, 3, 4, 5, 6, 7, 8]) {
        let mut worst = 0.0f64;
        let mut pairs = 0;
        for &s in &radii {
            for &t in &radii[..4] {
                let (inner, outer) = gluing_residuals(n, s, t)?;
                worst = worst.max(inner.abs()).max(outer.abs());
                pairs += 1;
            }
        }
        checks.push(Check::new("gluing", format!("n={n} max over {pairs} (s,t) pairs"), worst, worst, GLUING_TOL));
    }
    Ok(())
}

fn monotonicity(cfg: &RunConfig, checks: &mut Vec<Check>) -> CliResult<()> {
    let radii: Vec<f64> = (1..=200).map(|i| 2.0 * i as f64 / 201.0).collect();
    for (label, kernel) in kernels(cfg, &[1, 2, 3, 4, 5])? {
        let values = averaged_green_batch(&kernel, &radii, cfg.tol)
            .into_iter()
            .map(|v| v.map(|v| v.value))
            .collect::<avgreen::Result<Vec<f64>>>()?;
        // largest increase between neighbours; zero when nonincreasing
        let rise = values.windows(2).map(|w| w[1] - w[0]).fold(0.0f64, f64::max);
        checks.push(Check::new("monotonicity", format!("{label} largest rise on 200 radii"), rise, rise, 10.0 * cfg.tol));
    }
    Ok(())
}

fn i1_i2(cfg: &RunConfig, checks: &mut Vec<Check>) -> CliResult<()> {
    for (label, kernel) in kernels(cfg, &[1, 3, 4, 5])? {
        let i1 = value_at_zero_i1(&kernel)?;
        let i2 = value_at_zero_i2(&kernel)?;
        let direct = averaged_green(&kernel, 0.0, 1e-11)?.value;
        let d = (i1 - i2).abs().max((i1 - direct).abs());
        checks.push(Check::new("i1-i2", format!("{label} |I1-I2|, |I1-G(0)|"), i1, d, I1_I2_TOL));
    }
    Ok(())
}

fn oracle_mc(cfg: &RunConfig, checks: &mut Vec<Check>) -> CliResult<()> {
    let triples = [(0.3, 0.2, 0.25), (0.05, 0.3, 0.35), (0.6, 0.4, 0.45), (0.9, 0.3, 0.5)];
    let mut stream = 0u64;
    for n in dimensions(cfg, &[1, 2, 3, 4, 5]) {
        for &(r, s, t) in &triples {
            let exact = k(n, &SphereTriple::new(r, s, t)?)?;
            let mc = mc_double_sphere(n, r, s, t, cfg.samples, cfg.seed.wrapping_add(stream))?;
            stream += 1;
            checks.push(Check::new(
                "oracle-mc",
                format!("k_{n}(r={r}, s={s}, t={t}) vs double-sphere MC, sigmas"),
                exact,
                mc.z_score(exact),
                MC_SIGMAS,
            ));
        }
    }
    for (label, kernel) in kernels(cfg, &[2, 3])? {
        for r in [0.1, 0.45, 0.8] {
            let exact = averaged_green(&kernel, r, cfg.tol)?.value;
            let mc = mc_double_ball(&kernel, r, cfg.samples, cfg.seed.wrapping_add(stream))?;
            stream += 1;
            checks.push(Check::new(
                "oracle-mc",
                format!("{label} G(r={r}) vs double-ball MC, sigmas"),
                exact,
                mc.z_score(exact),
                MC_SIGMAS,
            ));
        }
    }
    Ok(())
}

fn endpoints(cfg: &RunConfig, checks: &mut Vec<Check>) -> CliResult<()> {
    for (label, kernel) in kernels(cfg, &[1, 3, 4, 5])? {
        let n = kernel.n();
        let area = unit_sphere_area(n)?;
        let mut worst = derivative_endpoints(&kernel, 0.0)?.abs();
        for r in [1.0f64, 1.5] {
            let expect = -r.powi(1 - n as i32) / area;
            worst = worst.max((derivative_endpoints(&kernel, r)? - expect).abs());
        }
        checks.push(Check::new("endpoints", format!("{label} derivative at 0, 1, 1.5"), worst, worst, ENDPOINT_TOL));

        let r = 0.4;
        let fd = fd_derivative(|x| averaged_green(&kernel, x, 1e-12).map(|v| v.value).unwrap_or(f64::NAN), r, 1e-3);
        let d = derivative_endpoints(&kernel, r)?;
        let residual = if fd.is_finite() { (fd - d).abs() } else { f64::INFINITY };
        checks.push(Check::new("endpoints", format!("{label} derivative at 0.4 vs finite difference"), d, residual, FD_TOL));

        let l0 = laplacian_at_zero(&kernel)?;
        let mut worst = (laplacian_profile(&kernel, 1e-9, 1e-10)? - l0).abs() / (1.0 + l0);
        for r in [1.0, 1.5] {
            worst = worst.max(laplacian_profile(&kernel, r, 1e-10)?.abs());
        }
        checks.push(Check::new("endpoints", format!("{label} Laplacian at 0, 1, 1.5"), l0, worst, ENDPOINT_TOL));
    }
    Ok(())
}

fn case_3d(checks: &mut Vec<Check>) -> CliResult<()> {
    let ac = exp3d_alpha_c()?;
    checks.push(Check::new("case-3d", "alpha_c minimizing psi", ac, (ac - ALPHA_C).abs(), ALPHA_C_TOL));

    let mut worst = 0.0f64;
    for a in [-8.0, -2.0, -0.5, 0.7, 2.0, 3.72, 6.0, 12.0] {
        let (phi, psi) = exp3d_phi_psi_quadrature(a)?;
        worst = worst.max((phi - exp3d_phi(a)?).abs() / phi).max((psi - exp3d_psi(a)?).abs() / psi);
    }
    checks.push(Check::new("case-3d", "closed-form phi, psi vs quadrature, relative", worst, worst, PHI_PSI_TOL));

    let grid: Vec<f64> = (0..=40).map(|i| -10.0 + 0.5 * i as f64).filter(|a: &f64| a.abs() > 1e-3).collect();
    let phis = grid.iter().map(|&a| exp3d_phi(a)).collect::<avgreen::Result<Vec<f64>>>()?;
    let rise = phis.windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max).max(0.0);
    checks.push(Check::new("case-3d", "phi nonincreasing on [-10, 10]", rise, rise, 0.0));
    Ok(())
}

fn case_2d(cfg: &RunConfig, checks: &mut Vec<Check>) -> CliResult<()> {
    let mut worst = 0.0f64;
    for a in [5.0, 20.0, 80.0] {
        worst = worst.max((upsilon_hat(a, 0.0, 1e-12)? - 1.0).abs());
    }
    checks.push(Check::new("case-2d", "|upsilon_hat(alpha, 0) - 1|", worst, worst, 1e-8));

    let k = BesselKernel2D::new(20.0)?;
    let mass = k.mass()?;
    checks.push(Check::new("case-2d", "Bessel kernel mass, alpha = 20", mass, (mass - 1.0).abs(), 1e-8));

    let tol = cfg.tol.max(1e-6);
    let coarse = theta(1, 20.0, 10.0 * tol)?;
    let fine = theta(1, 20.0, tol)?;
    checks.push(Check::new(
        "case-2d",
        "theta_1 at alpha = 20 under tolerance refinement",
        fine.value,
        (coarse.value - fine.value).abs(),
        1e-4,
    ));

    let alphas = [10.0, 40.0, 160.0];
    let first = alphas
        .iter()
        .map(|&a| theta(1, a, 1e-5).map(|t| t.parts[0].abs()))
        .collect::<avgreen::Result<Vec<f64>>>()?;
    let slope = (first[2] / first[0]).ln() / (alphas[2] / alphas[0]).ln();
    // the (1, ∞) piece decays like ln α / α
    checks.push(Check::new("case-2d", "log-log slope of |theta_1,1| over alpha 10..160", slope, slope + 0.5, 0.0));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_fails_when_any_check_fails() {
        let ok = Check::new("gluing", "a", 0.0, 1e-12, GLUING_TOL);
        let bad = Check::new("gluing", "b", 0.0, 1e-3, GLUING_TOL);
        let nan = Check::new("gluing", "c", 0.0, f64::NAN, GLUING_TOL);
        assert!(Report { checks: vec![ok.clone()] }.passed());
        assert!(!Report { checks: vec![ok.clone(), bad] }.passed());
        assert!(!Report { checks: vec![ok, nan] }.passed());
    }

    #[test]
    fn suite_names() {
        for name in ["gluing", "monotonicity", "i1-i2", "oracle-mc", "endpoints", "case-3d", "case-2d", "all"] {
            assert!(name.parse::<Suite>().is_ok());
        }
        assert_eq!("nope".parse::<Suite>().unwrap_err().exit_code(), 2);
    }
}
