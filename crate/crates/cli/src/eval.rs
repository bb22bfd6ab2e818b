//! Quantities shared by `eval` and `table`.

use std::str::FromStr;

use avgreen::averaging::{averaged_green, deformed_profile_tol, laplacian_profile};
use avgreen::case_studies::{
    exp3d_green, exp3d_phi, exp3d_psi, printed_sphere_limit_value_at_zero, sphere_kernel_profile,
    sphere_kernel_profile_1d, sphere_limit_value_at_zero, theta, theta_uncapped, upsilon_hat, THETA_ALPHA_CAP,
};
use avgreen::greens::fundamental_solution;
use avgreen::sphere_kernel::{k, SphereTriple};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::row;
use crate::table::Table;

/// θ needs an oscillatory integral over (1, ∞); 1e-8 would take minutes per point.
pub const THETA_DEFAULT_TOL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Green,
    KernelK,
    Averaged,
    PhiPsi,
    Theta,
    ProfileF,
    Laplacian,
    SphereProfile,
    SphereLimit,
    ExpGreen,
    Upsilon,
}

pub const QUANTITY_NAMES: &[&str] = &[
    "green",
    "kernel-k",
    "averaged",
    "phi-psi",
    "theta",
    "profile-f",
    "laplacian",
    "sphere-profile",
    "sphere-limit",
    "exp-green",
    "upsilon",
];

impl FromStr for Quantity {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        Ok(match s {
            "green" => Quantity::Green,
            "kernel-k" => Quantity::KernelK,
            "averaged" => Quantity::Averaged,
            "phi-psi" => Quantity::PhiPsi,
            "theta" => Quantity::Theta,
            "profile-f" => Quantity::ProfileF,
            "laplacian" => Quantity::Laplacian,
            "sphere-profile" => Quantity::SphereProfile,
            "sphere-limit" => Quantity::SphereLimit,
            "exp-green" => Quantity::ExpGreen,
            "upsilon" => Quantity::Upsilon,
            other => {
                return Err(CliError::usage(format!(
                    "unknown quantity {other:?}; expected one of {}",
                    QUANTITY_NAMES.join(", ")
                )))
            }
        })
    }
}

impl Quantity {
    pub fn default_tol(self) -> f64 {
        match self {
            Quantity::Theta => THETA_DEFAULT_TOL,
            _ => avgreen::averaging::DEFAULT_TOL,
        }
    }
}

pub fn compute(quantity: Quantity, cfg: &RunConfig) -> CliResult<Table> {
    let tol = cfg.tol;
    match quantity {
        Quantity::Green => {
            let n = cfg.dimension()?;
            let mut table = Table::new(vec!["n", "r", "green"]);
            for &r in cfg.radii()? {
                table.push(row![n, r, fundamental_solution(n, r)?]);
            }
            Ok(table)
        }
        Quantity::KernelK => {
            let n = cfg.dimension()?;
            let (s, t) = match (cfg.s, cfg.t) {
                (Some(s), Some(t)) => (s, t),
                _ => return Err(CliError::usage("`kernel-k` needs --s and --t")),
            };
            let mut table = Table::new(vec!["n", "r", "s", "t", "k"]);
            for &r in cfg.radii()? {
                table.push(row![n, r, s, t, k(n, &SphereTriple::new(r, s, t)?)?]);
            }
            Ok(table)
        }
        Quantity::Averaged => {
            let kernel = cfg.radial_kernel()?;
            let mut table = Table::new(vec!["n", "r", "value", "error_bound"]);
            for &r in cfg.radii()? {
                let v = averaged_green(&kernel, r, tol)?;
                table.push(row![kernel.n(), r, v.value, v.error_bound]);
            }
            Ok(table)
        }
        Quantity::ProfileF => {
            let kernel = cfg.radial_kernel()?;
            let mut table = Table::new(vec!["n", "r", "profile"]);
            for &r in cfg.radii()? {
                table.push(row![kernel.n(), r, deformed_profile_tol(&kernel, r, tol)?]);
            }
            Ok(table)
        }
        Quantity::Laplacian => {
            let kernel = cfg.radial_kernel()?;
            let mut table = Table::new(vec!["n", "r", "laplacian"]);
            for &r in cfg.radii()? {
                table.push(row![kernel.n(), r, laplacian_profile(&kernel, r, tol)?]);
            }
            Ok(table)
        }
        Quantity::SphereProfile => {
            let n = cfg.dimension()?;
            if n == 1 {
                let mut table = Table::new(vec!["n", "r", "four_point", "printed", "discrepancy"]);
                for &r in cfg.radii()? {
                    let p = sphere_kernel_profile_1d(r)?;
                    table.push(row![n, r, p.four_point, p.printed, p.discrepancy()]);
                }
                return Ok(table);
            }
            let mut table = Table::new(vec!["n", "r", "profile"]);
            for &r in cfg.radii()? {
                table.push(row![n, r, sphere_kernel_profile(n, r)?]);
            }
            Ok(table)
        }
        Quantity::SphereLimit => {
            let n = cfg.dimension()?;
            let target = fundamental_solution(n, 0.5)?;
            let mut table = Table::new(vec!["n", "k", "value_at_zero", "limit", "gap", "printed_form"]);
            for &kk in cfg.k_grid()? {
                let v = sphere_limit_value_at_zero(n, kk)?;
                let printed = printed_sphere_limit_value_at_zero(n, kk)?;
                table.push(row![n, kk, v, target, v - target, printed]);
            }
            Ok(table)
        }
        Quantity::PhiPsi => {
            let mut table = Table::new(vec!["alpha", "phi", "psi"]);
            for &a in cfg.alpha_grid()? {
                table.push(row![a, exp3d_phi(a)?, exp3d_psi(a)?]);
            }
            Ok(table)
        }
        Quantity::ExpGreen => {
            let mut table = Table::new(vec!["alpha", "r", "green"]);
            for &a in cfg.alpha_grid()? {
                for &r in cfg.radii()? {
                    table.push(row![a, r, exp3d_green(a, r)?]);
                }
            }
            Ok(table)
        }
        Quantity::Upsilon => {
            let mut table = Table::new(vec!["alpha", "t", "upsilon_hat"]);
            for &a in cfg.alpha_grid()? {
                for &t in cfg.radii()? {
                    table.push(row![a, t, upsilon_hat(a, t, tol)?]);
                }
            }
            Ok(table)
        }
        Quantity::Theta => {
            let j = cfg.j;
            let mut table = Table::new(vec![
                "j",
                "alpha",
                "theta_1",
                "theta_2",
                "theta_3",
                "theta",
                "error_bound",
                "truncation",
            ]);
            for &a in cfg.alpha_grid()? {
                let th = if a > THETA_ALPHA_CAP && !cfg.allow_large_alpha {
                    return Err(CliError::usage(format!(
                        "α = {a} exceeds {THETA_ALPHA_CAP}; pass --allow-large-alpha to run it anyway"
                    )));
                } else if cfg.allow_large_alpha {
                    theta_uncapped(j, a, tol)?
                } else {
                    theta(j, a, tol)?
                };
                table.push(row![
                    j,
                    a,
                    th.parts[0],
                    th.parts[1],
                    th.parts[2],
                    th.value,
                    th.error_bound,
                    th.truncation
                ]);
            }
            Ok(table)
        }
    }
}
