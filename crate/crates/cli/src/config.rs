//! Run configuration, numeric grids and kernel specifications.

use std::collections::BTreeMap;

use avgreen::averaging::{normalize, RadialKernel};
use avgreen::case_studies::{ExpKernel3D, SphereLimitKernel};
use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Everything a run depends on. Serialized into the CSV header.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub target: String,
    pub n: Option<u32>,
    pub kernel: Option<String>,
    pub r: Vec<f64>,
    pub s: Option<f64>,
    pub t: Option<f64>,
    pub alphas: Vec<f64>,
    pub j: u32,
    pub ks: Vec<u32>,
    pub tol: f64,
    pub samples: u64,
    pub seed: u64,
    pub allow_large_alpha: bool,
    pub output: Option<String>,
}

impl RunConfig {
    pub fn dimension(&self) -> CliResult<u32> {
        self.n.ok_or_else(|| CliError::usage(format!("`{}` needs --n", self.target)))
    }

    pub fn radii(&self) -> CliResult<&[f64]> {
        if self.r.is_empty() {
            return Err(CliError::usage(format!("`{}` needs --r", self.target)));
        }
        Ok(&self.r)
    }

    pub fn alpha_grid(&self) -> CliResult<&[f64]> {
        if self.alphas.is_empty() {
            return Err(CliError::usage(format!("`{}` needs --alpha or --alphas", self.target)));
        }
        Ok(&self.alphas)
    }

    pub fn k_grid(&self) -> CliResult<&[u32]> {
        if self.ks.is_empty() {
            return Err(CliError::usage(format!("`{}` needs --ks", self.target)));
        }
        Ok(&self.ks)
    }

    pub fn radial_kernel(&self) -> CliResult<RadialKernel> {
        let n = self.dimension()?;
        let spec = self
            .kernel
            .as_deref()
            .ok_or_else(|| CliError::usage(format!("`{}` needs --kernel", self.target)))?;
        parse_kernel(spec, n)
    }
}

/// `a:b:step` (inclusive of b) or a comma-separated list.
pub fn parse_grid(text: &str) -> CliResult<Vec<f64>> {
    let bad = |what: &str| CliError::usage(format!("bad grid {text:?}: {what}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("{s:?} is not a number")));
    let values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("expected start:stop:step"));
        }
        let (a, b, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
        if !(step > 0.0) || b < a {
            return Err(bad("need step > 0 and stop >= start"));
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        if count > 1_000_000 {
            return Err(bad("more than 10^6 points"));
        }
        (0..count).map(|i| a + step * i as f64).collect()
    } else {
        text.split(',').map(num).collect::<CliResult<Vec<f64>>>()?
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(values)
}

pub fn parse_int_grid(text: &str) -> CliResult<Vec<u32>> {
    parse_grid(text)?
        .into_iter()
        .map(|v| {
            if v.fract() == 0.0 && v >= 0.0 && v <= u32::MAX as f64 {
                Ok(v as u32)
            } else {
                Err(CliError::usage(format!("{v} is not a nonnegative integer")))
            }
        })
        .collect()
}

/// `name[:key=value,...]`, for example `power:nu=0.5,p=2,eps=0`,
/// `poly:nu=1,coeffs=1;2`, `uniform`, `sphere-limit:k=100`, `exp:alpha=2`
/// or `file:path=w.txt,nu=1`. The result is normalized.
pub fn parse_kernel(spec: &str, n: u32) -> CliResult<RadialKernel> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut params = BTreeMap::new();
    for item in rest.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("kernel parameter {item:?} is not key=value")))?;
        params.insert(k.trim().to_string(), v.trim().to_string());
    }
    let mut take = |key: &str| params.remove(key);
    let number = |key: &str, v: Option<String>, default: Option<f64>| -> CliResult<f64> {
        match v {
            Some(s) => s
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("kernel parameter {key}={s:?} is not a number"))),
            None => default.ok_or_else(|| CliError::usage(format!("kernel `{name}` needs {key}="))),
        }
    };
    let kernel = match name {
        "uniform" => RadialKernel::uniform_ball(n)?,
        "power" => {
            let nu = number("nu", take("nu"), None)?;
            let p = number("p", take("p"), Some(0.0))?;
            let eps = number("eps", take("eps"), Some(0.0))?;
            RadialKernel::power(n, nu, p, eps)?
        }
        "poly" => {
            let nu = number("nu", take("nu"), None)?;
            let coeffs = take("coeffs").ok_or_else(|| CliError::usage("kernel `poly` needs coeffs=c0;c1;..."))?;
            let coeffs = coeffs
                .split(';')
                .map(|c| number("coeffs", Some(c.to_string()), None))
                .collect::<CliResult<Vec<f64>>>()?;
            RadialKernel::polynomial(n, nu, &coeffs)?
        }
        "sphere-limit" => {
            let k = number("k", take("k"), None)?;
            if k.fract() != 0.0 || k < 0.0 {
                return Err(CliError::usage(format!("sphere-limit k must be an integer, got {k}")));
            }
            SphereLimitKernel::new(n, k as u32)?.radial_kernel()?
        }
        "exp" => {
            if n != 3 {
                return Err(CliError::usage("the exponential kernel is defined for n = 3 only"));
            }
            ExpKernel3D::new(number("alpha", take("alpha"), None)?)?.radial_kernel()?
        }
        "file" => {
            let path = take("path").ok_or_else(|| CliError::usage("kernel `file` needs path="))?;
            let nu = number("nu", take("nu"), None)?;
            RadialKernel::from_file(path, n, nu)?
        }
        other => return Err(CliError::usage(format!("unknown kernel {other:?}"))),
    };
    if let Some(key) = params.keys().next() {
        return Err(CliError::usage(format!("unknown parameter {key:?} for kernel `{name}`")));
    }
    Ok(normalize(&kernel)?)
}
