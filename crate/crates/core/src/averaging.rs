//! Admissible radial averaging kernels and the regularized Green's function
//!
//! ```text
//! G_{n,ω}(r) = S_{n−1}² ∫₀^{1/2}∫₀^{1/2} s^{n−1} t^{n−1} ω(s) ω(t) k_n(r,s,t) ds dt
//! ```
//!
//! together with its value at the origin (two equivalent functionals), its
//! radial derivative, its Laplacian and the compactly supported deformed
//! profile.

use std::cell::{Cell, RefCell};
use std::fmt;
use std::path::Path;
use std::sync::{Arc, OnceLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::greens::{check_dimension, green, green_derivative};
use crate::quadrature::{integrate_with_breaks, QuadOptions};
use crate::specfun::sphere_area;
use crate::sphere_kernel::{dk_unchecked, k_unchecked};

/// Default absolute tolerance for nested quadratures.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Upper end of the kernel support.
pub const HALF: f64 = 0.5;

pub type Density = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A radial averaging density on (0, 1/2] written as
/// `ω(t) = scale · t^{−(n−δ_{1n})/2+ν} · w(t)`.
#[derive(Clone)]
pub struct RadialKernel {
    n: u32,
    nu: f64,
    w: Density,
    scale: f64,
    eps_gap: Option<f64>,
    breaks: Vec<f64>,
    partial: Option<Density>,
    w_l1: f64,
    cache: Arc<OnceLock<std::result::Result<Vec<(f64, f64)>, Error>>>,
    label: String,
}

impl fmt::Debug for RadialKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialKernel")
            .field("label", &self.label)
            .field("n", &self.n)
            .field("nu", &self.nu)
            .field("scale", &self.scale)
            .field("eps_gap", &self.eps_gap)
            .finish()
    }
}

/// Which admissibility conditions an operation needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Need {
    Value,
    SquaredPartial,
    Smooth,
}

/// Result of evaluating G_{n,ω} at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AveragedGreen {
    pub r: f64,
    pub value: f64,
    pub error_bound: f64,
}

const PROBE_POINTS: usize = 2000;

impl RadialKernel {
    /// A kernel from a nonnegative density `w` on (0, 1/2). Not normalized.
    pub fn new<F>(n: u32, nu: f64, w: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_dimension(n)?;
        if !nu.is_finite() {
            return Err(Error::invalid(format!("ν must be finite, got {nu}")));
        }
        let w: Density = Arc::new(w);
        for i in 0..PROBE_POINTS {
            let t = HALF * (i as f64 + 0.5) / PROBE_POINTS as f64;
            let v = w(t);
            if !v.is_finite() {
                return Err(Error::invalid(format!("w({t}) = {v} is not finite")));
            }
            if v < 0.0 {
                return Err(Error::invalid(format!(
                    "w must be nonnegative, but w({t}) = {v}"
                )));
            }
        }
        Ok(RadialKernel {
            n,
            nu,
            w,
            scale: 1.0,
            eps_gap: None,
            breaks: Vec::new(),
            partial: None,
            w_l1: f64::NAN,
            cache: Arc::new(OnceLock::new()),
            label: "custom".into(),
        })
    }

    /// Declares that w vanishes on [0, ε]. The point ε becomes a break point.
    pub fn with_gap(mut self, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < HALF) {
            return Err(Error::invalid(format!("gap ε must lie in (0, 1/2), got {eps}")));
        }
        self.eps_gap = Some(eps);
        self.breaks.push(eps);
        self.tidy_breaks();
        self.cache = Arc::new(OnceLock::new());
        Ok(self)
    }

    /// Points in (0, 1/2) where w is not smooth.
    pub fn with_breakpoints(mut self, points: &[f64]) -> Self {
        self.breaks.extend_from_slice(points);
        self.tidy_breaks();
        self.cache = Arc::new(OnceLock::new());
        self
    }

    /// Closed form of `∫₀^s t^{n−1} ω(t) dt` for the kernel as constructed
    /// (before any rescaling by [`normalize`]).
    pub fn with_partial_integral<F>(mut self, m: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let scale = self.scale;
        self.partial = Some(Arc::new(move |s| m(s) / scale));
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    fn tidy_breaks(&mut self) {
        self.breaks.retain(|b| *b > 0.0 && *b < HALF);
        self.breaks.sort_by(f64::total_cmp);
        self.breaks.dedup();
    }

    /// w(t) = constant on (0, 1/2) with ν = (n−δ_{1n})/2, so ω itself is constant.
    pub fn uniform_ball(n: u32) -> Result<Self> {
        let nu = exponent_shift(n);
        Ok(Self::new(n, nu, |_| 1.0)?.with_label("uniform-ball"))
    }

    /// w(t) = Σ c_i t^i.
    pub fn polynomial(n: u32, nu: f64, coeffs: &[f64]) -> Result<Self> {
        let c = coeffs.to_vec();
        if c.is_empty() {
            return Err(Error::invalid("polynomial kernel needs at least one coefficient"));
        }
        Ok(Self::new(n, nu, move |t| c.iter().rev().fold(0.0, |acc, ci| acc * t + ci))?
            .with_label(format!("polynomial{coeffs:?}")))
    }

    /// w(t) = t^p on (ε, 1/2) and zero below ε (no gap when ε = 0).
    pub fn power(n: u32, nu: f64, p: f64, eps: f64) -> Result<Self> {
        if !p.is_finite() || !(0.0..HALF).contains(&eps) {
            return Err(Error::invalid(format!("power kernel needs finite p and ε in [0, 1/2), got p={p}, ε={eps}")));
        }
        let k = Self::new(n, nu, move |t| if t < eps { 0.0 } else { t.powf(p) })?;
        let k = if eps > 0.0 { k.with_gap(eps)? } else { k };
        Ok(k.with_label(format!("power(nu={nu},p={p},eps={eps})")))
    }

    /// Piecewise-linear w through the nodes `(ts[i], ws[i])`, held constant
    /// outside the tabulated range.
    pub fn tabulated(n: u32, nu: f64, ts: Vec<f64>, ws: Vec<f64>) -> Result<Self> {
        if ts.len() != ws.len() || ts.len() < 2 {
            return Err(Error::invalid("tabulated kernel needs at least two (t, w) rows"));
        }
        if ts.windows(2).any(|p| p[1] <= p[0]) {
            return Err(Error::invalid("tabulated t values must be strictly increasing"));
        }
        if ts[0] <= 0.0 || ts[ts.len() - 1] >= HALF {
            return Err(Error::invalid("tabulated t values must lie inside (0, 1/2)"));
        }
        if ws.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::invalid("tabulated w values must be finite and nonnegative"));
        }
        let nodes = ts.clone();
        let f = move |t: f64| {
            if t <= ts[0] {
                return ws[0];
            }
            let last = ts.len() - 1;
            if t >= ts[last] {
                return ws[last];
            }
            let i = ts.partition_point(|x| *x <= t) - 1;
            let lam = (t - ts[i]) / (ts[i + 1] - ts[i]);
            ws[i] + lam * (ws[i + 1] - ws[i])
        };
        Ok(Self::new(n, nu, f)?.with_breakpoints(&nodes).with_label("tabulated"))
    }

    /// Reads a two-column `t w` text file (whitespace or comma separated,
    /// `#` comments allowed).
    pub fn from_file(path: impl AsRef<Path>, n: u32, nu: f64) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read kernel file {}: {e}", path.display())))?;
        let mut ts = Vec::new();
        let mut ws = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|c| !c.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(Error::invalid(format!(
                    "{}:{}: expected two columns",
                    path.display(),
                    lineno + 1
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|_| {
                    Error::invalid(format!("{}:{}: bad number {s:?}", path.display(), lineno + 1))
                })
            };
            ts.push(parse(cols[0])?);
            ws.push(parse(cols[1])?);
        }
        Self::tabulated(n, nu, ts, ws)
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn eps_gap(&self) -> Option<f64> {
        self.eps_gap
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Normalization factor applied on top of w.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Break points of w inside (0, 1/2), including the gap edge.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    /// Exponent e of the radial density `t^{n−1} ω(t) = scale · t^e · w(t)`.
    fn radial_exponent(&self) -> f64 {
        (self.n as f64 - 2.0 + delta1(self.n)) / 2.0 + self.nu
    }

    /// The scaled w.
    pub fn w(&self, t: f64) -> f64 {
        if !(t > 0.0 && t <= HALF) {
            return 0.0;
        }
        self.scale * (self.w)(t)
    }

    /// ω(t), zero outside (0, 1/2].
    pub fn omega(&self, t: f64) -> f64 {
        if !(t > 0.0 && t <= HALF) {
            return 0.0;
        }
        self.scale * t.powf(self.nu - exponent_shift(self.n)) * (self.w)(t)
    }

    /// t^{n−1} ω(t).
    pub fn radial_density(&self, t: f64) -> f64 {
        if !(t > 0.0 && t <= HALF) {
            return 0.0;
        }
        self.scale * t.powf(self.radial_exponent()) * (self.w)(t)
    }

    fn unscaled_density(&self, t: f64) -> f64 {
        t.powf(self.radial_exponent()) * (self.w)(t)
    }

    fn grid(&self, lo: f64, hi: f64, extra: &[f64]) -> Vec<f64> {
        let mut pts: Vec<f64> = vec![lo, hi];
        pts.extend(self.breaks.iter().copied());
        pts.extend(extra.iter().copied());
        clean_points(pts, lo, hi)
    }

    fn cumulative_table(&self) -> Result<&Vec<(f64, f64)>> {
        let table = self.cache.get_or_init(|| {
            let mut nodes: Vec<f64> = (1..=60).map(|k| HALF * 0.5f64.powi(k)).collect();
            nodes.extend((0..=64).map(|j| HALF * j as f64 / 64.0));
            nodes.extend(self.breaks.iter().copied());
            let nodes = clean_points(nodes, 0.0, HALF);
            let mut acc = 0.0;
            let mut err = 0.0;
            let mut out = Vec::with_capacity(nodes.len());
            out.push((nodes[0], 0.0));
            for w in nodes.windows(2) {
                let q = integrate_with_breaks(
                    |t| self.unscaled_density(t),
                    w,
                    QuadOptions {
                        abs_tol: 1e-16,
                        rel_tol: 1e-13,
                        max_subdivisions: 2000,
                    },
                )
                .map_err(|e| Error::inadmissible(format!("t^(n-1) ω(t) is not integrable: {e}")))?;
                acc += q.value;
                err += q.error;
                out.push((w[1], acc));
            }
            if !acc.is_finite() || err > 1e-10 * acc.max(1.0) {
                return Err(Error::inadmissible(format!(
                    "partial integral cannot be tabulated to 1e-10 (error {err:e})"
                )));
            }
            Ok(out)
        });
        table.as_ref().map_err(Clone::clone)
    }

    /// M(s) = ∫₀^s t^{n−1} ω(t) dt for s ∈ [0, 1/2].
    pub fn partial_integral(&self, s: f64) -> Result<f64> {
        let s = s.clamp(0.0, HALF);
        if let Some(m) = &self.partial {
            return Ok(self.scale * m(s));
        }
        let table = self.cumulative_table()?;
        let i = table.partition_point(|(x, _)| *x <= s) - 1;
        let (x0, c0) = table[i];
        if s == x0 {
            return Ok(self.scale * c0);
        }
        let q = integrate_with_breaks(
            |t| self.unscaled_density(t),
            &[x0, s],
            QuadOptions {
                abs_tol: 1e-16,
                rel_tol: 1e-13,
                max_subdivisions: 2000,
            },
        )?;
        Ok(self.scale * (c0 + q.value))
    }

    /// S_{n−1} ∫₀^{1/2} t^{n−1} ω(t) dt.
    pub fn mass(&self) -> Result<f64> {
        Ok(sphere_area(self.n) * self.partial_integral(HALF)?)
    }

    /// ∫₀^{1/2} w(t) dt of the unscaled w.
    fn w_l1(&self) -> Result<f64> {
        if self.w_l1.is_finite() {
            return Ok(self.w_l1);
        }
        let pts = self.grid(0.0, HALF, &[]);
        Ok(integrate_with_breaks(|t| (self.w)(t), &pts, QuadOptions::absolute(1e-12).with_budget(4000))?
            .value)
    }

    fn require(&self, need: Need) -> Result<()> {
        if self.eps_gap.is_some() {
            return Ok(());
        }
        let (n, nu) = (self.n, self.nu);
        let ok = match need {
            Need::Value => nu > 0.0 || (nu == 0.0 && n != 2),
            Need::SquaredPartial => nu > 0.0 || (nu == 0.0 && n == 1),
            Need::Smooth => nu >= 0.5 || (n == 1 && nu >= 0.0),
        };
        if ok {
            Ok(())
        } else {
            let what = match need {
                Need::Value => "ν > 0 (ν = 0 only for n ≠ 2)",
                Need::SquaredPartial => "ν > 0 (ν = 0 only for n = 1)",
                Need::Smooth => "ν >= 1/2 (ν >= 0 for n = 1)",
            };
            Err(Error::inadmissible(format!(
                "ν = {nu} in dimension {n}: this quantity needs {what} or a gap near the origin"
            )))
        }
    }
}

fn delta1(n: u32) -> f64 {
    if n == 1 {
        1.0
    } else {
        0.0
    }
}

/// (n − δ_{1n})/2, the shift between ν and the exponent of ω.
pub fn exponent_shift(n: u32) -> f64 {
    (n as f64 - delta1(n)) / 2.0
}

fn clean_points(mut pts: Vec<f64>, lo: f64, hi: f64) -> Vec<f64> {
    pts.retain(|p| p.is_finite() && *p >= lo && *p <= hi);
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * (1.0 + b.abs()));
    if let Some(first) = pts.first_mut() {
        *first = lo;
    }
    if let Some(last) = pts.last_mut() {
        *last = hi;
    }
    pts
}

/// Rescales the kernel so that `S_{n−1} ∫ t^{n−1} ω = 1`.
pub fn normalize(kernel: &RadialKernel) -> Result<RadialKernel> {
    let mass = kernel.mass()?;
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::inadmissible(format!("kernel mass {mass} is not positive and finite")));
    }
    let mut out = kernel.clone();
    out.scale = kernel.scale / mass;
    out.w_l1 = kernel.w_l1()?;
    Ok(out)
}

/// Collects the first error raised inside a quadrature callback.
struct Failure(RefCell<Option<Error>>);

impl Failure {
    fn new() -> Self {
        Failure(RefCell::new(None))
    }

    fn guard(&self, r: Result<f64>) -> f64 {
        match r {
            Ok(v) => v,
            Err(e) => {
                self.0.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    }

    fn finish<T>(self, r: Result<T>) -> Result<T> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => r,
        }
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("tolerance must be positive, got {tol}")))
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("radius must be finite and >= 0, got {r}")))
    }
}

/// Break points in s for the nested (s, t) integrals at radius r.
fn outer_breaks(kernel: &RadialKernel, r: f64) -> Vec<f64> {
    let mut extra = vec![r, r / 2.0];
    for &b in kernel.breakpoints() {
        extra.extend([b + r, b - r, r - b, (r - b) / 2.0]);
    }
    kernel.grid(0.0, HALF, &extra)
}

/// Break points in t ∈ [0, s] at radius r.
fn inner_breaks(kernel: &RadialKernel, r: f64, s: f64) -> Vec<f64> {
    kernel.grid(0.0, s, &[s - r, r - s])
}

/// Integrates `2 S² ∫₀^{1/2} ds ρ(s) ∫₀^s dt ρ(t) f(r, s, t)` over the triangle t ≤ s.
fn triangle_integral<F>(kernel: &RadialKernel, r: f64, tol: f64, f: F) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    let sa = sphere_area(kernel.n);
    let pref = 2.0 * sa * sa;
    let inner_tol = tol / (20.0 * sa);
    let outer_tol = 0.8 * tol / pref;
    let failure = Failure::new();
    let max_inner = Cell::new(0.0f64);
    let outer = |s: f64| {
        let rho_s = kernel.radial_density(s);
        if rho_s == 0.0 {
            return 0.0;
        }
        let pts = inner_breaks(kernel, r, s);
        let inner = integrate_with_breaks(
            |t| {
                let rho_t = kernel.radial_density(t);
                if rho_t == 0.0 {
                    0.0
                } else {
                    rho_t * failure.guard(f(s, t))
                }
            },
            &pts,
            QuadOptions {
                abs_tol: inner_tol,
                rel_tol: 0.0,
                max_subdivisions: 2000,
            },
        );
        match inner {
            Ok(q) => {
                max_inner.set(max_inner.get().max(q.error));
                rho_s * q.value
            }
            Err(e) => failure.guard(Err(e)),
        }
    };
    let pts = outer_breaks(kernel, r);
    let q = integrate_with_breaks(
        outer,
        &pts,
        QuadOptions {
            abs_tol: outer_tol,
            rel_tol: 0.0,
            max_subdivisions: 2000,
        },
    );
    let q = failure.finish(q)?;
    let err = pref * q.error + 2.0 * sa * max_inner.get();
    Ok((pref * q.value, err))
}

/// G_{n,ω}(r) by nested adaptive quadrature. Exactly G_n(r) for r > 1.
pub fn averaged_green(kernel: &RadialKernel, r: f64, tol: f64) -> Result<AveragedGreen> {
    check_radius(r)?;
    check_tol(tol)?;
    kernel.require(Need::Value)?;
    let n = kernel.n;
    if r > 1.0 {
        return Ok(AveragedGreen {
            r,
            value: green(n, r),
            error_bound: 0.0,
        });
    }
    let (value, error_bound) = triangle_integral(kernel, r, tol, |s, t| k_unchecked(n, r, s, t))?;
    Ok(AveragedGreen { r, value, error_bound })
}

/// [`averaged_green`] over many radii in parallel; output order follows `radii`.
pub fn averaged_green_batch(kernel: &RadialKernel, radii: &[f64], tol: f64) -> Vec<Result<AveragedGreen>> {
    radii.par_iter().map(|&r| averaged_green(kernel, r, tol)).collect()
}

/// G_{n,ω}(0) as `2 S² ∫₀^{1/2} s^{n−1} G_n(s) ω(s) M(s) ds`.
pub fn value_at_zero_i1(kernel: &RadialKernel) -> Result<f64> {
    value_at_zero_i1_tol(kernel, DEFAULT_TOL * 1e-2)
}

pub fn value_at_zero_i1_tol(kernel: &RadialKernel, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    kernel.require(Need::Value)?;
    let n = kernel.n;
    let sa = sphere_area(n);
    let failure = Failure::new();
    let pts = kernel.grid(0.0, HALF, &[]);
    let q = integrate_with_breaks(
        |s| {
            let rho = kernel.radial_density(s);
            if rho == 0.0 {
                0.0
            } else {
                rho * green(n, s) * failure.guard(kernel.partial_integral(s))
            }
        },
        &pts,
        QuadOptions::absolute(tol / (2.0 * sa * sa)).with_budget(4000),
    );
    let q = failure.finish(q).map_err(|e| match e {
        Error::Quadrature { .. } => Error::inadmissible(format!("I1 integrand diverges: {e}")),
        other => other,
    })?;
    Ok(2.0 * sa * sa * q.value)
}

/// G_{n,ω}(0) as `G_n(1/2) + S_{n−1} ∫₀^{1/2} s^{1−n} M(s)² ds`.
pub fn value_at_zero_i2(kernel: &RadialKernel) -> Result<f64> {
    value_at_zero_i2_tol(kernel, DEFAULT_TOL * 1e-2)
}

pub fn value_at_zero_i2_tol(kernel: &RadialKernel, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    kernel.require(Need::SquaredPartial)?;
    let n = kernel.n;
    let sa = sphere_area(n);
    let lower = match kernel.eps_gap {
        Some(eps) => eps,
        None => {
            // M(s) ≤ scale · s^e · ‖w‖₁ bounds the discarded piece [0, δ]
            let p = 2.0 * kernel.nu + delta1(n);
            let c = sa * (kernel.scale * kernel.w_l1()?).powi(2) / p;
            let d = (0.1 * tol / c).powf(1.0 / p);
            d.min(HALF)
        }
    };
    let failure = Failure::new();
    let pts = kernel.grid(lower, HALF, &[]);
    let q = integrate_with_breaks(
        |s| {
            let m = failure.guard(kernel.partial_integral(s));
            s.powi(1 - n as i32) * m * m
        },
        &pts,
        QuadOptions::absolute(0.9 * tol / sa).with_budget(4000),
    );
    let q = failure.finish(q)?;
    Ok(green(n, HALF) + sa * q.value)
}

/// ∂_r G_{n,ω}(r), differentiating under the integral sign. Exactly
/// `−r^{1−n}/S_{n−1}` for r > 1.
pub fn derivative_endpoints(kernel: &RadialKernel, r: f64) -> Result<f64> {
    derivative_tol(kernel, r, DEFAULT_TOL).map(|g| g.value)
}

pub fn derivative_tol(kernel: &RadialKernel, r: f64, tol: f64) -> Result<AveragedGreen> {
    check_radius(r)?;
    check_tol(tol)?;
    kernel.require(Need::Smooth)?;
    let n = kernel.n;
    if r > 1.0 {
        let value = if n == 1 { -0.5 } else { green_derivative(n, r) };
        return Ok(AveragedGreen { r, value, error_bound: 0.0 });
    }
    let (value, error_bound) = triangle_integral(kernel, r, tol, |s, t| Ok(dk_unchecked(n, r, s, t)))?;
    Ok(AveragedGreen { r, value, error_bound })
}

/// A_n G_{n,ω}(0) = S_{n−1} ∫₀^{1/2} s^{n−1} ω(s)² ds, the squared L₂ norm of ω.
pub fn laplacian_at_zero(kernel: &RadialKernel) -> Result<f64> {
    kernel.require(Need::Smooth)?;
    let sa = sphere_area(kernel.n);
    let pts = kernel.grid(0.0, HALF, &[]);
    let q = integrate_with_breaks(
        |s| kernel.radial_density(s) * kernel.omega(s),
        &pts,
        QuadOptions {
            abs_tol: 1e-13,
            rel_tol: 1e-12,
            max_subdivisions: 4000,
        },
    )
    .map_err(|e| Error::inadmissible(format!("ω is not square integrable: {e}")))?;
    Ok(sa * q.value)
}

/// A_n G_{n,ω}(r) as the autocorrelation ∫ ω(|x−y|) ω(|y|) dⁿy at |x| = r.
pub fn laplacian_profile(kernel: &RadialKernel, r: f64, tol: f64) -> Result<f64> {
    check_radius(r)?;
    check_tol(tol)?;
    kernel.require(Need::Smooth)?;
    if r >= 1.0 {
        return Ok(0.0);
    }
    if r == 0.0 {
        return laplacian_at_zero(kernel);
    }
    if kernel.n == 1 {
        return autocorrelation_1d(kernel, r, tol);
    }
    let n = kernel.n;
    let c = sphere_area(n - 1);
    let failure = Failure::new();
    let outer = |rho: f64| {
        let dens = kernel.radial_density(rho);
        if dens == 0.0 {
            return 0.0;
        }
        let gap = (r - rho).abs();
        if gap >= HALF {
            return 0.0;
        }
        let denom = 4.0 * r * rho;
        let angle = |d: f64| {
            let v = (d * d - gap * gap) / denom;
            if v >= 1.0 {
                std::f64::consts::PI
            } else {
                2.0 * v.max(0.0).sqrt().asin()
            }
        };
        let phi_max = angle(HALF);
        let mut pts = vec![0.0, phi_max];
        for &b in kernel.breakpoints() {
            if b > gap {
                pts.push(angle(b));
            }
        }
        let pts = clean_points(pts, 0.0, phi_max);
        let inner = integrate_with_breaks(
            |phi: f64| {
                let half_sin = (0.5 * phi).sin();
                let d = (gap * gap + denom * half_sin * half_sin).sqrt();
                phi.sin().powi(n as i32 - 2) * kernel.omega(d)
            },
            &pts,
            QuadOptions { rel_tol: 1e-12, ..QuadOptions::absolute(tol / (10.0 * c)) }.with_budget(2000),
        );
        dens * failure.guard(inner.map(|q| q.value))
    };
    let mut extra = vec![r, r - HALF];
    for &b in kernel.breakpoints() {
        extra.extend([r + b, r - b, b - r]);
    }
    let pts = kernel.grid(0.0, HALF, &extra);
    let q = integrate_with_breaks(
        outer,
        &pts,
        QuadOptions { rel_tol: 1e-12, ..QuadOptions::absolute(0.5 * tol / c) }.with_budget(4000),
    );
    let q = failure.finish(q)?;
    Ok(c * q.value)
}

fn autocorrelation_1d(kernel: &RadialKernel, r: f64, tol: f64) -> Result<f64> {
    let lo = (r - HALF).max(-HALF);
    let hi = (r + HALF).min(HALF);
    let mut extra = vec![0.0, r];
    for &b in kernel.breakpoints() {
        extra.extend([b, -b, r + b, r - b]);
    }
    extra.retain(|x| *x > lo && *x < hi);
    let mut pts = vec![lo, hi];
    pts.extend(extra);
    let pts = clean_points(pts, lo, hi);
    let q = integrate_with_breaks(
        |y: f64| kernel.omega((r - y).abs()) * kernel.omega(y.abs()),
        &pts,
        QuadOptions::absolute(tol).with_budget(4000),
    )?;
    Ok(q.value)
}

/// f_n(r²) = G_{n,ω}(r) − G_n(max(r, 1)).
pub fn deformed_profile(kernel: &RadialKernel, r: f64) -> Result<f64> {
    deformed_profile_tol(kernel, r, DEFAULT_TOL)
}

pub fn deformed_profile_tol(kernel: &RadialKernel, r: f64, tol: f64) -> Result<f64> {
    check_radius(r)?;
    if r >= 1.0 {
        kernel.require(Need::Value)?;
        return Ok(0.0);
    }
    let g = averaged_green(kernel, r, tol)?;
    Ok(g.value - green(kernel.n, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn poly(n: u32, nu: f64, c: &[f64]) -> RadialKernel {
        normalize(&RadialKernel::polynomial(n, nu, c).unwrap()).unwrap()
    }

    #[test]
    fn uniform_ball_normalization_constant() {
        for n in 1..=6u32 {
            let k = normalize(&RadialKernel::uniform_ball(n).unwrap()).unwrap();
            let c = n as f64 * 2f64.powi(n as i32) / sphere_area(n);
            assert!((k.omega(0.3) - c).abs() < 1e-12 * c, "n = {n}");
            assert!((k.mass().unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_negative_and_empty_densities() {
        assert!(RadialKernel::new(3, 0.5, |t| t - 0.25).is_err());
        let zero = RadialKernel::new(3, 0.5, |_| 0.0).unwrap();
        assert!(normalize(&zero).is_err());
    }

    #[test]
    fn partial_integral_matches_closed_form() {
        // n = 3, ν = 1/2, w = 1: t^{n−1} ω = t
        let k = RadialKernel::new(3, 0.5, |_| 1.0).unwrap();
        for &s in &[0.0, 1e-9, 0.01, 0.123, 0.37, 0.5] {
            assert!((k.partial_integral(s).unwrap() - s * s / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn outer_values_are_exact() {
        let k = poly(3, 0.5, &[0.0, 0.0, 1.0]);
        let g = averaged_green(&k, 2.0, 1e-8).unwrap();
        assert_eq!(g.value, 1.0 / (8.0 * PI));
        assert_eq!(g.error_bound, 0.0);
    }

    #[test]
    fn value_at_one_equals_green() {
        for n in [1u32, 2, 3, 5] {
            let k = poly(n, 0.75, &[1.0, 2.0]);
            let g = averaged_green(&k, 1.0, 1e-9).unwrap();
            assert!((g.value - green(n, 1.0)).abs() < 1e-8, "n = {n}");
        }
    }

    #[test]
    fn i1_i2_and_origin_value_agree() {
        for n in [1u32, 2, 3, 4, 5] {
            let k = poly(n, 0.6, &[0.5, 0.0, 3.0]);
            let i1 = value_at_zero_i1(&k).unwrap();
            let i2 = value_at_zero_i2(&k).unwrap();
            let g0 = averaged_green(&k, 0.0, 1e-9).unwrap().value;
            assert!((i1 - i2).abs() < 1e-8 * (1.0 + i1.abs()), "n={n}: {i1} vs {i2}");
            assert!((i1 - g0).abs() < 1e-7 * (1.0 + i1.abs()), "n={n}: {i1} vs {g0}");
        }
    }

    #[test]
    fn admissibility_conditions() {
        let k = poly(2, 0.0, &[1.0]);
        assert!(matches!(value_at_zero_i1(&k), Err(Error::Inadmissible(_))));
        assert!(matches!(value_at_zero_i2(&k), Err(Error::Inadmissible(_))));
        let k = poly(3, 0.0, &[1.0]);
        assert!(value_at_zero_i1(&k).is_ok());
        assert!(matches!(value_at_zero_i2(&k), Err(Error::Inadmissible(_))));
        let k = poly(3, 0.3, &[1.0]);
        assert!(matches!(laplacian_at_zero(&k), Err(Error::Inadmissible(_))));
        assert!(matches!(derivative_endpoints(&k, 0.3), Err(Error::Inadmissible(_))));
        let k = poly(1, 0.0, &[1.0]);
        assert!(value_at_zero_i2(&k).is_ok());
        assert!(laplacian_at_zero(&k).is_ok());
        let gap = normalize(&RadialKernel::power(3, -1.0, 0.0, 0.2).unwrap()).unwrap();
        assert!(value_at_zero_i2(&gap).is_ok());
        assert!(laplacian_at_zero(&gap).is_ok());
    }

    #[test]
    fn derivative_endpoint_values() {
        let k = poly(3, 0.5, &[1.0, 1.0]);
        assert_eq!(derivative_endpoints(&k, 0.0).unwrap(), 0.0);
        assert!((derivative_endpoints(&k, 1.5).unwrap() + 1.0 / (9.0 * PI)).abs() < 1e-16);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for n in [1u32, 2, 3, 4] {
            let k = poly(n, 0.8, &[1.0, 0.0, 2.0]);
            let r = 0.4;
            let h = 1e-3;
            let gp = averaged_green(&k, r + h, 1e-11).unwrap().value;
            let gm = averaged_green(&k, r - h, 1e-11).unwrap().value;
            let fd = (gp - gm) / (2.0 * h);
            let d = derivative_endpoints(&k, r).unwrap();
            assert!((fd - d).abs() < 1e-5, "n={n}: {fd} vs {d}");
        }
    }

    #[test]
    fn laplacian_profile_endpoints() {
        for n in [1u32, 2, 3, 4] {
            let k = poly(n, 0.5, &[1.0, 4.0]);
            let l0 = laplacian_at_zero(&k).unwrap();
            let tiny = laplacian_profile(&k, 1e-7, 1e-10).unwrap();
            assert!((l0 - tiny).abs() < 1e-4 * l0, "n={n}: {l0} vs {tiny}");
            assert_eq!(laplacian_profile(&k, 1.2, 1e-8).unwrap(), 0.0);
            assert!(laplacian_profile(&k, 1.0 - 1e-6, 1e-12).unwrap().abs() < 1e-4 * l0);
        }
    }

    #[test]
    fn laplacian_profile_matches_finite_difference_of_green() {
        use crate::oracles::fd_radial_laplacian;
        for n in [2u32, 3] {
            let k = poly(n, 1.0, &[1.0, 1.0]);
            let r = 0.45;
            let fd = fd_radial_laplacian(|x| averaged_green(&k, x, 1e-12).unwrap().value, n, r, 2e-3).unwrap();
            let lap = laplacian_profile(&k, r, 1e-10).unwrap();
            assert!((fd - lap).abs() < 1e-4 * (1.0 + lap.abs()), "n={n}: {fd} vs {lap}");
        }
    }

    #[test]
    fn monotone_and_positive() {
        let k = poly(3, 0.5, &[1.0, 0.0, 1.0]);
        let mut prev = f64::INFINITY;
        for i in 0..40 {
            let r = 2.0 * i as f64 / 39.0;
            let g = averaged_green(&k, r, 1e-9).unwrap().value;
            assert!(g > 0.0 && g <= prev + 1e-9);
            prev = g;
        }
    }

    #[test]
    fn deformed_profile_support() {
        let k = poly(4, 0.5, &[1.0]);
        assert!(deformed_profile(&k, 1.0).unwrap().abs() < 1e-8);
        assert_eq!(deformed_profile(&k, 1.7).unwrap(), 0.0);
        assert!(deformed_profile(&k, 0.2).unwrap() > 0.0);
    }

    #[test]
    fn tabulated_kernel_from_file() {
        let dir = std::env::temp_dir().join(format!("avgreen-kernel-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("w.txt");
        let mut text = String::from("# t w\n");
        for i in 1..50 {
            let t = i as f64 / 100.0;
            text.push_str(&format!("{t} {}\n", 1.0 + t));
        }
        std::fs::write(&path, text).unwrap();
        let tab = normalize(&RadialKernel::from_file(&path, 3, 0.5).unwrap()).unwrap();
        let exact = poly(3, 0.5, &[1.0, 1.0]);
        // linear data is reproduced except on the clamped end pieces
        assert!((tab.w(0.3) / exact.w(0.3) - 1.0).abs() < 1e-2);
        std::fs::remove_dir_all(&dir).ok();
        assert!(RadialKernel::tabulated(3, 0.5, vec![0.1, 0.1], vec![1.0, 1.0]).is_err());
        assert!(RadialKernel::tabulated(3, 0.5, vec![0.1, 0.6], vec![1.0, 1.0]).is_err());
    }
}
