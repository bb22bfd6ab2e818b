//! Brute-force estimators used as ground truth for the closed forms:
//! Monte-Carlo sphere and ball averages, nested angular quadrature, a plain
//! adaptive-quadrature wrapper and finite-difference radial operators.
//!
//! Monte-Carlo runs are split into a fixed number of shards. Shard `i` draws
//! from a ChaCha8 stream seeded with `seed` and stream id `i`, so results do
//! not depend on the thread count. Shard statistics are merged in index order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::averaging::{RadialKernel, HALF};
use crate::error::{Error, Result};
use crate::greens::{check_dimension, green};
use crate::quadrature::{integrate_with_breaks, QuadOptions};
use crate::specfun::sym_beta_trig;

const SHARDS: u64 = 64;
const MAX_MC_DIMENSION: usize = 32;
const MIN_SAMPLES: u64 = 1000;
const SINGULAR_RADIUS: f64 = 1e-12;

/// One oracle estimate.
///
/// For Monte-Carlo oracles `error` is the standard error of the mean and
/// `count` the sample count; for quadrature oracles `error` is the achieved
/// error bound and `count` the number of subdivisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleEstimate {
    pub value: f64,
    pub error: f64,
    pub count: u64,
    pub seed: Option<u64>,
}

impl OracleEstimate {
    /// `|value − reference|` measured in units of `error`.
    ///
    /// A zero-variance estimate (the conditional estimator inside the inner
    /// region is exact) is measured against a few ulps instead.
    pub fn z_score(&self, reference: f64) -> f64 {
        let ulps = 8.0 * f64::EPSILON * self.value.abs().max(reference.abs()).max(f64::MIN_POSITIVE);
        (self.value - reference).abs() / self.error.max(ulps)
    }
}

/// How the double-sphere integrand is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereEstimator {
    /// G_n(|x + sŷ + tẑ|) with both directions random.
    Direct,
    /// G_n(max(|x + sŷ|, t)): the ẑ-average done exactly by the mean-value
    /// property of harmonic functions.
    Conditional,
    /// `Direct` for n ≤ 3, `Conditional` for n ≥ 4, where the direct
    /// integrand has infinite variance.
    Auto,
}

impl SphereEstimator {
    fn resolve(self, n: u32) -> SphereEstimator {
        match self {
            SphereEstimator::Auto if n >= 4 => SphereEstimator::Conditional,
            SphereEstimator::Auto => SphereEstimator::Direct,
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + d * d * (self.count as f64 * other.count as f64) / count as f64;
        Moments { count, mean, m2 }
    }

    fn std_error(&self) -> f64 {
        if self.count < 2 {
            return f64::INFINITY;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

fn check_samples(samples: u64) -> Result<()> {
    if samples < MIN_SAMPLES {
        Err(Error::invalid(format!("at least {MIN_SAMPLES} samples are required, got {samples}")))
    } else {
        Ok(())
    }
}

/// Runs `draw` `samples` times over fixed shards and reduces deterministically.
fn sharded<F>(samples: u64, seed: u64, draw: F) -> OracleEstimate
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let per = samples / SHARDS;
    let extra = samples % SHARDS;
    let parts: Vec<Moments> = (0..SHARDS)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let mut m = Moments::default();
            let count = per + u64::from(i < extra);
            for _ in 0..count {
                m.push(draw(&mut rng));
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    OracleEstimate {
        value: total.mean,
        error: total.std_error(),
        count: total.count,
        seed: Some(seed),
    }
}

/// Fills `v[..n]` with a uniform point on the unit sphere S^{n−1}.
fn unit_vector(rng: &mut ChaCha8Rng, v: &mut [f64]) {
    if v.len() == 1 {
        v[0] = if rng.random::<bool>() { 1.0 } else { -1.0 };
        return;
    }
    loop {
        let mut norm2 = 0.0;
        for x in v.iter_mut() {
            *x = rng.sample(StandardNormal);
            norm2 += *x * *x;
        }
        if norm2 > 1e-300 {
            let inv = norm2.sqrt().recip();
            v.iter_mut().for_each(|x| *x *= inv);
            return;
        }
    }
}

/// Distance |r e₁ + s ŷ + t ẑ| (or G-argument under the conditional estimator)
/// for one draw of the directions.
fn sphere_draw(n: usize, r: f64, s: f64, t: f64, est: SphereEstimator, rng: &mut ChaCha8Rng) -> f64 {
    let mut y = [0.0; MAX_MC_DIMENSION];
    let mut z = [0.0; MAX_MC_DIMENSION];
    loop {
        unit_vector(rng, &mut y[..n]);
        let mut w2 = 0.0;
        let mut d2 = 0.0;
        match est {
            SphereEstimator::Conditional => {
                for i in 0..n {
                    let wi = if i == 0 { r } else { 0.0 } + s * y[i];
                    w2 += wi * wi;
                }
                return w2.sqrt().max(t);
            }
            _ => {
                unit_vector(rng, &mut z[..n]);
                for i in 0..n {
                    let wi = if i == 0 { r } else { 0.0 } + s * y[i] + t * z[i];
                    d2 += wi * wi;
                }
            }
        }
        let d = d2.sqrt();
        if n == 1 || d >= SINGULAR_RADIUS {
            return d;
        }
    }
}

fn check_mc_dimension(n: u32) -> Result<()> {
    check_dimension(n)?;
    if n as usize > MAX_MC_DIMENSION {
        return Err(Error::invalid(format!(
            "Monte-Carlo oracles support n <= {MAX_MC_DIMENSION}, got {n}"
        )));
    }
    Ok(())
}

/// Monte-Carlo estimate of k_n(r, s, t) = ⟨G_n(|x + sŷ + tẑ|)⟩ over two
/// uniform unit vectors, choosing the estimator automatically.
pub fn mc_double_sphere(n: u32, r: f64, s: f64, t: f64, samples: u64, seed: u64) -> Result<OracleEstimate> {
    mc_double_sphere_with(n, r, s, t, samples, seed, SphereEstimator::Auto)
}

pub fn mc_double_sphere_with(
    n: u32,
    r: f64,
    s: f64,
    t: f64,
    samples: u64,
    seed: u64,
    estimator: SphereEstimator,
) -> Result<OracleEstimate> {
    check_mc_dimension(n)?;
    check_samples(samples)?;
    crate::sphere_kernel::SphereTriple::new(r, s, t)?;
    let est = estimator.resolve(n);
    if n == 1 && est == SphereEstimator::Conditional {
        return Err(Error::invalid("the conditional estimator needs n >= 2"));
    }
    let nu = n as usize;
    Ok(sharded(samples, seed, |rng| green(n, sphere_draw(nu, r, s, t, est, rng))))
}

/// Inverse-CDF sampler for radii with density ∝ t^{n−1} ω(t) on [0, 1/2].
#[derive(Debug, Clone)]
pub struct RadialSampler {
    nodes: Vec<f64>,
    cdf: Vec<f64>,
}

impl RadialSampler {
    pub fn new(kernel: &RadialKernel) -> Result<Self> {
        let mut nodes: Vec<f64> = (0..=2048).map(|i| HALF * i as f64 / 2048.0).collect();
        nodes.extend((1..=400).map(|k| HALF * 2f64.powf(-(k as f64) / 8.0)));
        nodes.extend(kernel.breakpoints().iter().copied());
        nodes.retain(|x| (0.0..=HALF).contains(x));
        nodes.sort_by(f64::total_cmp);
        nodes.dedup();
        let mut cdf = Vec::with_capacity(nodes.len());
        for &x in &nodes {
            cdf.push(kernel.partial_integral(x).map_err(|e| {
                Error::inadmissible(format!("partial integral cannot be tabulated: {e}"))
            })?);
        }
        let total = *cdf.last().unwrap();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::inadmissible("kernel has no mass to sample from"));
        }
        if cdf.windows(2).any(|w| w[1] < w[0] - 1e-10 * total) {
            return Err(Error::inadmissible("tabulated partial integral is not monotone to 1e-10"));
        }
        let mut running = 0.0f64;
        for c in cdf.iter_mut() {
            running = running.max(*c / total);
            *c = running;
        }
        Ok(RadialSampler { nodes, cdf })
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u: f64 = rng.random();
        let i = self.cdf.partition_point(|c| *c <= u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let (x0, x1) = (self.nodes[i - 1], self.nodes[i]);
        if c1 > c0 {
            x0 + (u - c0) / (c1 - c0) * (x1 - x0)
        } else {
            x0
        }
    }
}

/// Monte-Carlo estimate of G_{n,ω}(r): radii drawn from t^{n−1}ω(t), directions
/// uniform; the ẑ-average is done exactly for n ≥ 4.
pub fn mc_double_ball(kernel: &RadialKernel, r: f64, samples: u64, seed: u64) -> Result<OracleEstimate> {
    let n = kernel.n();
    check_mc_dimension(n)?;
    check_samples(samples)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("radius must be finite and >= 0, got {r}")));
    }
    let sampler = RadialSampler::new(kernel)?;
    let est = SphereEstimator::Auto.resolve(n);
    let nu = n as usize;
    Ok(sharded(samples, seed, |rng| {
        loop {
            let s = sampler.sample(rng);
            let t = sampler.sample(rng);
            if n >= 2 && r == 0.0 && s == 0.0 && t == 0.0 {
                continue;
            }
            return green(n, sphere_draw(nu, r, s, t, est, rng));
        }
    }))
}

/// Monte-Carlo estimate of the autocorrelation ∫ ω(|x − y|) ω(|y|) dⁿy at |x| = r.
pub fn mc_autocorrelation(kernel: &RadialKernel, r: f64, samples: u64, seed: u64) -> Result<OracleEstimate> {
    let n = kernel.n();
    check_mc_dimension(n)?;
    check_samples(samples)?;
    let sampler = RadialSampler::new(kernel)?;
    let nu = n as usize;
    Ok(sharded(samples, seed, |rng| {
        let rho = sampler.sample(rng);
        let mut y = [0.0; MAX_MC_DIMENSION];
        unit_vector(rng, &mut y[..nu]);
        let mut d2 = 0.0;
        for i in 0..nu {
            let di = if i == 0 { r } else { 0.0 } - rho * y[i];
            d2 += di * di;
        }
        kernel.omega(d2.sqrt())
    }))
}

/// Adaptive quadrature of `f` on [a, b] as an oracle estimate.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<OracleEstimate> {
    if !(a < b) {
        return Err(Error::invalid(format!("adaptive_quad needs a < b, got [{a}, {b}]")));
    }
    if !(tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    let q = integrate_with_breaks(f, &[a, b], QuadOptions::absolute(tol).with_budget(20_000))?;
    Ok(OracleEstimate {
        value: q.value,
        error: q.error,
        count: q.subdivisions as u64,
        seed: None,
    })
}

/// k_n(r, s, t) by nested quadrature over the two polar angles, n ≥ 2.
///
/// Both polar angles carry the density `sin^{n−2} φ / ∫₀^π sin^{n−2}`; the
/// inner angle is measured from the direction of `x + sŷ`.
pub fn quad_double_sphere(n: u32, r: f64, s: f64, t: f64, tol: f64) -> Result<OracleEstimate> {
    check_dimension(n)?;
    if n < 2 {
        return Err(Error::invalid("angular quadrature needs n >= 2"));
    }
    crate::sphere_kernel::SphereTriple::new(r, s, t)?;
    // ∫₀^π sin^{n−2} φ dφ = 2^{n−2} B_n(1)
    let angular = 2f64.powi(n as i32 - 2) * sym_beta_trig(n, 1.0, 0.0);
    let weight = move |phi: f64| phi.sin().powi(n as i32 - 2) / angular;
    let inner_tol = 0.1 * tol;
    let failure = std::cell::RefCell::new(None::<Error>);
    let max_inner = std::cell::Cell::new(0.0f64);
    let outer = |alpha: f64| {
        let half = (0.5 * alpha).cos();
        // |x + sŷ|² = (r + s)² − 4 r s sin²(α/2)
        let w = ((r - s) * (r - s) + 4.0 * r * s * half * half).sqrt();
        let f = |beta: f64| {
            let c = (0.5 * beta).cos();
            let d = ((w - t) * (w - t) + 4.0 * w * t * c * c).sqrt();
            weight(beta) * green(n, d)
        };
        match integrate_with_breaks(f, &[0.0, std::f64::consts::PI], QuadOptions::absolute(inner_tol).with_budget(4000)) {
            Ok(q) => {
                max_inner.set(max_inner.get().max(q.error));
                weight(alpha) * q.value
            }
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let mut pts = vec![0.0, std::f64::consts::PI];
    if r > 0.0 && s > 0.0 {
        // |x + sŷ| = t
        let v = (t * t - (r - s) * (r - s)) / (4.0 * r * s);
        if v > 0.0 && v < 1.0 {
            pts.push(2.0 * v.sqrt().acos());
        }
    }
    pts.sort_by(f64::total_cmp);
    let q = integrate_with_breaks(outer, &pts, QuadOptions::absolute(0.5 * tol).with_budget(4000));
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let q = q?;
    Ok(OracleEstimate {
        value: q.value,
        error: q.error + max_inner.get(),
        count: q.subdivisions as u64,
        seed: None,
    })
}

/// Five-point finite-difference approximation of
/// `A_n g = −g'' − (n−1) g'/r` at r with step h.
pub fn fd_radial_laplacian<G: Fn(f64) -> f64>(g: G, n: u32, r: f64, h: f64) -> Result<f64> {
    check_dimension(n)?;
    if !(h > 0.0 && r > 2.0 * h) {
        return Err(Error::invalid(format!("need r > 2h > 0, got r = {r}, h = {h}")));
    }
    let (m2, m1, c, p1, p2) = (g(r - 2.0 * h), g(r - h), g(r), g(r + h), g(r + 2.0 * h));
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    let d2 = (-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h);
    Ok(-d2 - (n as f64 - 1.0) * d1 / r)
}

/// Five-point central first derivative.
pub fn fd_derivative<G: Fn(f64) -> f64>(g: G, r: f64, h: f64) -> f64 {
    (g(r - 2.0 * h) - 8.0 * g(r - h) + 8.0 * g(r + h) - g(r + 2.0 * h)) / (12.0 * h)
}
