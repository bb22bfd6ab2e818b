//! Globally adaptive Gauss–Kronrod (10/21 point) quadrature.
//!
//! The error estimate and roundoff floor follow QUADPACK's `qk21`. Intervals
//! are refined worst-first until the summed error estimate meets the
//! requested tolerance. Integrable endpoint singularities are handled by
//! bisection depth only: nodes are strictly interior, so the integrand is
//! never evaluated at an interval endpoint.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_208_980_478,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

// Gauss weights for the odd-indexed Kronrod nodes XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Stopping rule and budget for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_subdivisions: 2000,
        }
    }
}

impl QuadOptions {
    pub fn absolute(tol: f64) -> Self {
        QuadOptions {
            abs_tol: tol,
            ..Default::default()
        }
    }

    pub fn relative(tol: f64) -> Self {
        QuadOptions {
            abs_tol: 0.0,
            rel_tol: tol,
            ..Default::default()
        }
    }

    pub fn with_budget(mut self, max_subdivisions: usize) -> Self {
        self.max_subdivisions = max_subdivisions;
        self
    }
}

/// Outcome of a converged quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub subdivisions: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    resabs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = WGK[10] * fc;
    let mut res_g = 0.0;
    let mut resabs = (WGK[10] * fc).abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    if !res_k.is_finite() || !fc.is_finite() {
        return Err(Error::Numerical(format!(
            "non-finite integrand on [{a:e}, {b:e}]"
        )));
    }
    let mean = 0.5 * res_k;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if resasc != 0.0 && error != 0.0 {
        error = resasc * (1.0_f64).min((200.0 * error / resasc).powf(1.5));
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * resabs);
    }
    Ok(Panel {
        a,
        b,
        value,
        error,
        resabs,
    })
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate_with_breaks(f, &[a, b], opts)
}

/// Integrates `f` over `[points[0], points[last]]`, using every interior point
/// as an initial panel boundary. Points must be nondecreasing; repeated
/// points are merged.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    opts: QuadOptions,
) -> Result<QuadResult> {
    if points.len() < 2 {
        return Err(Error::invalid("quadrature needs at least two points"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::invalid("quadrature limits must be finite"));
    }
    if points.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("quadrature break points must be nondecreasing"));
    }
    if !(opts.abs_tol >= 0.0 && opts.rel_tol >= 0.0) || (opts.abs_tol == 0.0 && opts.rel_tol == 0.0)
    {
        return Err(Error::invalid("quadrature tolerance must be positive"));
    }

    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Panel> = Vec::new();
    let mut evaluations = 0usize;
    for w in points.windows(2) {
        if w[1] > w[0] {
            heap.push(gk21(&f, w[0], w[1])?);
            evaluations += 21;
        }
    }
    if heap.is_empty() {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            subdivisions: 0,
            evaluations: 0,
        });
    }

    let mut subdivisions = 0usize;
    loop {
        let (value, error, resabs) = heap
            .iter()
            .chain(frozen.iter())
            .fold((0.0, 0.0, 0.0), |acc, p| {
                (acc.0 + p.value, acc.1 + p.error, acc.2 + p.resabs)
            });
        let target = opts
            .abs_tol
            .max(opts.rel_tol * value.abs())
            .max(50.0 * f64::EPSILON * resabs);
        if error <= target {
            return Ok(QuadResult {
                value,
                error,
                subdivisions,
                evaluations,
            });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => {
                return Err(Error::Quadrature {
                    estimate: value,
                    error_bound: error,
                    subdivisions,
                })
            }
        };
        if subdivisions >= opts.max_subdivisions {
            heap.push(worst);
            return Err(Error::Quadrature {
                estimate: value,
                error_bound: error,
                subdivisions,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        let scale = worst.a.abs().max(worst.b.abs());
        if mid <= worst.a || mid >= worst.b || worst.b - worst.a < 1000.0 * f64::EPSILON * scale {
            frozen.push(worst);
            continue;
        }
        heap.push(gk21(&f, worst.a, mid)?);
        heap.push(gk21(&f, mid, worst.b)?);
        evaluations += 42;
        subdivisions += 1;
    }
}

/// Fixed-order 21-point Kronrod rule on a single panel, returning `(value, error)`.
pub fn kronrod21<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Result<(f64, f64)> {
    let p = gk21(&f, a, b)?;
    Ok((p.value, p.error))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kronrod_weights_sum_to_two() {
        let s: f64 = WGK[10] + 2.0 * WGK[..10].iter().sum::<f64>();
        assert!((s - 2.0).abs() < 1e-15);
        let g: f64 = 2.0 * WG.iter().sum::<f64>();
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn polynomials_up_to_degree_six_are_exact() {
        for deg in 0..=6 {
            let r = integrate(|x: f64| x.powi(deg), -0.3, 1.7, QuadOptions::absolute(1e-14)).unwrap();
            let exact = (1.7f64.powi(deg + 1) - (-0.3f64).powi(deg + 1)) / (deg + 1) as f64;
            assert!((r.value - exact).abs() < 1e-13, "deg {deg}");
        }
    }

    #[test]
    fn arcsine_density_integrates_to_pi() {
        // singular endpoints are placed at the origin, where doubles are dense
        let r = integrate(
            |p: f64| 1.0 / (p * (1.0 - p)).sqrt(),
            0.0,
            0.5,
            QuadOptions::absolute(1e-11).with_budget(5000),
        )
        .unwrap();
        assert!((2.0 * r.value - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn non_integrable_singularity_exhausts_budget() {
        let e = integrate(|x: f64| 1.0 / x, 0.0, 1.0, QuadOptions::absolute(1e-8).with_budget(300))
            .unwrap_err();
        assert!(matches!(e, Error::Quadrature { .. }));
    }

    #[test]
    fn break_points_split_kinks() {
        let r = integrate_with_breaks(|x: f64| (x - 0.3).abs(), &[0.0, 0.3, 1.0], QuadOptions::absolute(1e-14))
            .unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-14);
        assert_eq!(r.subdivisions, 0);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(integrate(|x: f64| x, 1.0, 0.0, QuadOptions::default()).is_err());
        assert!(integrate(|x: f64| x, 0.0, f64::INFINITY, QuadOptions::default()).is_err());
        assert!(integrate(|x: f64| x, 0.0, 1.0, QuadOptions { abs_tol: 0.0, rel_tol: 0.0, max_subdivisions: 10 }).is_err());
    }
}
