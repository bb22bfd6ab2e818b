//! Special functions: Euler gamma and beta, unit-sphere areas, Bessel J₀/J₁,
//! the symmetric incomplete beta integral, Fresnel integrals and the integral
//! sine/cosine.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Euler gamma function for real arguments (poles at the non-positive
/// integers return NaN). Integer and half-integer arguments are evaluated
/// by exact products; everything else by the Lanczos approximation.
pub fn gamma(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x <= 0.0 && x.fract() == 0.0 {
        return f64::NAN;
    }
    let twice = 2.0 * x;
    if x > 0.0 && twice.fract() == 0.0 && twice <= 340.0 {
        return gamma_half_integer(twice as u32);
    }
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
}

/// Γ(m/2) for a positive integer m.
fn gamma_half_integer(m: u32) -> f64 {
    if m % 2 == 0 {
        (1..m / 2).fold(1.0, |acc, k| acc * k as f64)
    } else {
        // Γ(1/2) = √π, Γ(x + 1) = x Γ(x)
        let mut g = PI.sqrt();
        let mut k = 1;
        while k < m {
            g *= k as f64 / 2.0;
            k += 2;
        }
        g
    }
}

/// Euler beta function B(a, b) = Γ(a)Γ(b)/Γ(a+b) for a, b > 0.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid(format!("beta({a}, {b}) needs positive finite arguments")));
    }
    Ok(gamma(a) * gamma(b) / gamma(a + b))
}

/// Area of the unit sphere in ℝⁿ, S_{n-1} = 2π^{n/2}/Γ(n/2).
pub fn unit_sphere_area(n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::invalid("unit sphere area needs n >= 1"));
    }
    Ok(sphere_area(n))
}

/// Infallible variant for callers that already validated `n >= 1`.
pub(crate) fn sphere_area(n: u32) -> f64 {
    debug_assert!(n >= 1);
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half_integer(n)
}

/// Bessel function of the first kind J_order(x), order 0 or 1, x ≥ 0.
pub fn bessel_j(order: u32, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("bessel_j needs finite x >= 0, got {x}")));
    }
    match order {
        0 => Ok(bessel_j0(x)),
        1 => Ok(bessel_j1(x)),
        _ => Err(Error::invalid(format!("bessel_j supports orders 0 and 1, got {order}"))),
    }
}

/// J₀(x). Even in x; negative arguments are folded.
pub fn bessel_j0(x: f64) -> f64 {
    bessel_j01(x.abs()).0
}

/// J₁(x). Odd in x; negative arguments are folded.
pub fn bessel_j1(x: f64) -> f64 {
    let j1 = bessel_j01(x.abs()).1;
    if x < 0.0 {
        -j1
    } else {
        j1
    }
}

/// (J₀(x), J₁(x)) for x ≥ 0.
pub fn bessel_j01(x: f64) -> (f64, f64) {
    if x < 4.0 {
        bessel_series(x)
    } else if x < 25.0 {
        bessel_miller(x)
    } else {
        bessel_hankel(x)
    }
}

fn bessel_series(x: f64) -> (f64, f64) {
    let q = -0.25 * x * x;
    let mut t0 = 1.0;
    let mut t1 = 0.5 * x;
    let mut j0 = t0;
    let mut j1 = t1;
    for k in 1..60 {
        let k = k as f64;
        t0 *= q / (k * k);
        t1 *= q / (k * (k + 1.0));
        j0 += t0;
        j1 += t1;
        if t0.abs() < 1e-18 * j0.abs().max(1e-300) && t1.abs() < 1e-18 {
            break;
        }
    }
    (j0, j1)
}

// Backward recurrence J_{k-1} = (2k/x) J_k - J_{k+1} from a large even start,
// normalized with J₀ + 2 Σ J_{2k} = 1.
fn bessel_miller(x: f64) -> (f64, f64) {
    let start = x + 10.0 * x.cbrt() + 30.0;
    let m = 2 * ((start as usize) / 2);
    let mut jp1 = 0.0;
    let mut j = 1e-30;
    let mut even_sum = 0.0;
    for k in (1..=m).rev() {
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        let idx = k - 1;
        if idx > 0 && idx % 2 == 0 {
            even_sum += j;
        }
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            even_sum *= 1e-250;
        }
    }
    let norm = j + 2.0 * even_sum;
    (j / norm, jp1 / norm)
}

fn hankel_pq(mu: f64, x: f64) -> (f64, f64) {
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (k as f64 * 8.0 * x);
        if next.abs() >= last || next.abs() < 1e-17 {
            break;
        }
        last = next.abs();
        term = next;
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
    }
    (p, q)
}

fn bessel_hankel(x: f64) -> (f64, f64) {
    let (s, c) = x.sin_cos();
    let amp = (2.0 / (PI * x)).sqrt() * std::f64::consts::FRAC_1_SQRT_2;
    let (p0, q0) = hankel_pq(0.0, x);
    let (p1, q1) = hankel_pq(4.0, x);
    // cos(x - π/4), sin(x - π/4), cos(x - 3π/4), sin(x - 3π/4), each times √2
    let c0 = c + s;
    let s0 = s - c;
    let c1 = s - c;
    let s1 = -s - c;
    (amp * (p0 * c0 - q0 * s0), amp * (p1 * c1 - q1 * s1))
}

/// B_n(x) = ∫₀ˣ (p(1-p))^{(n-3)/2} dp for integer n ≥ 2 and x ∈ [0, 1].
pub fn incomplete_beta_symmetric(n: u32, x: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid(format!("incomplete beta needs n >= 2, got {n}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::invalid(format!("incomplete beta needs x in [0, 1], got {x}")));
    }
    Ok(sym_beta_trig(n, x.sqrt(), (1.0 - x).sqrt()))
}

/// B_n(sin²θ) from (sin θ, cos θ), with both nonnegative.
pub(crate) fn sym_beta_trig(n: u32, sin_t: f64, cos_t: f64) -> f64 {
    let x = sin_t * sin_t;
    if x < 1.0 / 16.0 {
        return sym_beta_series(n, x);
    }
    // p = sin²(ψ/2) turns the integral into 2^{2-n} ∫₀^{2θ} sin^{n-2} ψ dψ
    let theta = sin_t.atan2(cos_t);
    let phi = 2.0 * theta;
    let sin_phi = 2.0 * sin_t * cos_t;
    let cos_phi = cos_t * cos_t - sin_t * sin_t;
    let m = n - 2;
    let mut lo = if m % 2 == 0 { phi } else { 2.0 * x };
    let mut k = if m % 2 == 0 { 2 } else { 3 };
    while k <= m {
        let kf = k as f64;
        lo = -sin_phi.powi(k as i32 - 1) * cos_phi / kf + (kf - 1.0) / kf * lo;
        k += 2;
    }
    lo * 0.5_f64.powi(m as i32)
}

fn sym_beta_series(n: u32, x: f64) -> f64 {
    let a = (n as f64 - 3.0) / 2.0;
    let mut coef = 1.0;
    let mut pow = 1.0;
    let mut sum = 1.0 / (a + 1.0);
    for k in 0..200 {
        let kf = k as f64;
        coef *= (a - kf) / (kf + 1.0);
        pow *= -x;
        let term = coef * pow / (a + kf + 2.0);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() || coef == 0.0 {
            break;
        }
    }
    x.powf(a + 1.0) * sum
}

/// Complete symmetric beta B((n-1)/2, (n-1)/2) = B_n(1).
pub fn complete_beta_symmetric(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid(format!("complete beta needs n >= 2, got {n}")));
    }
    let h = (n as f64 - 1.0) / 2.0;
    beta(h, h)
}

/// Fresnel integrals (C(x), S(x)) = (∫₀ˣ cos(πt²/2) dt, ∫₀ˣ sin(πt²/2) dt).
pub fn fresnel(x: f64) -> Result<(f64, f64)> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("fresnel needs finite x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok((0.0, 0.0));
    }
    if x <= 1.5 {
        return Ok(fresnel_series(x));
    }
    let pix2 = PI * x * x;
    let mut b = Complex64::new(1.0, -pix2);
    let mut cc = Complex64::new(1e300, 0.0);
    let mut d = b.inv();
    let mut h = d;
    let mut n = -1.0;
    for _ in 2..200 {
        n += 2.0;
        let a = -n * (n + 1.0);
        b += Complex64::new(4.0, 0.0);
        d = (d * a + b).inv();
        cc = b + cc.inv() * a;
        let del = cc * d;
        h *= del;
        if (del - 1.0).norm() < 1e-16 {
            break;
        }
    }
    h *= Complex64::new(x, -x);
    let (s, c) = (0.5 * pix2).sin_cos();
    let cs = Complex64::new(0.5, 0.5) * (Complex64::new(1.0, 0.0) - Complex64::new(c, s) * h);
    Ok((cs.re, cs.im))
}

fn fresnel_series(x: f64) -> (f64, f64) {
    let fact = FRAC_PI_2 * x * x;
    let mut c = 0.0;
    let mut s = 0.0;
    let mut term = x;
    for k in 0..100 {
        // term = x (πx²/2)^k / k!, contributes to C for even k and S for odd k
        let denom = (2 * k + 1) as f64;
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            c += sign * term / denom;
        } else {
            s += sign * term / denom;
        }
        term *= fact / (k + 1) as f64;
        if term < 1e-18 {
            break;
        }
    }
    (c, s)
}

/// Shifted integral sine si(x) = Si(x) − π/2 for x ≥ 0.
pub fn si(x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("si needs finite x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(-FRAC_PI_2);
    }
    Ok(cisi(x).0)
}

/// Integral cosine ci(x) = −∫ₓ^∞ cos t / t dt for x > 0.
pub fn ci(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("ci needs finite x > 0, got {x}")));
    }
    Ok(cisi(x).1)
}

/// (si(x), ci(x)) for x > 0.
pub fn si_ci(x: f64) -> Result<(f64, f64)> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::invalid(format!("si_ci needs finite x > 0, got {x}")));
    }
    Ok(cisi(x))
}

fn cisi(x: f64) -> (f64, f64) {
    if x > 2.0 {
        let mut b = Complex64::new(1.0, x);
        let mut c = Complex64::new(1e300, 0.0);
        let mut d = b.inv();
        let mut h = d;
        for i in 2..200 {
            let a = -((i - 1) as f64).powi(2);
            b += Complex64::new(2.0, 0.0);
            d = (d * a + b).inv();
            c = b + c.inv() * a;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 1e-16 {
                break;
            }
        }
        let (s, co) = x.sin_cos();
        let h = Complex64::new(co, -s) * h;
        (h.im, -h.re)
    } else {
        let mut si_sum = 0.0;
        let mut ci_sum = 0.0;
        // term_k = x^k / k!
        let mut term = 1.0;
        for k in 1..60 {
            term *= x / k as f64;
            let sign = if ((k - 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
            if k % 2 == 1 {
                si_sum += sign * term / k as f64;
            } else {
                ci_sum -= sign * term / k as f64;
            }
            if term < 1e-18 {
                break;
            }
        }
        (si_sum - FRAC_PI_2, EULER_GAMMA + x.ln() + ci_sum)
    }
}
