//! Acceptance criteria 1–8. Every test prints exactly one
//! `criterion N: PASS|FAIL ...` line and then asserts on the same outcome.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use avgreen::averaging::{
    derivative_endpoints, laplacian_at_zero, laplacian_profile, normalize, value_at_zero_i1, value_at_zero_i2,
    RadialKernel,
};
use avgreen::case_studies::{
    exp3d_alpha_c, exp3d_green, exp3d_omega_l2_norm, exp3d_phi, exp3d_psi, printed_sphere_limit_value_at_zero,
    sphere_limit_value_at_zero, theta, upsilon_hat, ExpKernel3D,
};
use avgreen::averaging::averaged_green;
use avgreen::greens::fundamental_solution;
use avgreen::oracles::{fd_radial_laplacian, mc_double_sphere, quad_double_sphere};
use avgreen::quadrature::{integrate, QuadOptions};
use avgreen::sphere_kernel::{four_point_average, gluing_residuals, k, k_laplacian, printed_g1, SphereTriple};
use avgreen::specfun::unit_sphere_area;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, pass: bool, started: Instant, limit: Duration, detail: &str) {
    let elapsed = started.elapsed();
    let in_time = elapsed <= limit;
    let verdict = if pass && in_time { "PASS" } else { "FAIL" };
    // through the raw handle so the line survives the harness's output capture
    let mut out = std::io::stdout().lock();
    writeln!(out, "criterion {id}: {verdict} ({:.1}s of {}s) {detail}", elapsed.as_secs_f64(), limit.as_secs())
        .and_then(|_| out.flush())
        .expect("stdout is writable");
    drop(out);
    assert!(pass, "criterion {id} failed: {detail}");
    assert!(in_time, "criterion {id} exceeded its {}s budget", limit.as_secs());
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[test]
fn criterion_1_closed_form_matches_oracles() {
    const SAMPLES: u64 = 1_000_000;
    const SIGMAS: f64 = 3.0;
    const QUAD_TOL: f64 = 1e-6;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_101);
    let (mut worst_z, mut worst_quad) = (0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for n in 1..=6u32 {
        for i in 0..30u64 {
            let s = rng.random_range(0.05..0.5);
            let t = rng.random_range(0.05..0.5);
            let r = rng.random_range(0.01..(s + t + 0.3));
            let exact = k(n, &SphereTriple::new(r, s, t).unwrap()).unwrap();
            let mc = mc_double_sphere(n, r, s, t, SAMPLES, 1000 * n as u64 + i).unwrap();
            let z = mc.z_score(exact);
            worst_z = worst_z.max(z);
            if z > SIGMAS {
                failures.push(format!("n={n} (r,s,t)=({r:.4},{s:.4},{t:.4}) z={z:.2}"));
            }
            if n == 2 || n == 3 {
                let q = quad_double_sphere(n, r, s, t, 1e-9).unwrap();
                let d = (q.value - exact).abs();
                worst_quad = worst_quad.max(d);
                if d > QUAD_TOL {
                    failures.push(format!("n={n} (r,s,t)=({r:.4},{s:.4},{t:.4}) quad diff {d:e}"));
                }
            }
        }
    }
    let detail = format!(
        "max z = {worst_z:.2} (limit {SIGMAS}), max |k - quad| = {worst_quad:.2e} (limit {QUAD_TOL:e}) {failures:?}"
    );
    report(1, failures.is_empty(), started, Duration::from_secs(300), &detail);
}

#[test]
fn criterion_2_gluing_identities() {
    const TOL: f64 = 1e-9;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for n in 2..=8u32 {
        for i in 0..20 {
            let s = rng.random_range(0.01..0.5);
            let t = if i % 4 == 0 { s } else { rng.random_range(0.01..0.5) };
            let (inner, outer) = gluing_residuals(n, s, t).unwrap();
            worst = worst.max(inner.abs()).max(outer.abs());
        }
    }
    report(2, worst <= TOL, started, Duration::from_secs(60), &format!("max residual {worst:.2e} (limit {TOL:e})"));
}

#[test]
fn criterion_3_delta_mass() {
    const TOL: f64 = 1e-7;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for n in 2..=6u32 {
        let area = unit_sphere_area(n).unwrap();
        for i in 0..5 {
            let s: f64 = rng.random_range(0.05..0.5);
            let t = if i == 0 { s } else { rng.random_range(0.05..0.5) };
            let (a, b) = ((t - s).abs(), t + s);
            // r = (a+b)/2 − (b−a)/2·cos φ maps the open shell onto (0, π) and
            // absorbs the inverse square-root behaviour at both edges
            let f = |phi: f64| {
                let r = 0.5 * (a + b) - 0.5 * (b - a) * phi.cos();
                let dr = 0.5 * (b - a) * phi.sin();
                area * r.powi(n as i32 - 1) * k_laplacian(n, &SphereTriple::new(r, s, t).unwrap()).unwrap() * dr
            };
            let q = integrate(f, 0.0, PI, QuadOptions::absolute(1e-11).with_budget(20_000)).unwrap();
            worst = worst.max((q.value - 1.0).abs());
        }
    }
    report(3, worst <= TOL, started, Duration::from_secs(60), &format!("max |mass - 1| {worst:.2e} (limit {TOL:e})"));
}

#[test]
fn criterion_4_functional_identities() {
    const TOL: f64 = 1e-7;
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst_i = 0.0f64;
    let mut worst_d = 0.0f64;
    let mut worst_l = 0.0f64;
    let dims = [1u32, 3, 4, 5];
    for i in 0..20 {
        let n = dims[i % 4];
        let nu = rng.random_range(0.5..2.5);
        let coeffs: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..2.0)).collect();
        let kern = normalize(&RadialKernel::polynomial(n, nu, &coeffs).unwrap()).unwrap();
        let i1 = value_at_zero_i1(&kern).unwrap();
        let i2 = value_at_zero_i2(&kern).unwrap();
        worst_i = worst_i.max((i1 - i2).abs());

        let area = unit_sphere_area(n).unwrap();
        worst_d = worst_d.max(derivative_endpoints(&kern, 0.0).unwrap().abs());
        for r in [1.0f64, 1.5] {
            let expect = -r.powi(1 - n as i32) / area;
            worst_d = worst_d.max((derivative_endpoints(&kern, r).unwrap() - expect).abs());
        }

        let l0 = laplacian_at_zero(&kern).unwrap();
        let near0 = laplacian_profile(&kern, 1e-9, 1e-10).unwrap();
        worst_l = worst_l.max((near0 - l0).abs() / (1.0 + l0));
        for r in [1.0, 1.5] {
            worst_l = worst_l.max(laplacian_profile(&kern, r, 1e-10).unwrap().abs());
        }
    }

    let mut sandwich_ok = true;
    let mut sandwich = Vec::new();
    for i in 0..10 {
        let n = 1 + (i % 5) as u32;
        let eps = rng.random_range(0.05..0.45);
        let nu = rng.random_range(-2.0..2.0);
        let p = rng.random_range(0.0..3.0);
        let kern = normalize(&RadialKernel::power(n, nu, p, eps).unwrap()).unwrap();
        let v = value_at_zero_i2(&kern).unwrap();
        let lo = fundamental_solution(n, 0.5).unwrap();
        let hi = fundamental_solution(n, eps).unwrap();
        let ok = lo <= v && v <= hi;
        sandwich_ok &= ok;
        if !ok {
            sandwich.push(format!("n={n} eps={eps:.3}: {lo} <= {v} <= {hi} fails"));
        }
    }
    let pass = worst_i <= TOL && worst_d <= TOL && worst_l <= TOL && sandwich_ok;
    let detail = format!(
        "max |I1-I2| {worst_i:.2e}, derivative endpoints {worst_d:.2e}, Laplacian endpoints {worst_l:.2e} \
         (limit {TOL:e}); sandwich {} {sandwich:?}",
        if sandwich_ok { "holds for 10 gap kernels" } else { "violated" }
    );
    report(4, pass, started, Duration::from_secs(120), &detail);
}

#[test]
fn criterion_5_sphere_limit() {
    const SLOPE: f64 = -2.0;
    const SLOPE_TOL: f64 = 0.1;
    const LIMIT_TOL: f64 = 1e-4;
    let started = Instant::now();
    let ks = [10u32, 100, 1000, 10_000];
    let target = 1.0 / (2.0 * PI);
    let values: Vec<f64> = ks.iter().map(|&k| sphere_limit_value_at_zero(3, k).unwrap()).collect();
    let gaps: Vec<f64> = values.iter().map(|v| v - target).collect();
    let lx: Vec<f64> = ks.iter().map(|&k| (k as f64).ln()).collect();
    let ly: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    let fitted = slope(&lx, &ly);
    // v(k) = L + C k^p through the two largest k
    let (k3, k4) = (ks[2] as f64, ks[3] as f64);
    let c = (values[2] - values[3]) / (k3.powf(fitted) - k4.powf(fitted));
    let limit = values[3] - c * k4.powf(fitted);
    let printed: Vec<f64> = ks
        .iter()
        .map(|&k| (printed_sphere_limit_value_at_zero(3, k).unwrap() - target).ln())
        .collect();
    let printed_slope = slope(&lx, &printed);
    let pass = (fitted - SLOPE).abs() <= SLOPE_TOL && (limit - target).abs() <= LIMIT_TOL;
    let detail = format!(
        "gaps {}, slope {fitted:.3} (need {SLOPE}±{SLOPE_TOL}), extrapolated limit {limit:.10} \
         vs 1/(2π) {target:.10} (limit {LIMIT_TOL:e}); printed display without k² has slope {printed_slope:.3}",
        gaps.iter().map(|g| format!("{g:.4e}")).collect::<Vec<_>>().join(", ")
    );
    report(5, pass, started, Duration::from_secs(60), &detail);
}

#[test]
fn criterion_6_exponential_family() {
    const TOL: f64 = 1e-6;
    const PHI100_REL: f64 = 1e-2;
    const ALPHA_C: f64 = 3.72;
    const ALPHA_C_TOL: f64 = 0.01;
    let started = Instant::now();
    let mut worst = 0.0f64;
    for alpha in [-5.0, -1.0, 1.0, 3.72, 10.0] {
        let kern = ExpKernel3D::new(alpha).unwrap().radial_kernel().unwrap();
        for i in 0..20 {
            let r = 1.25 * (i as f64 + 0.5) / 20.0;
            let quad = averaged_green(&kern, r, 1e-9).unwrap().value;
            worst = worst.max((exp3d_green(alpha, r).unwrap() - quad).abs());
        }
    }
    let grid: Vec<f64> = (0..50).map(|i| -10.0 + 30.0 * i as f64 / 49.0).collect();
    let phis: Vec<f64> = grid.iter().map(|&a| exp3d_phi(a).unwrap()).collect();
    let decreasing = phis.windows(2).all(|w| w[1] < w[0]);
    let phi100 = exp3d_phi(100.0).unwrap();
    let rel100 = (phi100 * 2.0 * PI - 1.0).abs();
    let ac = exp3d_alpha_c().unwrap();
    let pass = worst <= TOL && decreasing && rel100 <= PHI100_REL && (ac - ALPHA_C).abs() <= ALPHA_C_TOL;
    let detail = format!(
        "max |closed - quadrature| {worst:.2e} (limit {TOL:e}), φ decreasing on grid: {decreasing}, \
         φ_100·2π - 1 = {rel100:.3e} (limit {PHI100_REL:e}), α_c = {ac:.6} (need {ALPHA_C}±{ALPHA_C_TOL})"
    );
    report(6, pass, started, Duration::from_secs(180), &detail);
}

#[test]
fn criterion_7_theta_functionals() {
    const TOL: f64 = 1e-6;
    const MAX_SLOPE: f64 = -0.4;
    const UPS0_TOL: f64 = 1e-8;
    const UPS_100_2: f64 = 0.05;
    let started = Instant::now();
    let alphas = [5.0, 20.0, 80.0, 320.0];
    let thetas: Vec<f64> = alphas.iter().map(|&a| theta(1, a, TOL).unwrap().value).collect();
    let mags: Vec<f64> = thetas.iter().map(|t| t.abs()).collect();
    let decreasing = mags.windows(2).all(|w| w[1] < w[0]);
    let lx: Vec<f64> = alphas.iter().map(|a| a.ln()).collect();
    let ly: Vec<f64> = mags.iter().map(|m| m.ln()).collect();
    let fitted = slope(&lx, &ly);
    let ups0 = alphas
        .iter()
        .map(|&a| (upsilon_hat(a, 0.0, 1e-12).unwrap() - 1.0).abs())
        .fold(0.0, f64::max);
    let u100 = upsilon_hat(100.0, 2.0, 1e-12).unwrap();
    let pass = decreasing && fitted <= MAX_SLOPE && ups0 <= UPS0_TOL && u100 <= UPS_100_2;
    let detail = format!(
        "θ_1 at α={alphas:?}: {thetas:.6?}, magnitudes decreasing: {decreasing}, \
         slope {fitted:.3} (need <= {MAX_SLOPE}), max |υ̂(α,0) - 1| {ups0:.1e}, υ̂(100,2) = {u100:.5}"
    );
    report(7, pass, started, Duration::from_secs(600), &detail);
}

#[test]
fn criterion_8_misprint_witnesses() {
    let started = Instant::now();

    // shell function for n = 1: the printed (r − t − s)/2 against the
    // four-point average, at the inner shell edge r = |t − s|
    let (s, t) = (0.2, 0.35);
    let a = t - s;
    let inner = fundamental_solution(1, t).unwrap();
    let shell_printed = fundamental_solution(1, t + s).unwrap() + printed_g1(a, s, t);
    let shell_avg = four_point_average(a, s, t);
    let jump_printed = (shell_printed - inner).abs();
    let jump_avg = (shell_avg - inner).abs();
    let g1_flag = jump_printed > 1e-3 && jump_avg < 1e-14;
    println!("FLAG g1: printed shell branch jumps by {jump_printed:.6} at r = |t-s|; four-point average jumps by {jump_avg:.1e}");

    // sign of the shell Laplacian: −Δk by finite differences is positive and
    // matches the nonnegative formula; its shell integral is +1
    let (n, s, t, r) = (3u32, 0.3, 0.25, 0.4);
    let formula = k_laplacian(n, &SphereTriple::new(r, s, t).unwrap()).unwrap();
    let fd = fd_radial_laplacian(|x| k(n, &SphereTriple::new(x, s, t).unwrap()).unwrap(), n, r, 1e-3).unwrap();
    let area = unit_sphere_area(n).unwrap();
    let mass = integrate(
        |x: f64| area * x * x * k_laplacian(n, &SphereTriple::new(x, s, t).unwrap()).unwrap(),
        (t - s).abs(),
        t + s,
        QuadOptions::absolute(1e-12),
    )
    .unwrap()
    .value;
    let sign_flag = formula > 0.0 && fd > 0.0 && (fd - formula).abs() < 1e-6 * formula && (mass - 1.0).abs() < 1e-9;
    println!("FLAG sign: A_3 k at (r,s,t)=({r},{s},{t}) is {formula:.10} (finite difference {fd:.10}), shell mass {mass:.12}; a negative sign would give mass -1");

    // ψ_α against the L² norm of ω_α
    let alpha = 2.0;
    let psi = exp3d_psi(alpha).unwrap();
    let norm = exp3d_omega_l2_norm(alpha).unwrap();
    let psi_flag = (psi - norm * norm).abs() < 1e-10 * psi && (psi - norm).abs() > 0.1 * psi;
    println!("FLAG psi: ψ_2 = {psi:.12}, ||ω_2||² = {:.12}, ||ω_2|| = {norm:.12}", norm * norm);

    let pass = g1_flag && sign_flag && psi_flag;
    let detail = format!("g1 flagged: {g1_flag}, Laplacian sign flagged: {sign_flag}, ψ square flagged: {psi_flag}");
    report(8, pass, started, Duration::from_secs(60), &detail);
}
