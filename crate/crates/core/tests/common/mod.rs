#![allow(dead_code)]

use uistop::ModelParams;

pub fn example(sigma: f64) -> ModelParams {
    ModelParams {
        r: 0.0004,
        lambda0: 0.01,
        mu: 0.0004,
        sigma,
        premium: 9000.0,
        beta: 30.0,
        x: 346.0,
        mortality: None,
    }
}

/// Volatile wage: the threshold may never be reached.
pub fn example_51() -> ModelParams {
    example(0.04)
}

/// Calm wage: the threshold is reached with certainty.
pub fn example_52() -> ModelParams {
    example(0.02)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

use rand::Rng;
use uistop::model;

/// A random parameter set satisfying the finiteness condition, with
/// moderate exponents so that powers stay well inside double range.
pub fn random_params<R: Rng>(rng: &mut R) -> ModelParams {
    let r = rng.random_range(0.0..0.002);
    let lambda0 = rng.random_range(0.002..0.05);
    let sigma = rng.random_range(0.01..0.08);
    let r_tilde = r + lambda0;
    let mu = rng.random_range(-0.002..0.9 * r_tilde);
    let beta = rng.random_range(5.0..60.0);
    let premium = rng.random_range(500.0..20000.0);
    let mut p = ModelParams { r, lambda0, mu, sigma, premium, beta, x: 1.0, mortality: None };
    let b_star = model::solve(&p).unwrap().b_star;
    p.x = b_star * rng.random_range(0.3..1.5);
    p
}

/// Checks the free-boundary conditions of the solution by finite
/// differences: the ODE below the threshold, value matching and smooth fit
/// at it, and the supermartingale inequality above it.
pub fn free_boundary_checks(p: &ModelParams) -> Result<(), String> {
    let s = model::solve(p).map_err(|e| e.to_string())?;
    let d = s.derived;
    let b = s.b_star;
    let v = |x: f64| s.value(x);
    let half_s2 = 0.5 * p.sigma * p.sigma;
    let generator = |x: f64, h: f64| {
        let d1 = (v(x + h) - v(x - h)) / (2.0 * h);
        let d2 = (v(x + h) - 2.0 * v(x) + v(x - h)) / (h * h);
        p.mu * x * d1 + half_s2 * x * x * d2 - d.r_tilde * v(x)
    };
    for i in 0..50 {
        let x = b * (0.1 + 0.89 * i as f64 / 49.0);
        let h = 1e-4 * x / d.q_star;
        let res = generator(x, h);
        if res.abs() > 1e-4 * d.r_tilde * v(x) {
            return Err(format!("ODE residual {res:e} at x = {x} (v = {})", v(x)));
        }
    }
    let g = d.beta1 * b - p.premium;
    if (v(b) - g).abs() > 1e-10 * g.abs() {
        return Err(format!("value matching: v(b*) = {} vs g(b*) = {g}", v(b)));
    }
    let h = 1e-6 * b;
    let slope = (v(b + h) - v(b - h)) / (2.0 * h);
    if (slope - d.beta1).abs() > 1e-4 * d.beta1 {
        return Err(format!("smooth fit: v'(b*) = {slope} vs beta1 = {}", d.beta1));
    }
    for i in 1..=50 {
        let x = b * (1.0 + 2.0 * i as f64 / 50.0);
        let h = 1e-4 * x;
        let res = generator(x, h);
        if res > 1e-9 * d.r_tilde * v(x).abs() {
            return Err(format!("stopping region: Lv - r~v = {res:e} > 0 at x = {x}"));
        }
    }
    Ok(())
}
