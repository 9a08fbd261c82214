//! Comparative statics of the solution in the drift `μ` and the job-loss
//! rate `λ0`: analytic derivatives, edge limits, the critical rate `λ*`
//! and level curves over the `(λ0, μ)` plane.
//!
//! Everything here uses the no-mortality parameterisation, where
//! `b* = P(½σ²q* + r̃)/(βλ0)` and `v = P(x/b*)^{q*}/(q* − 1)` below the
//! threshold.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{ModelError, Result};
use crate::model::{self, ModelParams};

fn check_no_mortality(params: &ModelParams) -> Result<()> {
    if params.mortality.is_some_and(|m| m.lambda2 != 0.0) {
        return Err(ModelError::Config(
            "sensitivity analysis is defined for the model without mortality".into(),
        ));
    }
    Ok(())
}

/// Changes of the derivatives' targets under a small parameter move,
/// linearised: `Δb = (∂b/∂μ)·Δμ` and so on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Increments {
    pub d_mu: f64,
    pub d_lambda0: f64,
    pub db_mu: f64,
    pub dv_mu: f64,
    pub db_lambda0: f64,
    pub dv_lambda0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SensitivityReport {
    pub dq_dmu: f64,
    pub dq_dlambda0: f64,
    pub db_dmu: f64,
    pub db_dlambda0: f64,
    pub dv_dmu: f64,
    pub dv_dlambda0: f64,
    /// Linearised changes for a 1% move of `μ` and of `λ0`.
    pub increments: Increments,
}

/// Analytic partial derivatives of `q*`, `b*` and `v(x)` in `μ` and `λ0`.
pub fn derivatives(params: &ModelParams, x: f64) -> Result<SensitivityReport> {
    derivatives_with_step(params, x, 0.01)
}

/// As [`derivatives`], with increments for a relative move `rel`.
pub fn derivatives_with_step(params: &ModelParams, x: f64, rel: f64) -> Result<SensitivityReport> {
    check_no_mortality(params)?;
    if !(x >= 0.0) {
        return Err(ModelError::domain("x", x, "must be non-negative"));
    }
    let d = model::derive(params)?;
    let b = model::optimal_threshold(&d, params.premium)?;
    let (p, beta, lambda0, r, mu) = (params.premium, params.beta, params.lambda0, params.r, params.mu);
    let q = d.q_star;
    let half_s2 = 0.5 * params.sigma * params.sigma;
    let denom = half_s2 * q * q + d.r_tilde;

    let dq_dmu = -q * q / denom;
    let dq_dlambda0 = q / denom;
    let db_dmu = p * half_s2 / (beta * lambda0) * dq_dmu;
    let db_dlambda0 =
        -p * (half_s2 * q + r) / (beta * lambda0 * lambda0) + p * half_s2 / (beta * lambda0) * dq_dlambda0;

    let (dv_dmu, dv_dlambda0) = if x < b {
        let power = model::ratio_power(x, b, q);
        let dv_dq = -p / ((q - 1.0) * (q - 1.0)) * power * (1.0 + (q - 1.0) * (b / x).ln());
        let dv_db = -p * q / ((q - 1.0) * b) * power;
        (
            dv_dq * dq_dmu + dv_db * db_dmu,
            dv_dq * dq_dlambda0 + dv_db * db_dlambda0,
        )
    } else {
        let gap = d.r_tilde - mu;
        (
            beta * lambda0 * x / (gap * gap),
            beta * x * (r - mu) / (gap * gap),
        )
    };

    let d_mu = rel * mu;
    let d_lambda0 = rel * lambda0;
    Ok(SensitivityReport {
        dq_dmu,
        dq_dlambda0,
        db_dmu,
        db_dlambda0,
        dv_dmu,
        dv_dlambda0,
        increments: Increments {
            d_mu,
            d_lambda0,
            db_mu: db_dmu * d_mu,
            dv_mu: dv_dmu * d_mu,
            db_lambda0: db_dlambda0 * d_lambda0,
            dv_lambda0: dv_dlambda0 * d_lambda0,
        },
    })
}

/// `q*`, `b*` and `v(x)` at a parameter edge. Infinity marks divergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Limit {
    pub edge: &'static str,
    pub q_star: f64,
    pub b_star: f64,
    pub value: f64,
}

/// Limits of the solution at the edges of the admissible `(λ0, μ)` region.
/// The last entry depends on the sign of `μ − r`: for `μ < r` it is
/// `λ0 → 0`, otherwise `λ0 ↓ μ − r`, where `r̃ − μ` vanishes.
pub fn limits(params: &ModelParams, x: f64) -> Result<Vec<Limit>> {
    check_no_mortality(params)?;
    model::derive(params)?;
    let (p, beta, r, mu, lambda0) = (params.premium, params.beta, params.r, params.mu, params.lambda0);
    let half_s2 = 0.5 * params.sigma * params.sigma;
    let inf = f64::INFINITY;

    let mut out = vec![
        Limit { edge: "mu -> -inf", q_star: inf, b_star: inf, value: 0.0 },
        Limit {
            edge: "mu -> r + lambda0",
            q_star: 1.0,
            b_star: p * (half_s2 + r + lambda0) / (beta * lambda0),
            value: inf,
        },
        Limit {
            edge: "lambda0 -> inf",
            q_star: inf,
            b_star: p / beta,
            value: (beta * x - p).max(0.0),
        },
    ];
    if mu < r {
        out.push(Limit {
            edge: "lambda0 -> 0",
            q_star: model::positive_root(mu, params.sigma, r),
            b_star: inf,
            value: 0.0,
        });
    } else if mu == r {
        out.push(Limit { edge: "lambda0 -> 0", q_star: 1.0, b_star: inf, value: beta * x });
    } else {
        out.push(Limit {
            edge: "lambda0 -> mu - r",
            q_star: 1.0,
            b_star: p * (half_s2 + mu) / (beta * (mu - r)),
            value: inf,
        });
    }
    Ok(out)
}

fn threshold_at(params: &ModelParams, lambda0: f64) -> Result<f64> {
    let p = ModelParams { lambda0, ..params.clone() };
    let d = model::derive(&p)?;
    model::optimal_threshold(&d, p.premium)
}

/// The job-loss rate at which `b*` equals the wage `x`: above it the
/// worker should buy at once. Infinite when `x ≤ P/β`, since `b*` never
/// falls below `P/β`; the lower edge of the admissible range when `b*`
/// is already below `x` there.
pub fn lambda_star(params: &ModelParams, x: f64) -> Result<f64> {
    check_no_mortality(params)?;
    if !(x > 0.0) {
        return Err(ModelError::domain("x", x, "must be positive"));
    }
    if !(params.sigma > 0.0) {
        return Err(ModelError::DegenerateSigma);
    }
    if params.beta * x <= params.premium {
        return Ok(f64::INFINITY);
    }
    let floor = (params.mu - params.r).max(0.0);
    let mut lo = floor + 1e-9 * params.r.abs().max(params.mu.abs()).max(1e-12);
    if threshold_at(params, lo)? <= x {
        return Ok(floor);
    }
    let mut hi = (2.0 * lo).max(1e-3);
    while threshold_at(params, hi)? > x {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if threshold_at(params, mid)? > x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `λ*` for `μ = r` in closed form: with `q = βx/(βx − P)` the quadratic
/// gives `λ* = (q − 1)(½σ²q + r)`.
pub fn lambda_star_equal_rates(params: &ModelParams, x: f64) -> Result<f64> {
    if params.mu != params.r {
        return Err(ModelError::domain("mu", params.mu, "must equal r"));
    }
    let gap = params.beta * x - params.premium;
    if gap <= 0.0 {
        return Ok(f64::INFINITY);
    }
    let half_s2 = 0.5 * params.sigma * params.sigma;
    Ok(params.premium / gap * (half_s2 * params.beta * x / gap + params.r))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    BStar,
    Value,
}

/// Rectangle of the `(λ0, μ)` plane and the grid resolution used on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lambda0: (f64, f64),
    pub mu: (f64, f64),
    pub n: usize,
}

impl Window {
    pub fn new(lambda0: (f64, f64), mu: (f64, f64)) -> Self {
        Window { lambda0, mu, n: 400 }
    }

    fn validate(&self) -> Result<()> {
        let (l0, l1) = self.lambda0;
        let (m0, m1) = self.mu;
        if !(l0 > 0.0 && l1 > l0 && l1.is_finite()) {
            return Err(ModelError::domain("lambda0 window", l0, "needs 0 < min < max"));
        }
        if !(m1 > m0 && m0.is_finite() && m1.is_finite()) {
            return Err(ModelError::domain("mu window", m0, "needs min < max"));
        }
        if self.n < 2 {
            return Err(ModelError::domain("n", self.n as f64, "needs at least two grid lines"));
        }
        Ok(())
    }

    fn lambda0_at(&self, i: usize) -> f64 {
        self.lambda0.0 + (self.lambda0.1 - self.lambda0.0) * i as f64 / (self.n - 1) as f64
    }

    fn mu_at(&self, j: usize) -> f64 {
        self.mu.0 + (self.mu.1 - self.mu.0) * j as f64 / (self.n - 1) as f64
    }
}

/// `b*` or `v(x)` at `(λ0, μ)`; NaN outside the admissible region.
pub fn target_at(params: &ModelParams, target: Target, lambda0: f64, mu: f64) -> f64 {
    let p = ModelParams { lambda0, mu, ..params.clone() };
    match model::solve(&p) {
        Ok(s) => match target {
            Target::BStar => s.b_star,
            Target::Value => s.value(p.x),
        },
        Err(_) => f64::NAN,
    }
}

/// Points of the level curve `target(λ0, μ) = level` inside the window,
/// sorted by `λ0`. Sign changes along grid edges are located by linear
/// interpolation and polished by bisection along the edge.
pub fn isolines(params: &ModelParams, window: &Window, level: f64, target: Target) -> Result<Vec<(f64, f64)>> {
    check_no_mortality(params)?;
    window.validate()?;
    if !(level > 0.0) || !level.is_finite() {
        return Err(ModelError::domain("level", level, "must be positive"));
    }
    let n = window.n;
    let f = |l: f64, m: f64| target_at(params, target, l, m) - level;
    let grid: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| f(window.lambda0_at(k / n), window.mu_at(k % n)))
        .collect();
    let at = |i: usize, j: usize| grid[i * n + j];

    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i + 1 < n {
                edges.push(((i, j), (i + 1, j)));
            }
            if j + 1 < n {
                edges.push(((i, j), (i, j + 1)));
            }
        }
    }
    let mut points: Vec<(f64, f64)> = edges
        .par_iter()
        .filter_map(|&((i0, j0), (i1, j1))| {
            let (f0, f1) = (at(i0, j0), at(i1, j1));
            if f0.is_nan() || f1.is_nan() || (f0 > 0.0) == (f1 > 0.0) {
                return None;
            }
            let p0 = (window.lambda0_at(i0), window.mu_at(j0));
            let p1 = (window.lambda0_at(i1), window.mu_at(j1));
            refine_edge(&f, p0, p1, f0, f1, 1e-7 * level)
        })
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Ok(points)
}

fn refine_edge<F: Fn(f64, f64) -> f64>(
    f: &F,
    p0: (f64, f64),
    p1: (f64, f64),
    f0: f64,
    f1: f64,
    tol: f64,
) -> Option<(f64, f64)> {
    let point = |s: f64| (p0.0 + s * (p1.0 - p0.0), p0.1 + s * (p1.1 - p0.1));
    let (mut lo, mut hi) = (0.0, 1.0);
    let (mut flo, mut fhi) = (f0, f1);
    let mut s = f0 / (f0 - f1);
    for _ in 0..200 {
        let (l, m) = point(s);
        let fs = f(l, m);
        if fs.is_nan() {
            return None;
        }
        if fs.abs() <= tol {
            return Some((l, m));
        }
        if (fs > 0.0) == (flo > 0.0) {
            lo = s;
            flo = fs;
        } else {
            hi = s;
            fhi = fs;
        }
        // Secant step, falling back to bisection when it stalls at an end.
        let secant = lo + (hi - lo) * flo / (flo - fhi);
        s = if secant > lo + 0.01 * (hi - lo) && secant < hi - 0.01 * (hi - lo) {
            secant
        } else {
            0.5 * (lo + hi)
        };
    }
    None
}

/// Number of sign changes of a finite-difference derivative of
/// `λ0 ↦ v(x)` on an `n`-point grid over `lambda0`. Differences at the
/// level of rounding noise, as on the flat stopping branch, are ignored.
pub fn value_lambda0_sign_changes(params: &ModelParams, lambda0: (f64, f64), n: usize) -> Result<usize> {
    check_no_mortality(params)?;
    if n < 3 || !(lambda0.0 > 0.0 && lambda0.1 > lambda0.0) {
        return Err(ModelError::domain("n", n as f64, "needs at least three points in a valid range"));
    }
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let l = lambda0.0 + (lambda0.1 - lambda0.0) * i as f64 / (n - 1) as f64;
            target_at(params, Target::Value, l, params.mu)
        })
        .collect();
    let signs: Vec<bool> = values
        .windows(2)
        .filter(|w| w[0].is_finite() && w[1].is_finite())
        .filter(|w| (w[1] - w[0]).abs() > 1e-9 * w[0].abs().max(w[1].abs()))
        .map(|w| w[1] > w[0])
        .collect();
    Ok(signs.windows(2).filter(|s| s[0] != s[1]).count())
}
