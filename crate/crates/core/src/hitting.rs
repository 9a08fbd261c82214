//! Law of the first time the wage reaches a fixed threshold, and the
//! expected net present value of waiting for it.

use crate::error::{ModelError, Result};
use crate::model::{self, gain, positive_root, ratio_power, DerivedParams, ModelParams};

/// The strategy "buy the first time the wage reaches `b`".
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdPolicy {
    pub b: f64,
    pub params: ModelParams,
    pub derived: DerivedParams,
}

impl ThresholdPolicy {
    pub fn new(params: &ModelParams, b: f64) -> Result<Self> {
        if !(b >= 0.0) {
            return Err(ModelError::domain("b", b, "must be non-negative"));
        }
        Ok(ThresholdPolicy {
            b,
            params: params.clone(),
            derived: model::derive(params)?,
        })
    }

    /// `μ − ½σ²`, the drift of the log-wage.
    pub fn log_drift(&self) -> f64 {
        self.params.mu - 0.5 * self.params.sigma * self.params.sigma
    }

    fn already_hit(&self) -> bool {
        self.params.x >= self.b
    }
}

/// `q1(θ)`, positive root of `½σ²q² + (μ − ½σ²)q − θ = 0`.
pub fn q1(mu: f64, sigma: f64, theta: f64) -> f64 {
    positive_root(mu, sigma, theta)
}

/// `E[e^{-θτ_b}] = (x/b)^{q1(θ)}`.
pub fn laplace_transform(policy: &ThresholdPolicy, theta: f64) -> Result<f64> {
    if !(theta > 0.0) {
        return Err(ModelError::domain("theta", theta, "must be positive"));
    }
    if policy.already_hit() {
        return Ok(1.0);
    }
    let q = q1(policy.params.mu, policy.params.sigma, theta);
    Ok(ratio_power(policy.params.x, policy.b, q))
}

/// `P(τ_b < ∞)`: one when `μ ≥ ½σ²`, else `(x/b)^{1−2μ/σ²}`.
pub fn hit_probability(policy: &ThresholdPolicy) -> f64 {
    if policy.already_hit() || policy.log_drift() >= 0.0 {
        return 1.0;
    }
    let s2 = policy.params.sigma * policy.params.sigma;
    ratio_power(policy.params.x, policy.b, 1.0 - 2.0 * policy.params.mu / s2)
}

/// `E[τ_b] = ln(b/x)/(μ − ½σ²)`, infinite unless the log-drift is positive.
pub fn mean_hitting_time(policy: &ThresholdPolicy) -> f64 {
    if policy.already_hit() {
        return 0.0;
    }
    let a = policy.log_drift();
    if a > 0.0 {
        (policy.b / policy.params.x).ln() / a
    } else {
        f64::INFINITY
    }
}

/// Expected net present value of the threshold strategy:
/// `(β1 b − P)(x/b)^{q*}` for `b ≥ x`, `β1 x − P` otherwise.
pub fn enpv(policy: &ThresholdPolicy) -> f64 {
    enpv_at(&policy.params, &policy.derived, policy.b)
}

pub(crate) fn enpv_at(params: &ModelParams, derived: &DerivedParams, b: f64) -> f64 {
    if b <= params.x {
        gain(params.x, derived, params.premium)
    } else {
        gain(b, derived, params.premium) * ratio_power(params.x, b, derived.q_star)
    }
}

/// Uniform threshold grid with `n` points from `b_min` to `b_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub b_min: f64,
    pub b_max: f64,
    pub n: usize,
}

impl Grid {
    fn validate(&self) -> Result<()> {
        if !(self.b_min >= 0.0) || !self.b_min.is_finite() {
            return Err(ModelError::domain("b_min", self.b_min, "must be finite and non-negative"));
        }
        if !(self.b_max > self.b_min) || !self.b_max.is_finite() {
            return Err(ModelError::domain("b_max", self.b_max, "must be finite and exceed b_min"));
        }
        if self.n < 2 {
            return Err(ModelError::domain("n", self.n as f64, "grid needs at least two points"));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        (self.b_max - self.b_min) / (self.n - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.b_max
        } else {
            self.b_min + i as f64 * self.step()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMaximum {
    pub b_hat: f64,
    pub value: f64,
}

/// Brute-force maximiser of the eNPV over a grid of thresholds. Ties go to
/// the smallest threshold.
pub fn maximize_enpv(params: &ModelParams, grid: &Grid) -> Result<GridMaximum> {
    grid.validate()?;
    let derived = model::derive(params)?;
    let mut best = GridMaximum {
        b_hat: grid.point(0),
        value: enpv_at(params, &derived, grid.point(0)),
    };
    for i in 1..grid.n {
        let b = grid.point(i);
        let v = enpv_at(params, &derived, b);
        if v > best.value {
            best = GridMaximum { b_hat: b, value: v };
        }
    }
    Ok(best)
}

/// Golden-section refinement of the eNPV maximiser on `[lo, hi]`, meant to
/// follow a grid search that has bracketed the peak.
pub fn refine_enpv(params: &ModelParams, lo: f64, hi: f64, tol: f64) -> Result<GridMaximum> {
    if !(hi > lo) {
        return Err(ModelError::domain("hi", hi, "must exceed lo"));
    }
    let derived = model::derive(params)?;
    let f = |b: f64| enpv_at(params, &derived, b);
    let b = golden_max(f, lo, hi, tol);
    Ok(GridMaximum { b_hat: b, value: f(b) })
}

pub(crate) fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while hi - lo > tol {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}
