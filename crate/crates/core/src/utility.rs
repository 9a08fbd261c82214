//! Threshold strategies under a preference for entering early, and the
//! largest premium a worker with consumption needs would accept.
//!
//! A worker who values the event of entering adds `κ·P(τ_b < ∞)` (or a
//! power of it, or a term in the mean waiting time) to the expected net
//! present value and maximises over thresholds `b ≥ x`.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::hitting::{enpv_at, golden_max};
use crate::model::{self, ratio_power, DerivedParams, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// `κ(x/b)^{1−2μ/σ²} + eNPV(b)`.
    HitProbRaw,
    /// `κ(x/b)^{q*} + eNPV(b)`: the hit probability raised to `q*/(1−2μ/σ²)`.
    HitProbPowered,
    /// `κ·exp(−E τ_b) + eNPV(b)`.
    MeanTimeExp,
    /// `κ·exp(−q*(μ−½σ²)E τ_b) + eNPV(b)`, the same objective as
    /// [`Variant::HitProbPowered`].
    MeanTimePowered,
}

impl std::str::FromStr for Variant {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "hit_prob_raw" => Ok(Variant::HitProbRaw),
            "hit_prob_powered" => Ok(Variant::HitProbPowered),
            "mean_time_exp" => Ok(Variant::MeanTimeExp),
            "mean_time_powered" => Ok(Variant::MeanTimePowered),
            other => Err(ModelError::Config(format!("unknown utility variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UtilityConfig {
    pub kappa: f64,
    pub variant: Variant,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UtilitySolution {
    pub b_dag: f64,
    pub u_dag: f64,
}

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa >= 0.0) || !kappa.is_finite() {
        return Err(ModelError::domain("kappa", kappa, "must be finite and non-negative"));
    }
    Ok(())
}

/// `1 − 2μ/σ²`.
fn hit_exponent(params: &ModelParams) -> f64 {
    1.0 - 2.0 * params.mu / (params.sigma * params.sigma)
}

fn log_drift(params: &ModelParams) -> f64 {
    params.mu - 0.5 * params.sigma * params.sigma
}

/// The objective of `variant` at threshold `b ≥ x`.
pub fn objective(params: &ModelParams, variant: Variant, kappa: f64, b: f64) -> Result<f64> {
    check_kappa(kappa)?;
    let d = model::derive(params)?;
    let x = params.x;
    let bonus = match variant {
        Variant::HitProbRaw => {
            if log_drift(params) >= 0.0 {
                1.0
            } else {
                ratio_power(x, b, hit_exponent(params))
            }
        }
        Variant::HitProbPowered | Variant::MeanTimePowered => ratio_power(x, b, d.q_star),
        Variant::MeanTimeExp => {
            let a = log_drift(params);
            if a <= 0.0 {
                return Err(ModelError::domain("mu", params.mu, "mean hitting time is infinite for mu <= sigma^2/2"));
            }
            ratio_power(x, b, 1.0 / a)
        }
    };
    Ok(kappa * bonus + enpv_at(params, &d, b))
}

/// Maximiser of `κ(x/b)^{1−2μ/σ²} + eNPV(b)`: the smallest `b ≥ x` with
/// `aκ(b/x)^{q*−a} + (q*−1)β1 b ≥ P q*`. Equals `b*` when `μ ≥ ½σ²`.
pub fn suboptimal_threshold_raw(params: &ModelParams, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    let d = model::derive(params)?;
    let b_star = model::optimal_threshold(&d, params.premium)?;
    if log_drift(params) >= 0.0 || kappa == 0.0 {
        return Ok(b_star);
    }
    let x = params.x;
    if x >= b_star {
        return Ok(x);
    }
    let a = hit_exponent(params);
    let q = d.q_star;
    let f = |b: f64| {
        a * kappa * ((q - a) * (b / x).ln()).exp() + (q - 1.0) * d.beta1 * b - params.premium * q
    };
    if f(x) >= 0.0 {
        return Ok(x);
    }
    let (mut lo, mut hi) = (x, b_star);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

fn check_kappa_premium(kappa: f64, premium: f64) -> Result<()> {
    check_kappa(kappa)?;
    if kappa > premium {
        return Err(ModelError::domain("kappa", kappa, "must not exceed the premium"));
    }
    Ok(())
}

/// `b† = (P − κ)q*/(β1(q* − 1))`, the maximiser of the powered objective.
pub fn modified_threshold(params: &ModelParams, kappa: f64) -> Result<f64> {
    check_kappa_premium(kappa, params.premium)?;
    let d = model::derive(params)?;
    Ok(threshold_for(&d, params.premium - kappa))
}

fn threshold_for(d: &DerivedParams, net_premium: f64) -> f64 {
    net_premium * d.q_star / (d.beta1 * (d.q_star - 1.0))
}

/// `u†(x)`: the value of the powered problem, `(β1b† + κ − P)(x/b†)^{q*}`
/// below `b†` and `β1x + κ − P` above.
pub fn modified_value(params: &ModelParams, kappa: f64, x: f64) -> Result<f64> {
    check_kappa_premium(kappa, params.premium)?;
    let d = model::derive(params)?;
    let b = threshold_for(&d, params.premium - kappa);
    let net = kappa - params.premium;
    Ok(if x < b {
        (d.beta1 * b + net) * ratio_power(x, b, d.q_star)
    } else {
        d.beta1 * x + net
    })
}

/// `κ† = P − β1(q* − 1)x/q*`, the weight at which `b†` falls to `x`.
pub fn kappa_dag(params: &ModelParams, x: f64) -> Result<f64> {
    let d = model::derive(params)?;
    Ok(params.premium - d.beta1 * (d.q_star - 1.0) * x / d.q_star)
}

/// Numerical maximiser of `κ·exp(−E τ_b) + eNPV(b)` over `[x, b*]`. The
/// bonus term only pulls the maximiser below `b*`, so the bracket is
/// complete. A 2001-point scan locates the best cell, then golden-section
/// search refines it.
pub fn mean_time_threshold(params: &ModelParams, kappa: f64) -> Result<f64> {
    check_kappa(kappa)?;
    if log_drift(params) <= 0.0 {
        return Err(ModelError::domain("mu", params.mu, "mean hitting time is infinite for mu <= sigma^2/2"));
    }
    let d = model::derive(params)?;
    let b_star = model::optimal_threshold(&d, params.premium)?;
    let x = params.x;
    if x >= b_star {
        return Ok(x);
    }
    if kappa == 0.0 {
        return Ok(b_star);
    }
    let f = |b: f64| objective(params, Variant::MeanTimeExp, kappa, b).unwrap_or(f64::NEG_INFINITY);
    let n = 2001;
    let step = (b_star - x) / (n - 1) as f64;
    let mut best = (0usize, f(x));
    for i in 1..n {
        let v = f(x + i as f64 * step);
        if v > best.1 {
            best = (i, v);
        }
    }
    let lo = x + best.0.saturating_sub(1) as f64 * step;
    let hi = (x + (best.0 + 1) as f64 * step).min(b_star);
    let b = golden_max(f, lo, hi, 1e-10 * b_star);
    Ok(if f(b) >= best.1 { b } else { x + best.0 as f64 * step })
}

/// Threshold and value of any variant.
pub fn solve(params: &ModelParams, config: &UtilityConfig) -> Result<UtilitySolution> {
    let b_dag = match config.variant {
        Variant::HitProbRaw => suboptimal_threshold_raw(params, config.kappa)?,
        Variant::HitProbPowered | Variant::MeanTimePowered => {
            modified_threshold(params, config.kappa)?
        }
        Variant::MeanTimeExp => mean_time_threshold(params, config.kappa)?,
    };
    let u_dag = objective(params, config.variant, config.kappa, b_dag.max(params.x))?;
    Ok(UtilitySolution { b_dag, u_dag })
}

/// `γ = λ0 c/((r + λ0)(r + λ1))`, the present value of consuming `c` per
/// week through the unemployment spell that follows the job loss.
pub fn consumption_gamma(c: f64, r: f64, lambda0: f64, lambda1: f64) -> Result<f64> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(ModelError::domain("c", c, "must be finite and non-negative"));
    }
    if !(r >= 0.0) {
        return Err(ModelError::domain("r", r, "must be non-negative"));
    }
    if !(lambda0 > 0.0) {
        return Err(ModelError::domain("lambda0", lambda0, "must be positive"));
    }
    if !(lambda1 > 0.0) {
        return Err(ModelError::domain("lambda1", lambda1, "must be positive"));
    }
    Ok(lambda0 * c / ((r + lambda0) * (r + lambda1)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum MaxPremium {
    Finite(f64),
    /// The policy keeps a non-negative net value at every premium.
    Unbounded,
}

/// `v(x)` as a function of the premium, other parameters fixed.
fn value_at_premium(d: &DerivedParams, x: f64, premium: f64) -> f64 {
    let b = threshold_for(d, premium);
    if x >= b {
        d.beta1 * x - premium
    } else {
        (d.beta1 * b - premium) * ratio_power(x, b, d.q_star)
    }
}

/// Largest premium `P` with `v(x; P) ≥ γ`. Since `b*` scales with `P`,
/// the condition is solved by bisection on `P`. For `γ ≥ β1x` no positive
/// premium qualifies and the (non-positive) value `β1x − γ` is returned.
/// With `γ = 0` the bound is `β1x` when the worker would buy at once at the
/// current premium, and unbounded otherwise.
pub fn max_premium(params: &ModelParams, x: f64, gamma: f64) -> Result<MaxPremium> {
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(ModelError::domain("gamma", gamma, "must be finite and non-negative"));
    }
    if !(x > 0.0) {
        return Err(ModelError::domain("x", x, "must be positive"));
    }
    let d = model::derive(params)?;
    let full = d.beta1 * x;
    if gamma == 0.0 {
        let b_star = threshold_for(&d, params.premium);
        return Ok(if x >= b_star { MaxPremium::Finite(full) } else { MaxPremium::Unbounded });
    }
    if gamma >= full {
        return Ok(MaxPremium::Finite(full - gamma));
    }
    let residual = |p: f64| value_at_premium(&d, x, p) - gamma;
    let mut lo = 0.0;
    let mut hi = full * 1e3;
    while residual(hi) > 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if residual(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(MaxPremium::Finite(0.5 * (lo + hi)))
}

/// The explicit bound `β1b* − γ(b*/x)^{q*}` (or `β1x − γ` when `x ≥ b*`),
/// with `b*` taken at the current premium. It agrees with [`max_premium`]
/// when the current premium is already the maximum one.
pub fn max_premium_formula(params: &ModelParams, x: f64, gamma: f64) -> Result<f64> {
    let d = model::derive(params)?;
    let b = threshold_for(&d, params.premium);
    Ok(if x >= b {
        d.beta1 * x - gamma
    } else {
        d.beta1 * b - gamma * ((d.q_star * (b / x).ln()).exp())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names_parse_in_either_case() {
        assert_eq!("mean-time-exp".parse::<Variant>().unwrap(), Variant::MeanTimeExp);
        assert_eq!("hit_prob_raw".parse::<Variant>().unwrap(), Variant::HitProbRaw);
        assert!("hit".parse::<Variant>().is_err());
    }

    #[test]
    fn kappa_must_be_finite_and_non_negative() {
        assert!(check_kappa(0.0).is_ok());
        assert!(check_kappa(-1.0).is_err());
        assert!(check_kappa(f64::NAN).is_err());
        assert!(check_kappa(f64::INFINITY).is_err());
    }
}
