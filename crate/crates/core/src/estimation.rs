//! Drift and volatility estimates from an observed wage path, the one-sided
//! drift test, and the weekly buy-or-wait procedure built on both.
//!
//! Observations are `(week, wage)` pairs on an equally spaced grid. With
//! `Y = ln X`, `T` the observed span and `n` the number of increments,
//!
//! * `â = (Y_T − Y_0)/T` estimates `a = μ − ½σ²`,
//! * `σ̂² = (n/T)·s²` where `s²` is the sample variance of the increments,
//! * `μ̂ = â + ½σ̂²`.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{ModelError, Result};

const GRID_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateReport {
    pub a_hat: f64,
    pub sigma2_hat: f64,
    pub mu_hat: f64,
    pub var_a_hat: f64,
    pub var_sigma2_hat: f64,
    pub var_mu_hat: f64,
    pub n: usize,
    #[serde(rename = "T")]
    pub span: f64,
}

/// Log-wage increments after validating the grid and the wages.
pub fn log_increments(obs: &[(f64, f64)]) -> Result<Vec<f64>> {
    if obs.len() < 2 {
        return Err(ModelError::Observations("need at least two observations".into()));
    }
    if let Some(&(week, wage)) = obs.iter().find(|(_, w)| !(*w > 0.0) || !w.is_finite()) {
        return Err(ModelError::Observations(format!(
            "wage {wage} at week {week} is not positive"
        )));
    }
    let step = obs[1].0 - obs[0].0;
    if !(step > 0.0) {
        return Err(ModelError::Observations("weeks must be strictly increasing".into()));
    }
    for (i, w) in obs.windows(2).enumerate() {
        let d = w[1].0 - w[0].0;
        if (d - step).abs() > GRID_TOL * step.max(1.0) {
            return Err(ModelError::Observations(format!(
                "observation grid is not uniform: step {d} after index {i}, expected {step}"
            )));
        }
    }
    Ok(obs.windows(2).map(|w| (w[1].1 / w[0].1).ln()).collect())
}

/// Mean and unbiased variance.
fn mean_var(z: &[f64]) -> (f64, f64) {
    let n = z.len() as f64;
    let mean = z.iter().sum::<f64>() / n;
    let ss: f64 = z.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, if z.len() > 1 { ss / (n - 1.0) } else { 0.0 })
}

fn report(a_hat: f64, sample_var: f64, n: usize, span: f64) -> EstimateReport {
    let sigma2_hat = n as f64 / span * sample_var;
    let dof = (n - 1) as f64;
    let var_a_hat = sigma2_hat / span;
    let var_sigma2_hat = 2.0 * sigma2_hat * sigma2_hat / dof;
    EstimateReport {
        a_hat,
        sigma2_hat,
        mu_hat: a_hat + 0.5 * sigma2_hat,
        var_a_hat,
        var_sigma2_hat,
        var_mu_hat: var_a_hat + sigma2_hat * sigma2_hat / (2.0 * dof),
        n,
        span,
    }
}

/// Estimates `a`, `σ²` and `μ` with their variances. The variances are the
/// model formulas evaluated at `σ̂²`.
pub fn estimate(obs: &[(f64, f64)]) -> Result<EstimateReport> {
    let z = log_increments(obs)?;
    if z.len() < 2 {
        return Err(ModelError::Observations("need at least two increments".into()));
    }
    let span = obs[obs.len() - 1].0 - obs[0].0;
    let a_hat = (obs[obs.len() - 1].1.ln() - obs[0].1.ln()) / span;
    let (_, var) = mean_var(&z);
    Ok(report(a_hat, var, z.len(), span))
}

/// Upper `alpha` quantile of the standard normal law.
pub fn z_quantile(alpha: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - alpha)
}

/// Upper `alpha` quantile of Student's t with `dof` degrees of freedom.
pub fn t_quantile(alpha: f64, dof: f64) -> f64 {
    StudentsT::new(0.0, 1.0, dof)
        .expect("dof > 0")
        .inverse_cdf(1.0 - alpha)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DriftTest {
    pub reject: bool,
    /// `Y_T − Y_0`.
    pub statistic: f64,
    /// Critical value; the null `a ≥ 0` is rejected at or below it.
    pub threshold: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 0.5) {
        return Err(ModelError::domain("alpha", alpha, "must lie in (0, 0.5]"));
    }
    Ok(())
}

fn decide(statistic: f64, threshold: f64) -> DriftTest {
    DriftTest {
        // A flat path with zero estimated volatility is not evidence of decline.
        reject: statistic <= threshold && statistic < 0.0,
        statistic,
        threshold,
    }
}

/// Tests `H0: a ≥ 0` against `a < 0`. With a known `sigma` the normal test
/// rejects when `Y_T − Y_0 ≤ −z(α)σ√T`; otherwise `σ` is replaced by
/// `σ̂` and `z(α)` by `t_{n−1}(α)`.
pub fn test_drift(obs: &[(f64, f64)], alpha: f64, sigma: Option<f64>) -> Result<DriftTest> {
    check_alpha(alpha)?;
    let z = log_increments(obs)?;
    let span = obs[obs.len() - 1].0 - obs[0].0;
    let statistic = obs[obs.len() - 1].1.ln() - obs[0].1.ln();
    match sigma {
        Some(s) => {
            if !(s > 0.0) || !s.is_finite() {
                return Err(ModelError::domain("sigma", s, "must be positive"));
            }
            Ok(decide(statistic, -z_quantile(alpha) * s * span.sqrt()))
        }
        None => {
            if z.len() < 2 {
                return Err(ModelError::Observations("the t test needs at least two increments".into()));
            }
            let (_, var) = mean_var(&z);
            let sigma_hat = (z.len() as f64 / span * var).sqrt();
            let dof = (z.len() - 1) as f64;
            Ok(decide(statistic, -t_quantile(alpha, dof) * sigma_hat * span.sqrt()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    KeepWaiting,
    BuyNowHit,
    BuyNowRejected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Step {
    pub week: f64,
    pub wage: f64,
    pub action: Action,
}

/// Weekly buy-or-wait procedure: buy as soon as the wage reaches `b*`, or
/// as soon as the drift test on all data so far rejects `a ≥ 0`. Each week
/// is tested at the same level `alpha`, with no multiplicity correction.
///
/// Holds running sums, so each observation costs O(1).
#[derive(Debug, Clone)]
pub struct SequentialDecision {
    b_star: f64,
    alpha: f64,
    sigma: Option<f64>,
    first: Option<(f64, f64)>,
    last: Option<(f64, f64)>,
    step: Option<f64>,
    n: usize,
    mean: f64,
    m2: f64,
    decided: Option<Step>,
}

impl SequentialDecision {
    pub fn new(b_star: f64, alpha: f64, sigma: Option<f64>) -> Result<Self> {
        check_alpha(alpha)?;
        if !(b_star > 0.0) {
            return Err(ModelError::domain("b_star", b_star, "must be positive"));
        }
        if let Some(s) = sigma {
            if !(s > 0.0) {
                return Err(ModelError::domain("sigma", s, "must be positive"));
            }
        }
        Ok(SequentialDecision {
            b_star,
            alpha,
            sigma,
            first: None,
            last: None,
            step: None,
            n: 0,
            mean: 0.0,
            m2: 0.0,
            decided: None,
        })
    }

    /// The final decision, once one has been made.
    pub fn decision(&self) -> Option<Step> {
        self.decided
    }

    /// Feeds the next observation. After a buy decision the same decision
    /// is returned for every further observation.
    pub fn observe(&mut self, week: f64, wage: f64) -> Result<Step> {
        if let Some(d) = self.decided {
            return Ok(d);
        }
        if !(wage > 0.0) || !wage.is_finite() {
            return Err(ModelError::Observations(format!("wage {wage} at week {week} is not positive")));
        }
        if let Some((w0, x0)) = self.last {
            let d = week - w0;
            let step = *self.step.get_or_insert(d);
            if !(d > 0.0) || (d - step).abs() > GRID_TOL * step.max(1.0) {
                return Err(ModelError::Observations(format!(
                    "observation grid is not uniform at week {week}"
                )));
            }
            let z = (wage / x0).ln();
            self.n += 1;
            let delta = z - self.mean;
            self.mean += delta / self.n as f64;
            self.m2 += delta * (z - self.mean);
        } else {
            self.first = Some((week, wage));
        }
        self.last = Some((week, wage));

        let action = if wage >= self.b_star {
            Action::BuyNowHit
        } else if self.rejects() {
            Action::BuyNowRejected
        } else {
            Action::KeepWaiting
        };
        let step = Step { week, wage, action };
        if action != Action::KeepWaiting {
            self.decided = Some(step);
        }
        Ok(step)
    }

    fn rejects(&self) -> bool {
        let (Some((w0, x0)), Some((w1, x1))) = (self.first, self.last) else {
            return false;
        };
        let span = w1 - w0;
        let statistic = (x1 / x0).ln();
        let threshold = match self.sigma {
            Some(s) if self.n >= 1 => -z_quantile(self.alpha) * s * span.sqrt(),
            None if self.n >= 2 => {
                let var = self.m2 / (self.n - 1) as f64;
                let sigma_hat = (self.n as f64 / span * var).sqrt();
                -t_quantile(self.alpha, (self.n - 1) as f64) * sigma_hat * span.sqrt()
            }
            _ => return false,
        };
        decide(statistic, threshold).reject
    }
}

/// Runs the procedure over a whole series. Returns the trace up to and
/// including the decision week, or the whole trace if the wait continues.
pub fn sequential_decision(
    obs: &[(f64, f64)],
    b_star: f64,
    alpha: f64,
    sigma: Option<f64>,
) -> Result<Vec<Step>> {
    let mut proc = SequentialDecision::new(b_star, alpha, sigma)?;
    let mut trace = Vec::new();
    for &(week, wage) in obs {
        let step = proc.observe(week, wage)?;
        trace.push(step);
        if step.action != Action::KeepWaiting {
            break;
        }
    }
    Ok(trace)
}
