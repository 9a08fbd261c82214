//! Model parameters, the optimal threshold and the value function.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::schedule::{self, BenefitSchedule};

/// Constant force of mortality while employed and unemployed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mortality {
    /// Death rate per week.
    pub lambda2: f64,
    /// Lump sum paid on death in service, as a multiple of the final wage.
    pub a_dag: f64,
}

/// Exogenous inputs. All rates are per week.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub r: f64,
    pub lambda0: f64,
    pub mu: f64,
    pub sigma: f64,
    pub premium: f64,
    pub beta: f64,
    pub x: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mortality: Option<Mortality>,
}

impl ModelParams {
    /// Checks the ranges of every field and the finiteness condition
    /// `mu < r + lambda0 (+ lambda2)`.
    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("r", self.r),
            ("lambda0", self.lambda0),
            ("mu", self.mu),
            ("sigma", self.sigma),
            ("premium", self.premium),
            ("beta", self.beta),
            ("x", self.x),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(ModelError::domain(name, v, "must be finite"));
            }
        }
        if self.r < 0.0 {
            return Err(ModelError::domain("r", self.r, "must be non-negative"));
        }
        if self.lambda0 <= 0.0 {
            return Err(ModelError::domain("lambda0", self.lambda0, "must be positive"));
        }
        if self.sigma < 0.0 {
            return Err(ModelError::domain("sigma", self.sigma, "must be non-negative"));
        }
        if self.premium <= 0.0 {
            return Err(ModelError::domain("premium", self.premium, "must be positive"));
        }
        if self.beta <= 0.0 {
            return Err(ModelError::domain("beta", self.beta, "must be positive"));
        }
        if self.x < 0.0 {
            return Err(ModelError::domain("x", self.x, "must be non-negative"));
        }
        if let Some(m) = self.mortality {
            if !(m.lambda2 >= 0.0) || !m.lambda2.is_finite() {
                return Err(ModelError::domain("lambda2", m.lambda2, "must be finite and non-negative"));
            }
            if !(m.a_dag >= 0.0) || !m.a_dag.is_finite() {
                return Err(ModelError::domain("a_dag", m.a_dag, "must be finite and non-negative"));
            }
        }
        let r_tilde = self.r_tilde();
        if self.mu >= r_tilde {
            return Err(ModelError::AssumptionViolated { mu: self.mu, r_tilde });
        }
        Ok(())
    }

    /// `r + lambda0 (+ lambda2)`.
    pub fn r_tilde(&self) -> f64 {
        match self.mortality {
            Some(m) => self.r + self.lambda0 + m.lambda2,
            None => self.r + self.lambda0,
        }
    }

    /// `β` plus the discounted death-in-service payment.
    fn beta_effective(&self) -> f64 {
        match self.mortality {
            Some(m) => self.beta + m.lambda2 * m.a_dag / (self.r + self.lambda0),
            None => self.beta,
        }
    }

    /// `β1 = λ0 β_eff / (r̃ − μ)`, without validation.
    fn beta1(&self) -> f64 {
        self.beta_effective() * self.lambda0 / (self.r_tilde() - self.mu)
    }

    pub fn with_x(&self, x: f64) -> Self {
        ModelParams { x, ..self.clone() }
    }
}

/// Quantities derived from [`ModelParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub r_tilde: f64,
    pub beta1: f64,
    /// Positive root of `½σ²q(q−1) + μq − r̃ = 0`. In the deterministic
    /// regime this is `r̃/μ`, or infinity when `μ ≤ 0`.
    pub q_star: f64,
    /// Negative root of the same quadratic; NaN in the deterministic regime.
    pub q_neg: f64,
}

impl DerivedParams {
    pub fn gain(&self, x: f64, premium: f64) -> f64 {
        gain(x, self, premium)
    }
}

/// Positive root of `½σ²q² + aq − θ = 0`, `a = μ − ½σ²`.
pub(crate) fn positive_root(mu: f64, sigma: f64, theta: f64) -> f64 {
    let s2 = sigma * sigma;
    let a = mu - 0.5 * s2;
    let disc = (a * a + 2.0 * theta * s2).sqrt();
    if a > 0.0 {
        2.0 * theta / (a + disc)
    } else {
        (disc - a) / s2
    }
}

/// Derives `r̃`, `β1` and the characteristic roots.
pub fn derive(params: &ModelParams) -> Result<DerivedParams> {
    params.validate()?;
    if params.sigma == 0.0 {
        return Err(ModelError::DegenerateSigma);
    }
    let r_tilde = params.r_tilde();
    let q_star = positive_root(params.mu, params.sigma, r_tilde);
    let q_neg = -2.0 * r_tilde / (params.sigma * params.sigma * q_star);
    Ok(DerivedParams {
        r_tilde,
        beta1: params.beta1(),
        q_star,
        q_neg,
    })
}

/// `g(x) = β1 x − P`, the net value of entering at wage `x`.
pub fn gain(x: f64, derived: &DerivedParams, premium: f64) -> f64 {
    derived.beta1 * x - premium
}

/// `b* = P q* / (β1 (q* − 1))`; `P/β1` when `q*` is infinite.
pub fn optimal_threshold(derived: &DerivedParams, premium: f64) -> Result<f64> {
    let q = derived.q_star;
    if !(q > 1.0) {
        return Err(ModelError::domain("q_star", q, "must exceed 1"));
    }
    if q.is_infinite() {
        return Ok(premium / derived.beta1);
    }
    Ok(premium * q / (derived.beta1 * (q - 1.0)))
}

/// `(x/b)^q` computed as `exp(q ln(x/b))`, for `0 ≤ x ≤ b`.
pub(crate) fn ratio_power(x: f64, b: f64, q: f64) -> f64 {
    if x >= b {
        return 1.0;
    }
    if x <= 0.0 {
        return 0.0;
    }
    (q * (x / b).ln()).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Stochastic,
    Deterministic,
}

/// The solved stopping problem: buy the policy the first time the wage
/// reaches `b_star`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub b_star: f64,
    pub derived: DerivedParams,
    pub regime: Regime,
    pub premium: f64,
}

impl Solution {
    /// `v(x)`: `(β1 b* − P)(x/b*)^{q*}` below the threshold, `β1 x − P` above.
    pub fn value(&self, x: f64) -> f64 {
        if self.should_stop(x) {
            gain(x, &self.derived, self.premium)
        } else {
            (gain(self.b_star, &self.derived, self.premium))
                * ratio_power(x, self.b_star, self.derived.q_star)
        }
    }

    /// The stopping rule. A wage exactly at the threshold stops.
    pub fn should_stop(&self, x: f64) -> bool {
        x >= self.b_star
    }
}

/// `v(x)` for a solved problem.
pub fn value(x: f64, solution: &Solution) -> f64 {
    solution.value(x)
}

/// Solves either regime depending on whether `sigma` is zero.
pub fn solve(params: &ModelParams) -> Result<Solution> {
    if params.sigma == 0.0 {
        params.validate()?;
        let derived = deterministic_derived(params);
        return Ok(Solution {
            b_star: optimal_threshold(&derived, params.premium)?,
            derived,
            regime: Regime::Deterministic,
            premium: params.premium,
        });
    }
    let derived = derive(params)?;
    Ok(Solution {
        b_star: optimal_threshold(&derived, params.premium)?,
        derived,
        regime: Regime::Stochastic,
        premium: params.premium,
    })
}

fn deterministic_derived(params: &ModelParams) -> DerivedParams {
    let r_tilde = params.r_tilde();
    let q_star = if params.mu > 0.0 { r_tilde / params.mu } else { f64::INFINITY };
    DerivedParams {
        r_tilde,
        beta1: params.beta1(),
        q_star,
        q_neg: f64::NAN,
    }
}

/// Threshold and entry time of the noiseless problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeterministicSolution {
    pub b0_star: f64,
    /// Weeks until the wage reaches `b0_star`; infinite if it never does.
    pub t_star: f64,
}

/// `b0* = P r̃ / (β1 (r̃ − μ))` for `μ > 0`, else `P/β1`, and the first time
/// `x e^{μt}` reaches it.
pub fn deterministic_threshold(params: &ModelParams) -> Result<DeterministicSolution> {
    params.validate()?;
    if params.sigma != 0.0 {
        return Err(ModelError::domain("sigma", params.sigma, "deterministic regime needs sigma = 0"));
    }
    let beta1 = params.beta1();
    let r_tilde = params.r_tilde();
    let (b0_star, t_star) = if params.mu > 0.0 {
        let b = params.premium * r_tilde / (beta1 * (r_tilde - params.mu));
        let t = if params.x >= b {
            0.0
        } else if params.x == 0.0 {
            f64::INFINITY
        } else {
            (b / params.x).ln() / params.mu
        };
        (b, t)
    } else {
        let b = params.premium / beta1;
        (b, if params.x >= b { 0.0 } else { f64::INFINITY })
    };
    Ok(DeterministicSolution { b0_star, t_star })
}

/// Adds a constant force of mortality. With a schedule and `λ1`, `β` is
/// recomputed with the spell rate `λ1 + λ2`; otherwise the given `β` is kept.
/// `λ2 = 0` leaves every derived quantity bit-identical.
pub fn apply_mortality(
    params: &ModelParams,
    mortality: Mortality,
    schedule: Option<(&BenefitSchedule, f64)>,
) -> Result<ModelParams> {
    let mut out = params.clone();
    out.mortality = Some(mortality);
    if mortality.lambda2 != 0.0 {
        if let Some((sched, lambda1)) = schedule {
            out.beta = schedule::beta(sched, lambda1 + mortality.lambda2, params.r)?;
        }
    }
    out.validate()?;
    Ok(out)
}
