use thiserror::Error;

/// Failures raised while validating inputs or evaluating the model.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// The wage drift reaches the effective discount rate, so the expected
    /// discounted final wage diverges.
    #[error("assumption 1 violated: drift mu = {mu} must be strictly below the effective discount rate r~ = {r_tilde}")]
    AssumptionViolated { mu: f64, r_tilde: f64 },

    /// The volatility is zero; the stochastic formulas are 0/0 and the
    /// deterministic path must be used instead.
    #[error("sigma = 0: the stochastic threshold is undefined, use the deterministic regime")]
    DegenerateSigma,

    /// A parameter lies outside its admissible range.
    #[error("invalid {name} = {value}: {reason}")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Observation series that cannot be used by the estimators.
    #[error("invalid observations: {0}")]
    Observations(String),

    /// Structured configuration that could not be interpreted.
    #[error("configuration error: {0}")]
    Config(String),
}

impl ModelError {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        ModelError::Domain {
            name,
            value,
            reason,
        }
    }
}

pub type Result<T> = std::result::Result<T, ModelError>;
