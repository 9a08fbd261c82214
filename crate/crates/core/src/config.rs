//! The key/value parameter document shared by the library and the CLI.
//!
//! ```toml
//! r = 0.0004
//! lambda0 = 0.01
//! mu = 0.0004
//! sigma = 0.02
//! premium = 9000
//! beta = 30          # or a [schedule] table together with lambda1
//! x0 = 346
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::model::{apply_mortality, ModelParams, Mortality};
use crate::schedule::{self, BenefitSchedule};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsDoc {
    pub r: f64,
    pub lambda0: f64,
    pub mu: f64,
    pub sigma: f64,
    pub premium: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    pub x0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_dag: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schedule: Option<BenefitSchedule>,
}

impl ParamsDoc {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| ModelError::Config(e.message().to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| ModelError::Config(e.to_string()))
    }

    /// Resolves `β` (from the schedule when given) and validates.
    pub fn to_params(&self) -> Result<ModelParams> {
        let base_beta = match (&self.beta, &self.schedule) {
            (Some(b), None) => *b,
            (None, Some(s)) => {
                let l1 = self.lambda1.ok_or_else(|| {
                    ModelError::Config("a `schedule` needs `lambda1`".into())
                })?;
                schedule::beta(s, l1, self.r)?
            }
            _ => {
                return Err(ModelError::Config(
                    "exactly one of `beta` or `schedule` must be given".into(),
                ))
            }
        };
        let params = ModelParams {
            r: self.r,
            lambda0: self.lambda0,
            mu: self.mu,
            sigma: self.sigma,
            premium: self.premium,
            beta: base_beta,
            x: self.x0,
            mortality: None,
        };
        match (self.lambda2, self.a_dag) {
            (None, None) => {
                params.validate()?;
                Ok(params)
            }
            (None, Some(_)) => Err(ModelError::Config("`a_dag` needs `lambda2`".into())),
            (Some(lambda2), a_dag) => {
                let mortality = Mortality { lambda2, a_dag: a_dag.unwrap_or(0.0) };
                let sched = self.schedule.as_ref().zip(self.lambda1);
                apply_mortality(&params, mortality, sched)
            }
        }
    }

    /// Document with an explicit `beta`.
    pub fn from_params(params: &ModelParams) -> Self {
        ParamsDoc {
            r: params.r,
            lambda0: params.lambda0,
            mu: params.mu,
            sigma: params.sigma,
            premium: params.premium,
            beta: Some(params.beta),
            lambda1: None,
            x0: params.x,
            lambda2: params.mortality.map(|m| m.lambda2),
            a_dag: params.mortality.map(|m| m.a_dag),
            schedule: None,
        }
    }
}
