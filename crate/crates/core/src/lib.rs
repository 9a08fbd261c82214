//! Optimal timing of an unemployment insurance purchase when the insured's
//! wage follows a geometric Brownian motion.
//!
//! The model values a policy bought at a stopping time `τ` as
//! `E[e^{-r̃τ}(β1 X_τ − P)]` and the optimal rule is to buy the first time
//! the wage reaches a critical threshold `b*`. Every closed form in the crate
//! has a numerical or Monte Carlo counterpart used for verification.

pub mod config;
pub mod error;
pub mod estimation;
pub mod hitting;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod schedule;
pub mod sensitivity;
pub mod utility;

pub use error::{ModelError, Result};
pub use hitting::ThresholdPolicy;
pub use model::{derive, solve, DerivedParams, ModelParams, Mortality, Regime, Solution};
pub use schedule::BenefitSchedule;
