//! Benefit schedules and the discounted-benefit multiplier.
//!
//! A schedule `h(s)` gives the benefit paid `s` weeks into an unemployment
//! spell as a fraction of the final wage. Two quantities are derived from it:
//!
//! * `H(t) = ∫₀ᵗ e^{-rs} h(s) ds`, the discounted benefit accrued by week `t`;
//! * `β = ∫₀^∞ λ₁ e^{-λ₁t} H(t) dt`, the expected discounted benefit per unit
//!   of final wage when the spell length is exponential with rate `λ₁`.
//!
//! `discounted_benefit` uses exact antiderivatives, `beta_from_schedule`
//! integrates the outer expectation numerically, and `beta_closed_form`
//! evaluates the explicit expression for the piecewise-exponential kind.

use serde::{Deserialize, Serialize};

use crate::error::{ModelError, Result};
use crate::quadrature::adaptive_simpson_pieces;

/// Absolute tolerance of every adaptive quadrature in this module.
pub const QUADRATURE_TOL: f64 = 1e-12;

/// Outer integrals stop where the exponential tail mass drops below this.
const TAIL_MASS: f64 = 1e-12;

/// Benefit duration cap of the French preset: 21 months, in weeks.
pub const FRENCH_TERM_WEEKS: f64 = 21.0 * 52.0 / 12.0;

/// How the spell rate `λ₁` is fitted to a finite benefit term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpellCalibration {
    /// `E(τ₁)` equals the term.
    MeanDuration { term_weeks: f64 },
    /// `P(τ₁ > term)` equals `tail`.
    TailProbability { term_weeks: f64, tail: f64 },
}

impl SpellCalibration {
    pub fn lambda1(&self) -> Result<f64> {
        match *self {
            SpellCalibration::MeanDuration { term_weeks } => {
                if !(term_weeks > 0.0) {
                    return Err(ModelError::domain("term_weeks", term_weeks, "must be positive"));
                }
                Ok(1.0 / term_weeks)
            }
            SpellCalibration::TailProbability { term_weeks, tail } => {
                if !(term_weeks > 0.0) {
                    return Err(ModelError::domain("term_weeks", term_weeks, "must be positive"));
                }
                if !(tail > 0.0 && tail < 1.0) {
                    return Err(ModelError::domain("tail", tail, "must lie in (0, 1)"));
                }
                Ok(-tail.ln() / term_weeks)
            }
        }
    }
}

/// A benefit schedule `h(s)`, `s` in weeks since the job was lost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScheduleDoc", into = "ScheduleDoc")]
pub enum BenefitSchedule {
    /// `h0` for `s ≤ s0`, then `h0·e^{-δ(s-s0)}`. `s0` may be infinite.
    PiecewiseExponential { h0: f64, s0: f64, delta: f64 },
    /// Linear interpolation between `(week, rate)` knots, zero after the last.
    Tabulated { knots: Vec<(f64, f64)> },
}

impl BenefitSchedule {
    pub fn piecewise_exponential(h0: f64, s0: f64, delta: f64) -> Result<Self> {
        if !(h0 > 0.0 && h0 <= 1.0) {
            return Err(ModelError::domain("h0", h0, "must lie in (0, 1]"));
        }
        if !(s0 >= 0.0) {
            return Err(ModelError::domain("s0", s0, "must be non-negative"));
        }
        if !(delta > 0.0) || delta.is_nan() {
            return Err(ModelError::domain("delta", delta, "must be positive"));
        }
        Ok(BenefitSchedule::PiecewiseExponential { h0, s0, delta })
    }

    /// Knots must start at week 0, be strictly increasing in time and carry
    /// non-negative finite rates.
    pub fn tabulated(knots: Vec<(f64, f64)>) -> Result<Self> {
        let Some(&(first, _)) = knots.first() else {
            return Err(ModelError::Config("tabulated schedule needs at least one knot".into()));
        };
        if first != 0.0 {
            return Err(ModelError::domain("table[0].week", first, "first knot must be at week 0"));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) || !w[1].0.is_finite() {
                return Err(ModelError::domain("table.week", w[1].0, "knot times must be strictly increasing"));
            }
        }
        if let Some(&(_, bad)) = knots.iter().find(|(_, h)| !(*h >= 0.0 && h.is_finite())) {
            return Err(ModelError::domain("table.rate", bad, "rates must be finite and non-negative"));
        }
        Ok(BenefitSchedule::Tabulated { knots })
    }

    /// The 1990s French schedule for workers aged 50+: 57.4% for eight
    /// months, then falling 15% every four months.
    pub fn french_1990s() -> Self {
        BenefitSchedule::PiecewiseExponential {
            h0: 0.574,
            s0: 8.0 * 52.0 / 12.0,
            delta: -(3.0 / 52.0) * 0.85f64.ln(),
        }
    }

    /// Benefit rate `h(s)`.
    pub fn rate(&self, s: f64) -> f64 {
        match self {
            BenefitSchedule::PiecewiseExponential { h0, s0, delta } => {
                if s <= *s0 {
                    *h0
                } else {
                    h0 * (-delta * (s - s0)).exp()
                }
            }
            BenefitSchedule::Tabulated { knots } => {
                let last = knots[knots.len() - 1];
                if s > last.0 || s < 0.0 {
                    return 0.0;
                }
                if s == last.0 {
                    return last.1;
                }
                let i = knots.partition_point(|(t, _)| *t <= s) - 1;
                let (t0, h0) = knots[i];
                let (t1, h1) = knots[i + 1];
                h0 + (h1 - h0) * (s - t0) / (t1 - t0)
            }
        }
    }

    /// Points where `h` is not smooth, restricted to `(0, t)`.
    fn breakpoints(&self, t: f64) -> Vec<f64> {
        let mut pts = vec![0.0];
        match self {
            BenefitSchedule::PiecewiseExponential { s0, .. } => {
                if *s0 > 0.0 && *s0 < t {
                    pts.push(*s0);
                }
            }
            BenefitSchedule::Tabulated { knots } => {
                pts.extend(knots.iter().map(|k| k.0).filter(|&k| k > 0.0 && k < t));
            }
        }
        pts.push(t);
        pts
    }
}

/// `∫₀ᴸ e^{-ru} du`, accurate for small `rL`.
fn discount_integral(r: f64, len: f64) -> f64 {
    if r == 0.0 {
        len
    } else {
        -(-r * len).exp_m1() / r
    }
}

/// `∫₀ᴸ u e^{-ru} du`.
fn discount_first_moment(r: f64, len: f64) -> f64 {
    let x = r * len;
    if x < 1e-4 {
        len * len * (0.5 - x / 3.0 + x * x / 8.0)
    } else {
        (1.0 - (-x).exp() * (1.0 + x)) / (r * r)
    }
}

fn check_rate(name: &'static str, r: f64) -> Result<()> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(ModelError::domain(name, r, "must be finite and non-negative"));
    }
    Ok(())
}

/// `H(t) = ∫₀ᵗ e^{-rs} h(s) ds` from exact antiderivatives.
pub fn discounted_benefit(schedule: &BenefitSchedule, t: f64, r: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(ModelError::domain("t", t, "must be non-negative"));
    }
    check_rate("r", r)?;
    Ok(match schedule {
        BenefitSchedule::PiecewiseExponential { h0, s0, delta } => {
            if t <= *s0 {
                h0 * discount_integral(r, t)
            } else {
                h0 * discount_integral(r, *s0)
                    + h0 * (-r * s0).exp() * discount_integral(r + delta, t - s0)
            }
        }
        BenefitSchedule::Tabulated { knots } => {
            let mut total = 0.0;
            for w in knots.windows(2) {
                let (a, ha) = w[0];
                let (b, hb) = w[1];
                if a >= t {
                    break;
                }
                let end = b.min(t);
                let len = end - a;
                let slope = (hb - ha) / (b - a);
                total += (-r * a).exp()
                    * (ha * discount_integral(r, len) + slope * discount_first_moment(r, len));
            }
            total
        }
    })
}

/// `H(t)` by adaptive Simpson on the smooth pieces of `h`.
pub fn discounted_benefit_quadrature(schedule: &BenefitSchedule, t: f64, r: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(ModelError::domain("t", t, "must be finite and non-negative"));
    }
    check_rate("r", r)?;
    let f = |s: f64| (-r * s).exp() * schedule.rate(s);
    Ok(adaptive_simpson_pieces(&f, &schedule.breakpoints(t), QUADRATURE_TOL))
}

/// `β = ∫₀^∞ λ₁ e^{-λ₁t} H(t) dt` by adaptive Simpson over `[0, t_max]`,
/// `t_max` chosen so `e^{-λ₁ t_max}` is below `1e-12`. The remaining tail is
/// added as `e^{-λ₁ t_max} H(t_max)`.
pub fn beta_from_schedule(schedule: &BenefitSchedule, lambda1: f64, r: f64) -> Result<f64> {
    if !(lambda1 > 0.0) || !lambda1.is_finite() {
        return Err(ModelError::domain("lambda1", lambda1, "must be positive"));
    }
    check_rate("r", r)?;
    let t_max = -TAIL_MASS.ln() / lambda1;
    let integrand = |t: f64| {
        // H is continuous and bounded on [0, t_max]; inputs are in range.
        lambda1 * (-lambda1 * t).exp() * discounted_benefit(schedule, t, r).unwrap_or(f64::NAN)
    };
    let body = adaptive_simpson_pieces(&integrand, &schedule.breakpoints(t_max), QUADRATURE_TOL);
    let tail = (-lambda1 * t_max).exp() * discounted_benefit(schedule, t_max, r)?;
    Ok(body + tail)
}

/// The explicit `β` of the piecewise-exponential schedule:
/// `h0(1-e^{-(r+λ₁)s0})/(r+λ₁) + h0 e^{-(r+λ₁)s0}/(r+λ₁+δ)`.
pub fn beta_closed_form(h0: f64, s0: f64, delta: f64, lambda1: f64, r: f64) -> Result<f64> {
    BenefitSchedule::piecewise_exponential(h0, s0, delta)?;
    if !(lambda1 > 0.0) {
        return Err(ModelError::domain("lambda1", lambda1, "must be positive"));
    }
    check_rate("r", r)?;
    let k = r + lambda1;
    if s0.is_infinite() {
        return Ok(h0 / k);
    }
    let decay = (-k * s0).exp();
    Ok(h0 * -(-k * s0).exp_m1() / k + h0 * decay / (k + delta))
}

/// `β` for any schedule: closed form for the piecewise-exponential kind,
/// quadrature otherwise.
pub fn beta(schedule: &BenefitSchedule, lambda1: f64, r: f64) -> Result<f64> {
    match schedule {
        BenefitSchedule::PiecewiseExponential { h0, s0, delta } => {
            beta_closed_form(*h0, *s0, *delta, lambda1, r)
        }
        BenefitSchedule::Tabulated { .. } => beta_from_schedule(schedule, lambda1, r),
    }
}

/// Expected discounted benefit accrued over a spell, integrated directly
/// as `∫₀^∞ e^{-(r+λ₁)s} h(s) ds`. Used to cross-check the nested form.
pub fn beta_single_integral(schedule: &BenefitSchedule, lambda1: f64, r: f64) -> Result<f64> {
    if !(lambda1 > 0.0) {
        return Err(ModelError::domain("lambda1", lambda1, "must be positive"));
    }
    check_rate("r", r)?;
    let k = r + lambda1;
    let t_max = -TAIL_MASS.ln() / k;
    let end = t_max.min(schedule_support(schedule));
    let f = |s: f64| (-k * s).exp() * schedule.rate(s);
    Ok(adaptive_simpson_pieces(&f, &schedule.breakpoints(end), QUADRATURE_TOL))
}

fn schedule_support(schedule: &BenefitSchedule) -> f64 {
    match schedule {
        BenefitSchedule::PiecewiseExponential { .. } => f64::INFINITY,
        BenefitSchedule::Tabulated { knots } => knots[knots.len() - 1].0,
    }
}

/// Config-file form: `h0`, `s0_weeks`, `delta`, or `table = [[t, rate], ...]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    h0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    s0_weeks: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<Vec<[f64; 2]>>,
}

impl TryFrom<ScheduleDoc> for BenefitSchedule {
    type Error = ModelError;

    fn try_from(doc: ScheduleDoc) -> Result<Self> {
        match (doc.table, doc.h0, doc.delta) {
            (Some(table), None, None) if doc.s0_weeks.is_none() => {
                BenefitSchedule::tabulated(table.into_iter().map(|[t, h]| (t, h)).collect())
            }
            (None, Some(h0), Some(delta)) => {
                BenefitSchedule::piecewise_exponential(h0, doc.s0_weeks.unwrap_or(0.0), delta)
            }
            _ => Err(ModelError::Config(
                "schedule needs either `h0`, `delta` (and optional `s0_weeks`) or a `table`".into(),
            )),
        }
    }
}

impl From<BenefitSchedule> for ScheduleDoc {
    fn from(s: BenefitSchedule) -> Self {
        match s {
            BenefitSchedule::PiecewiseExponential { h0, s0, delta } => ScheduleDoc {
                h0: Some(h0),
                s0_weeks: Some(s0),
                delta: Some(delta),
                table: None,
            },
            BenefitSchedule::Tabulated { knots } => ScheduleDoc {
                h0: None,
                s0_weeks: None,
                delta: None,
                table: Some(knots.into_iter().map(|(t, h)| [t, h]).collect()),
            },
        }
    }
}
