//! Monte Carlo simulation of the wage, the job-loss clock and threshold
//! strategies.
//!
//! Every path draws from its own ChaCha stream keyed by `(seed, path)`, so
//! results do not depend on how the paths are spread across threads.
//!
//! Two ways of detecting the first passage are offered. [`Monitoring::Grid`]
//! checks the exactly sampled wage at grid points only and therefore misses
//! excursions between them. [`Monitoring::Exact`] draws, at each step, the
//! first-passage time of the log-wage (an inverse Gaussian variable, possibly
//! defective) and, if it falls beyond the step, the end point conditioned on
//! no crossing. The resulting hitting time has the exact continuous-time law
//! whatever the step size.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;

use crate::error::{ModelError, Result};
use crate::model::{self, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Monitoring {
    #[default]
    Exact,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Step in weeks.
    pub dt: f64,
    /// Weeks simulated before a path is declared a miss.
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub monitoring: Monitoring,
}

impl SimConfig {
    /// Weekly steps over the default horizon `ceil(14/r̃)`, which makes the
    /// discount factor at the horizon smaller than `1e-6`.
    pub fn for_params(params: &ModelParams, n_paths: usize, seed: u64) -> Self {
        SimConfig {
            dt: 1.0,
            horizon: default_horizon(params.r_tilde()),
            n_paths,
            seed,
            monitoring: Monitoring::Exact,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(ModelError::domain("dt", self.dt, "must be positive"));
        }
        if !(self.horizon >= self.dt) || !self.horizon.is_finite() {
            return Err(ModelError::domain("horizon", self.horizon, "must be finite and at least dt"));
        }
        if self.n_paths == 0 {
            return Err(ModelError::domain("n_paths", 0.0, "must be at least 1"));
        }
        Ok(())
    }
}

pub fn default_horizon(r_tilde: f64) -> f64 {
    (14.0 / r_tilde).ceil()
}

/// The RNG of one path.
pub fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// One simulated wage path on the grid `0, dt, 2dt, ...` together with the
/// job-loss time and, if a spell rate is supplied, the unemployment spell.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub times: Vec<f64>,
    pub wages: Vec<f64>,
    pub tau0: f64,
    pub tau1: Option<f64>,
}

/// Samples path number `path` of the stream defined by `cfg.seed`, with
/// exact lognormal increments.
pub fn sample_path(
    params: &ModelParams,
    cfg: &SimConfig,
    path: u64,
    lambda1: Option<f64>,
) -> Result<PathSample> {
    params.validate()?;
    cfg.validate()?;
    if let Some(l1) = lambda1 {
        if !(l1 > 0.0) {
            return Err(ModelError::domain("lambda1", l1, "must be positive"));
        }
    }
    let mut rng = path_rng(cfg.seed, path);
    let steps = (cfg.horizon / cfg.dt).round() as usize;
    let drift = (params.mu - 0.5 * params.sigma * params.sigma) * cfg.dt;
    let vol = params.sigma * cfg.dt.sqrt();
    let mut times = Vec::with_capacity(steps + 1);
    let mut wages = Vec::with_capacity(steps + 1);
    let mut y = params.x.ln();
    times.push(0.0);
    wages.push(params.x);
    for i in 1..=steps {
        let z: f64 = rng.sample(StandardNormal);
        y += drift + vol * z;
        times.push(i as f64 * cfg.dt);
        wages.push(y.exp());
    }
    let tau0 = Exp::new(params.lambda0).expect("lambda0 > 0").sample(&mut rng);
    let tau1 = lambda1.map(|l1| Exp::new(l1).expect("lambda1 > 0").sample(&mut rng));
    Ok(PathSample { times, wages, tau0, tau1 })
}

/// Time at which the first passage was recorded and the wage paid on entry.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Hit {
    tau: f64,
    wage: f64,
}

/// Michael–Schucany–Haas sampler for the inverse Gaussian law with mean `m`
/// and shape `lambda`, written to avoid cancellation when `m ≫ lambda`.
fn inverse_gaussian<R: Rng + ?Sized>(rng: &mut R, m: f64, lambda: f64) -> f64 {
    let z: f64 = rng.sample(StandardNormal);
    let w = m * z * z / (2.0 * lambda);
    let x = m / (1.0 + w + (w * w + 2.0 * w).sqrt());
    let u: f64 = rng.random();
    if u <= m / (m + x) {
        x
    } else {
        m * m / x
    }
}

/// First time `νt + σB_t` reaches `d > 0`; infinite if it never does.
fn first_passage<R: Rng + ?Sized>(rng: &mut R, nu: f64, sigma: f64, d: f64) -> f64 {
    let s2 = sigma * sigma;
    if nu > 0.0 {
        inverse_gaussian(rng, d / nu, d * d / s2)
    } else if nu < 0.0 {
        let u: f64 = rng.random();
        if u < (2.0 * nu * d / s2).exp() {
            inverse_gaussian(rng, -d / nu, d * d / s2)
        } else {
            f64::INFINITY
        }
    } else {
        let z: f64 = rng.sample(StandardNormal);
        d * d / (s2 * z * z)
    }
}

/// Simulates the log-wage from 0 until it reaches `level` or the horizon
/// passes.
fn first_hit<R: Rng + ?Sized>(
    rng: &mut R,
    params: &ModelParams,
    b: f64,
    cfg: &SimConfig,
) -> Option<Hit> {
    if params.x >= b {
        return Some(Hit { tau: 0.0, wage: params.x });
    }
    let level = (b / params.x).ln();
    let nu = params.mu - 0.5 * params.sigma * params.sigma;
    let sigma = params.sigma;
    if sigma == 0.0 {
        let tau = if nu > 0.0 { level / nu } else { f64::INFINITY };
        let tau = match cfg.monitoring {
            Monitoring::Exact => tau,
            Monitoring::Grid => (tau / cfg.dt).ceil() * cfg.dt,
        };
        return (tau <= cfg.horizon).then(|| Hit { tau, wage: params.x * (nu * tau).exp() });
    }
    let mut t = 0.0;
    let mut y = 0.0;
    while t < cfg.horizon {
        let h = cfg.dt.min(cfg.horizon - t);
        let sd = sigma * h.sqrt();
        match cfg.monitoring {
            Monitoring::Grid => {
                let z: f64 = rng.sample(StandardNormal);
                y += nu * h + sd * z;
                t += h;
                if y >= level {
                    return Some(Hit { tau: t, wage: params.x * y.exp() });
                }
            }
            Monitoring::Exact => {
                let d = level - y;
                let passage = first_passage(rng, nu, sigma, d);
                if passage <= h {
                    return Some(Hit { tau: t + passage, wage: b });
                }
                // End point given that the bridge stayed below the level.
                loop {
                    let z: f64 = rng.sample(StandardNormal);
                    let end = y + nu * h + sd * z;
                    if end >= level {
                        continue;
                    }
                    let cross = (-2.0 * d * (level - end) / (sigma * sigma * h)).exp();
                    let u: f64 = rng.random();
                    if u >= cross {
                        y = end;
                        break;
                    }
                }
                t += h;
            }
        }
    }
    None
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Sum {
    total: f64,
    comp: f64,
}

impl Sum {
    fn add(&mut self, v: f64) {
        let t = self.total + v;
        if self.total.abs() >= v.abs() {
            self.comp += (self.total - t) + v;
        } else {
            self.comp += (v - t) + self.total;
        }
        self.total = t;
    }

    fn value(&self) -> f64 {
        self.total + self.comp
    }
}

/// Sample mean and standard error of the mean.
fn mean_and_se(values: impl Iterator<Item = f64>) -> (f64, f64, usize) {
    let mut s = Sum::default();
    let mut s2 = Sum::default();
    let mut n = 0usize;
    let vals: Vec<f64> = values.collect();
    for &v in &vals {
        s.add(v);
        n += 1;
    }
    if n == 0 {
        return (f64::NAN, f64::NAN, 0);
    }
    let mean = s.value() / n as f64;
    for &v in &vals {
        s2.add((v - mean) * (v - mean));
    }
    let se = if n > 1 {
        (s2.value() / (n - 1) as f64 / n as f64).sqrt()
    } else {
        f64::NAN
    };
    (mean, se, n)
}

/// Raised when the horizon leaves a discount factor above `1e-6`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationWarning {
    pub horizon: f64,
    /// Upper bound on `|E[payoff; τ > horizon]|`.
    pub bias_bound: f64,
}

impl std::fmt::Display for TruncationWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "horizon {} weeks truncates the estimate by at most {:.3e}",
            self.horizon, self.bias_bound
        )
    }
}

fn truncation(params: &ModelParams, beta1: f64, b: f64, horizon: f64) -> Option<TruncationWarning> {
    let discount = (-params.r_tilde() * horizon).exp();
    (discount > 1e-6 && b > params.x).then(|| TruncationWarning {
        horizon,
        bias_bound: (beta1 * b - params.premium).abs() * discount,
    })
}

/// Everything measured from one batch of threshold-strategy paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdStats {
    pub b: f64,
    /// Mean discounted payoff `e^{-r̃τ}(β1 X_τ − P)`, zero on a miss.
    pub estimate: f64,
    pub std_error: f64,
    pub hit_fraction: f64,
    /// Mean hitting time among paths that hit; NaN if none did.
    pub mean_hit_time: f64,
    pub mean_hit_time_se: f64,
    pub n_paths: usize,
    pub warning: Option<TruncationWarning>,
}

impl ThresholdStats {
    /// Binomial standard error of `hit_fraction`.
    pub fn hit_fraction_se(&self) -> f64 {
        (self.hit_fraction * (1.0 - self.hit_fraction) / self.n_paths as f64).sqrt()
    }
}

fn simulate_hits(params: &ModelParams, b: f64, cfg: &SimConfig) -> Vec<Option<Hit>> {
    (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| first_hit(&mut path_rng(cfg.seed, i), params, b, cfg))
        .collect()
}

/// Simulates the strategy "buy when the wage first reaches `b`".
pub fn simulate_threshold(params: &ModelParams, b: f64, cfg: &SimConfig) -> Result<ThresholdStats> {
    params.validate()?;
    cfg.validate()?;
    if !(b >= 0.0) || !b.is_finite() {
        return Err(ModelError::domain("b", b, "must be finite and non-negative"));
    }
    let derived = model::solve(params)?.derived;
    let hits = simulate_hits(params, b, cfg);
    let payoff = |h: &Option<Hit>| match h {
        Some(h) => (-derived.r_tilde * h.tau).exp() * (derived.beta1 * h.wage - params.premium),
        None => 0.0,
    };
    let (estimate, std_error, _) = mean_and_se(hits.iter().map(payoff));
    let n_hits = hits.iter().filter(|h| h.is_some()).count();
    let (mean_hit_time, mean_hit_time_se, _) = mean_and_se(hits.iter().flatten().map(|h| h.tau));
    let std_error = if cfg.n_paths > 1 { std_error } else { 0.0 };
    Ok(ThresholdStats {
        b,
        estimate,
        std_error,
        hit_fraction: n_hits as f64 / cfg.n_paths as f64,
        mean_hit_time,
        mean_hit_time_se: if n_hits > 1 { mean_hit_time_se } else { f64::NAN },
        n_paths: cfg.n_paths,
        warning: truncation(params, derived.beta1, b, cfg.horizon),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
    pub warning: Option<TruncationWarning>,
}

/// Monte Carlo estimate of the threshold strategy's expected net present value.
pub fn mc_enpv(params: &ModelParams, b: f64, cfg: &SimConfig) -> Result<Estimate> {
    let s = simulate_threshold(params, b, cfg)?;
    Ok(Estimate {
        estimate: s.estimate,
        std_error: s.std_error,
        warning: s.warning,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HittingStats {
    pub hit_fraction: f64,
    pub hit_fraction_se: f64,
    pub mean_hit_time_conditional: f64,
    pub mean_hit_time_se: f64,
    pub warning: Option<TruncationWarning>,
}

/// Empirical hit frequency and conditional mean hitting time of `b`.
pub fn mc_hitting_stats(params: &ModelParams, b: f64, cfg: &SimConfig) -> Result<HittingStats> {
    let s = simulate_threshold(params, b, cfg)?;
    Ok(HittingStats {
        hit_fraction: s.hit_fraction,
        hit_fraction_se: s.hit_fraction_se(),
        mean_hit_time_conditional: if s.hit_fraction == 1.0 && s.b <= params.x { 0.0 } else { s.mean_hit_time },
        mean_hit_time_se: s.mean_hit_time_se,
        warning: s.warning,
    })
}

/// The threshold strategy simulated with every clock explicit: the job is
/// lost at an exponential time with rate `λ0`, a loss before entry forfeits
/// the policy, and after entry the payoff is `β X_{τ0}` discounted at `r`,
/// less the premium paid at entry. Its mean should equal the reduced eNPV.
pub fn mc_enpv_full_clock(params: &ModelParams, b: f64, cfg: &SimConfig) -> Result<Estimate> {
    params.validate()?;
    cfg.validate()?;
    if params.mortality.is_some_and(|m| m.lambda2 != 0.0) {
        return Err(ModelError::Config("the full-clock simulation does not model mortality".into()));
    }
    let beta1 = model::solve(params)?.derived.beta1;
    let nu = params.mu - 0.5 * params.sigma * params.sigma;
    let job_loss = Exp::new(params.lambda0).expect("lambda0 > 0");
    let payoffs: Vec<f64> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(cfg.seed, i);
            let hit = first_hit(&mut rng, params, b, cfg);
            let tau0 = job_loss.sample(&mut rng);
            match hit {
                Some(h) if tau0 > h.tau => {
                    let employed = tau0 - h.tau;
                    let z: f64 = rng.sample(StandardNormal);
                    let final_wage = h.wage * (nu * employed + params.sigma * employed.sqrt() * z).exp();
                    (-params.r * tau0).exp() * params.beta * final_wage
                        - (-params.r * h.tau).exp() * params.premium
                }
                _ => 0.0,
            }
        })
        .collect();
    let (estimate, std_error, _) = mean_and_se(payoffs.into_iter());
    Ok(Estimate {
        estimate,
        std_error,
        warning: truncation(params, beta1, b, cfg.horizon),
    })
}

/// Monte Carlo value of consuming `c` per week during the unemployment spell
/// that follows the job loss, discounted at `r`.
pub fn mc_consumption_gamma(
    c: f64,
    r: f64,
    lambda0: f64,
    lambda1: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Estimate> {
    if !(lambda0 > 0.0) {
        return Err(ModelError::domain("lambda0", lambda0, "must be positive"));
    }
    if !(lambda1 > 0.0) {
        return Err(ModelError::domain("lambda1", lambda1, "must be positive"));
    }
    if !(r >= 0.0) {
        return Err(ModelError::domain("r", r, "must be non-negative"));
    }
    if n_paths == 0 {
        return Err(ModelError::domain("n_paths", 0.0, "must be at least 1"));
    }
    let loss = Exp::new(lambda0).expect("lambda0 > 0");
    let spell = Exp::new(lambda1).expect("lambda1 > 0");
    let values: Vec<f64> = (0..n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(seed, i);
            let tau0 = loss.sample(&mut rng);
            let tau1 = spell.sample(&mut rng);
            let annuity = if r == 0.0 { tau1 } else { -(-r * tau1).exp_m1() / r };
            (-r * tau0).exp() * c * annuity
        })
        .collect();
    let (estimate, std_error, _) = mean_and_se(values.into_iter());
    Ok(Estimate { estimate, std_error, warning: None })
}
