mod fmt;
mod scenario;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};
use uistop::estimation::{self, SequentialDecision};
use uistop::hitting::{self, maximize_enpv, Grid, ThresholdPolicy};
use uistop::montecarlo::simulate_threshold;
use uistop::schedule::{self, BenefitSchedule};
use uistop::sensitivity::{self, Target, Window};
use uistop::utility::{self, MaxPremium, UtilityConfig, Variant};
use uistop::{model, ModelParams, Regime};

use fmt::{annualize, sig7};
use scenario::{Format, Scenario, SimArgs};

#[derive(Parser)]
#[command(name = "uistop", version, about = "Optimal timing of a voluntary unemployment insurance purchase")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutArgs {
    /// Write to this file instead of standard output.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct ConfigArg {
    /// Scenario file (TOML).
    #[arg(long, short)]
    config: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetName {
    BStar,
    Value,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantName {
    HitProbRaw,
    HitProbPowered,
    MeanTimeExp,
    MeanTimePowered,
}

impl From<VariantName> for Variant {
    fn from(v: VariantName) -> Self {
        match v {
            VariantName::HitProbRaw => Variant::HitProbRaw,
            VariantName::HitProbPowered => Variant::HitProbPowered,
            VariantName::MeanTimeExp => Variant::MeanTimeExp,
            VariantName::MeanTimePowered => Variant::MeanTimePowered,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Optimal threshold, value and hitting-time summary.
    Solve {
        #[command(flatten)]
        config: ConfigArg,
        /// Current wage, overriding `x0`.
        #[arg(long)]
        x: Option<f64>,
        /// Also locate the threshold by brute-force grid search.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 50_000)]
        grid_points: usize,
        /// Write the scenario back out, normalised, to this file.
        #[arg(long)]
        save_scenario: Option<PathBuf>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte Carlo evaluation of threshold strategies.
    Simulate {
        #[command(flatten)]
        config: ConfigArg,
        /// Thresholds to simulate; defaults to the optimal one.
        #[arg(long = "b", num_args = 1..)]
        thresholds: Vec<f64>,
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Drift and volatility estimates from a `week,wage` CSV.
    Estimate {
        #[arg(long, short)]
        input: PathBuf,
        /// Also run the one-sided drift test at this level.
        #[arg(long)]
        alpha: Option<f64>,
        /// Known volatility for the drift test.
        #[arg(long)]
        sigma: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Week-by-week buy-or-wait trace over a `week,wage` CSV.
    Decide {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, short)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        sigma: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Derivatives in mu and lambda0, or level curves of b* or v.
    Sensitivity {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        x: Option<f64>,
        /// Emit the level curve at this level instead of the derivative table.
        #[arg(long, num_args = 1..)]
        isoline: Vec<f64>,
        #[arg(long, value_enum, default_value = "b-star")]
        target: TargetName,
        /// Range of lambda0 as `lo:hi`.
        #[arg(long)]
        lambda0_range: Option<String>,
        /// Range of mu as `lo:hi`.
        #[arg(long)]
        mu_range: Option<String>,
        #[arg(long, default_value_t = 400)]
        grid: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Threshold and value when entering early is valued by `kappa`.
    Utility {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        kappa: f64,
        #[arg(long, value_enum, default_value = "hit-prob-raw")]
        variant: VariantName,
        /// Weekly consumption need, for the largest acceptable premium.
        #[arg(long)]
        consumption: Option<f64>,
        #[arg(long)]
        x: Option<f64>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Benefit rate and discounted benefit by week of the spell.
    Schedule {
        /// Scenario with a `[schedule]` table; the 1990s French schedule otherwise.
        #[arg(long, short)]
        config: Option<PathBuf>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        lambda1: Option<f64>,
        #[arg(long, default_value_t = 104.0)]
        weeks: f64,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        /// Print only the spell value per unit wage.
        #[arg(long)]
        beta: bool,
        #[command(flatten)]
        out: OutArgs,
    },
}

/// Output destination and format after merging flags with `[output]`.
struct Sink {
    writer: Box<dyn Write>,
    format: Format,
}

impl Sink {
    fn open(args: &OutArgs, scenario: Option<&Scenario>, default: Format) -> Result<Self> {
        let section = scenario.and_then(|s| s.output.as_ref());
        let path = args.output.clone().or_else(|| section.and_then(|o| o.path.clone()));
        let format = args.format.or_else(|| section.and_then(|o| o.format)).unwrap_or(default);
        let writer: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(
                File::create(&p).with_context(|| format!("creating {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Sink { writer, format })
    }

    /// Writes named scalars as `key = value` lines, a two-column CSV or a
    /// JSON object.
    fn record(&mut self, fields: &[(&str, Value)]) -> Result<()> {
        match self.format {
            Format::Json => {
                let map: Map<String, Value> = fields.iter().map(|(k, v)| (k.to_string(), v.clone())).collect();
                serde_json::to_writer_pretty(&mut self.writer, &map)?;
                writeln!(self.writer)?;
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut self.writer);
                w.write_record(["key", "value"])?;
                for (k, v) in fields {
                    w.write_record([*k, &show(v)])?;
                }
                w.flush()?;
            }
            Format::Text => {
                for (k, v) in fields {
                    writeln!(self.writer, "{k} = {}", show(v))?;
                }
            }
        }
        Ok(())
    }

    /// Writes rows under a header as CSV, or as a JSON array of objects.
    fn table(&mut self, header: &[&str], rows: &[Vec<Value>]) -> Result<()> {
        match self.format {
            Format::Json => {
                let list: Vec<Value> = rows
                    .iter()
                    .map(|r| Value::Object(header.iter().map(|h| h.to_string()).zip(r.iter().cloned()).collect()))
                    .collect();
                serde_json::to_writer_pretty(&mut self.writer, &list)?;
                writeln!(self.writer)?;
            }
            Format::Csv | Format::Text => {
                let mut w = csv::Writer::from_writer(&mut self.writer);
                w.write_record(header)?;
                for r in rows {
                    w.write_record(r.iter().map(show))?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }

    fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

fn show(v: &Value) -> String {
    match v {
        Value::Number(n) => sig7(n.as_f64().unwrap_or(f64::NAN)),
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

/// JSON has no infinities or NaN: infinities become the strings `inf` and
/// `-inf`, NaN becomes `null`.
fn num(x: f64) -> Value {
    match serde_json::Number::from_f64(x) {
        Some(n) => Value::Number(n),
        None if x.is_nan() => Value::Null,
        None => Value::String(sig7(x)),
    }
}

fn load(config: &ConfigArg, x: Option<f64>) -> Result<(Scenario, ModelParams)> {
    let scenario = Scenario::load(&config.config)?;
    let mut params = scenario.model()?;
    if let Some(x) = x {
        params = params.with_x(x);
        params.validate()?;
    }
    Ok((scenario, params))
}

fn parse_range(text: &str) -> Result<(f64, f64)> {
    let (lo, hi) = text.split_once(':').with_context(|| format!("range `{text}` must look like lo:hi"))?;
    let lo: f64 = lo.trim().parse().with_context(|| format!("bad lower bound in `{text}`"))?;
    let hi: f64 = hi.trim().parse().with_context(|| format!("bad upper bound in `{text}`"))?;
    if !(lo < hi) {
        bail!("range `{text}` must have lo < hi");
    }
    Ok((lo, hi))
}

fn read_wages(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let mut obs = Vec::new();
    for (i, row) in reader.deserialize::<(f64, f64)>().enumerate() {
        obs.push(row.with_context(|| format!("{}: bad row {}", path.display(), i + 1))?);
    }
    Ok(obs)
}

fn solve_cmd(
    config: &ConfigArg,
    x: Option<f64>,
    oracle: bool,
    grid_points: usize,
    save: Option<&Path>,
    out: &OutArgs,
) -> Result<()> {
    let (scenario, p) = load(config, x)?;
    if let Some(path) = save {
        std::fs::write(path, scenario.to_toml()?).with_context(|| format!("writing {}", path.display()))?;
    }
    let s = model::solve(&p)?;
    let mut fields = vec![
        ("regime", json!(match s.regime {
            Regime::Stochastic => "stochastic",
            Regime::Deterministic => "deterministic",
        })),
        ("r_tilde", num(s.derived.r_tilde)),
        ("beta1", num(s.derived.beta1)),
        ("q_star", num(s.derived.q_star)),
        ("b_star", num(s.b_star)),
        ("x0", num(p.x)),
        ("value", num(s.value(p.x))),
        ("decision", json!(if s.should_stop(p.x) { "buy_now" } else { "wait" })),
    ];
    match s.regime {
        Regime::Stochastic => {
            let policy = ThresholdPolicy::new(&p, s.b_star)?;
            fields.push(("hit_probability", num(hitting::hit_probability(&policy))));
            fields.push(("mean_hit_time", num(hitting::mean_hitting_time(&policy))));
        }
        Regime::Deterministic => {
            let d = model::deterministic_threshold(&p)?;
            fields.push(("entry_week", num(d.t_star)));
        }
    }
    fields.push(("r_annual", num(annualize(p.r))));
    fields.push(("mu_annual", num(annualize(p.mu))));
    if oracle {
        let grid = Grid { b_min: 0.5 * p.x.min(s.b_star), b_max: 2.0 * p.x.max(s.b_star), n: grid_points };
        let m = maximize_enpv(&p, &grid)?;
        fields.push(("grid_b_star", num(m.b_hat)));
        fields.push(("grid_value", num(m.value)));
        fields.push(("grid_step", num(grid.step())));
    }
    let mut sink = Sink::open(out, Some(&scenario), Format::Text)?;
    sink.record(&fields)?;
    sink.finish()
}

fn simulate_cmd(config: &ConfigArg, thresholds: &[f64], sim: &SimArgs, out: &OutArgs) -> Result<()> {
    let (scenario, p) = load(config, None)?;
    let cfg = scenario::sim_config(&p, scenario.sim.as_ref(), sim)?;
    let bs = if thresholds.is_empty() { vec![model::solve(&p)?.b_star] } else { thresholds.to_vec() };
    let mut rows = Vec::with_capacity(bs.len());
    for b in bs {
        let st = simulate_threshold(&p, b, &cfg)?;
        if let Some(w) = st.warning {
            eprintln!("warning: b = {}: {w}", sig7(b));
        }
        rows.push(vec![num(st.b), num(st.estimate), num(st.std_error), num(st.hit_fraction), num(st.mean_hit_time)]);
    }
    let mut sink = Sink::open(out, Some(&scenario), Format::Csv)?;
    sink.table(&["b", "estimate", "std_error", "hit_fraction", "mean_hit_time"], &rows)?;
    sink.finish()
}

fn estimate_cmd(input: &Path, alpha: Option<f64>, sigma: Option<f64>, out: &OutArgs) -> Result<()> {
    let obs = read_wages(input)?;
    let report = estimation::estimate(&obs)?;
    let mut doc = serde_json::to_value(report)?;
    let map = doc.as_object_mut().expect("report serialises to an object");
    map.insert("mu_hat_annual".into(), num(annualize(report.mu_hat)));
    if let Some(alpha) = alpha {
        let t = estimation::test_drift(&obs, alpha, sigma)?;
        map.insert("drift_test".into(), serde_json::to_value(t)?);
    }
    let mut sink = Sink::open(out, None, Format::Json)?;
    match sink.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut sink.writer, &doc)?;
            writeln!(sink.writer)?;
        }
        _ => {
            let fields: Vec<(&str, Value)> = map.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
            sink.record(&fields)?;
        }
    }
    sink.finish()
}

fn decide_cmd(config: &ConfigArg, input: &Path, alpha: f64, sigma: Option<f64>, out: &OutArgs) -> Result<()> {
    let (scenario, p) = load(config, None)?;
    let b_star = model::solve(&p)?.b_star;
    let mut seq = SequentialDecision::new(b_star, alpha, sigma)?;
    let mut reader = csv::Reader::from_path(input).with_context(|| format!("reading {}", input.display()))?;
    let mut sink = Sink::open(out, Some(&scenario), Format::Csv)?;
    let mut w = csv::Writer::from_writer(&mut sink.writer);
    w.write_record(["week", "wage", "action"])?;
    for (i, row) in reader.deserialize::<(f64, f64)>().enumerate() {
        let (week, wage) = row.with_context(|| format!("{}: bad row {}", input.display(), i + 1))?;
        let step = seq.observe(week, wage)?;
        let action = serde_json::to_value(step.action)?;
        w.write_record([sig7(step.week), sig7(step.wage), show(&action)])?;
        if seq.decision().is_some() {
            break;
        }
    }
    w.flush()?;
    drop(w);
    sink.finish()
}

#[allow(clippy::too_many_arguments)]
fn sensitivity_cmd(
    config: &ConfigArg,
    x: Option<f64>,
    levels: &[f64],
    target: TargetName,
    lambda0_range: Option<&str>,
    mu_range: Option<&str>,
    grid: usize,
    out: &OutArgs,
) -> Result<()> {
    let (scenario, p) = load(config, x)?;
    let mut sink = Sink::open(out, Some(&scenario), Format::Csv)?;
    if levels.is_empty() {
        let d = sensitivity::derivatives(&p, p.x)?;
        let i = d.increments;
        let rows = vec![
            vec![json!("dq_star"), num(d.dq_dmu), num(d.dq_dlambda0)],
            vec![json!("db_star"), num(d.db_dmu), num(d.db_dlambda0)],
            vec![json!("dv"), num(d.dv_dmu), num(d.dv_dlambda0)],
            vec![json!("step"), num(i.d_mu), num(i.d_lambda0)],
            vec![json!("delta_b_star"), num(i.db_mu), num(i.db_lambda0)],
            vec![json!("delta_v"), num(i.dv_mu), num(i.dv_lambda0)],
        ];
        sink.table(&["quantity", "mu", "lambda0"], &rows)?;
    } else {
        let lambda0 = match lambda0_range {
            Some(t) => parse_range(t)?,
            None => (0.25 * p.lambda0, 4.0 * p.lambda0),
        };
        let mu = match mu_range {
            Some(t) => parse_range(t)?,
            None => (p.mu - 0.005, p.mu + 0.005),
        };
        let window = Window { n: grid, ..Window::new(lambda0, mu) };
        let target = match target {
            TargetName::BStar => Target::BStar,
            TargetName::Value => Target::Value,
        };
        let mut rows = Vec::new();
        for &level in levels {
            for (l, m) in sensitivity::isolines(&p, &window, level, target)? {
                rows.push(vec![num(level), num(l), num(m)]);
            }
        }
        sink.table(&["level", "lambda0", "mu"], &rows)?;
    }
    sink.finish()
}

fn utility_cmd(
    config: &ConfigArg,
    kappa: f64,
    variant: VariantName,
    consumption: Option<f64>,
    x: Option<f64>,
    out: &OutArgs,
) -> Result<()> {
    let (scenario, p) = load(config, x)?;
    let sol = utility::solve(&p, &UtilityConfig { kappa, variant: variant.into() })?;
    let kappa_dag = utility::kappa_dag(&p, p.x)?;
    let p_max = match consumption {
        None => Value::Null,
        Some(c) => {
            let lambda1 = scenario
                .params
                .lambda1
                .context("--consumption needs `lambda1` in the scenario")?;
            let gamma = utility::consumption_gamma(c, p.r, p.lambda0, lambda1)?;
            match utility::max_premium(&p, p.x, gamma)? {
                MaxPremium::Finite(v) => num(v),
                MaxPremium::Unbounded => json!("unbounded"),
            }
        }
    };
    let fields = [
        ("b_dag", num(sol.b_dag)),
        ("u_dag", num(sol.u_dag)),
        ("kappa_dag", num(kappa_dag)),
        ("p_max", p_max),
    ];
    let mut sink = Sink::open(out, Some(&scenario), Format::Json)?;
    sink.record(&fields)?;
    sink.finish()
}

#[allow(clippy::too_many_arguments)]
fn schedule_cmd(
    config: Option<&Path>,
    r: Option<f64>,
    lambda1: Option<f64>,
    weeks: f64,
    step: f64,
    beta_only: bool,
    out: &OutArgs,
) -> Result<()> {
    let scenario = config.map(Scenario::load).transpose()?;
    let doc = scenario.as_ref().map(|s| &s.params);
    let sched = doc.and_then(|d| d.schedule.clone()).unwrap_or_else(BenefitSchedule::french_1990s);
    let r = r.or(doc.map(|d| d.r)).context("give --r or a scenario")?;
    let mut sink = Sink::open(out, scenario.as_ref(), if beta_only { Format::Text } else { Format::Csv })?;
    if beta_only {
        let l1 = lambda1.or(doc.and_then(|d| d.lambda1)).context("give --lambda1 or `lambda1` in the scenario")?;
        sink.record(&[("beta", num(schedule::beta(&sched, l1, r)?))])?;
    } else {
        if !(step > 0.0) || !(weeks >= 0.0) {
            bail!("--step must be positive and --weeks non-negative");
        }
        let n = (weeks / step).floor() as usize;
        let mut rows = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let t = k as f64 * step;
            rows.push(vec![num(t), num(sched.rate(t)), num(schedule::discounted_benefit(&sched, t, r)?)]);
        }
        sink.table(&["week", "rate", "discounted_benefit"], &rows)?;
    }
    sink.finish()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Solve { config, x, oracle, grid_points, save_scenario, out } => {
            solve_cmd(&config, x, oracle, grid_points, save_scenario.as_deref(), &out)
        }
        Command::Simulate { config, thresholds, sim, out } => simulate_cmd(&config, &thresholds, &sim, &out),
        Command::Estimate { input, alpha, sigma, out } => estimate_cmd(&input, alpha, sigma, &out),
        Command::Decide { config, input, alpha, sigma, out } => decide_cmd(&config, &input, alpha, sigma, &out),
        Command::Sensitivity { config, x, isoline, target, lambda0_range, mu_range, grid, out } => sensitivity_cmd(
            &config,
            x,
            &isoline,
            target,
            lambda0_range.as_deref(),
            mu_range.as_deref(),
            grid,
            &out,
        ),
        Command::Utility { config, kappa, variant, consumption, x, out } => {
            utility_cmd(&config, kappa, variant, consumption, x, &out)
        }
        Command::Schedule { config, r, lambda1, weeks, step, beta, out } => {
            schedule_cmd(config.as_deref(), r, lambda1, weeks, step, beta, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            let msg = msg.trim_end();
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
