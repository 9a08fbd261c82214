//! Scenario files: the parameter document plus optional `[sim]` and
//! `[output]` tables.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use uistop::config::ParamsDoc;
use uistop::montecarlo::{Monitoring, SimConfig};
use uistop::ModelParams;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monitoring: Option<MonitoringName>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum MonitoringName {
    Exact,
    Grid,
}

impl From<MonitoringName> for Monitoring {
    fn from(m: MonitoringName) -> Self {
        match m {
            MonitoringName::Exact => Monitoring::Exact,
            MonitoringName::Grid => Monitoring::Grid,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    #[serde(flatten)]
    pub params: ParamsDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// The `[sim]` and `[output]` tables are split off first so that the
    /// remaining keys are checked strictly against the parameter document.
    pub fn parse(text: &str) -> Result<Self> {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| anyhow::anyhow!("{}", e.message()))?;
        let sim = table.remove("sim").map(|v| v.try_into::<SimSection>()).transpose()?;
        let output = table.remove("output").map(|v| v.try_into::<OutputSection>()).transpose()?;
        let params: ParamsDoc = table.try_into()?;
        Ok(Scenario { params, sim, output })
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn model(&self) -> Result<ModelParams> {
        Ok(self.params.to_params()?)
    }
}

/// Command-line overrides for the simulation settings.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct SimArgs {
    /// Number of simulated paths.
    #[arg(long)]
    pub paths: Option<usize>,
    /// 64-bit seed of the path generator.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Time step in weeks.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Weeks simulated before a path counts as a miss.
    #[arg(long)]
    pub horizon: Option<f64>,
    #[arg(long, value_enum)]
    pub monitoring: Option<MonitoringName>,
}

pub const DEFAULT_PATHS: usize = 100_000;

pub fn sim_config(params: &ModelParams, section: Option<&SimSection>, args: &SimArgs) -> Result<SimConfig> {
    let s = section.cloned().unwrap_or_default();
    let mut cfg = SimConfig::for_params(
        params,
        args.paths.or(s.paths).unwrap_or(DEFAULT_PATHS),
        args.seed.or(s.seed).unwrap_or(0),
    );
    if let Some(dt) = args.dt.or(s.dt) {
        cfg.dt = dt;
    }
    if let Some(h) = args.horizon.or(s.horizon) {
        cfg.horizon = h;
    }
    if let Some(m) = args.monitoring.or(s.monitoring) {
        cfg.monitoring = m.into();
    }
    if cfg.n_paths == 0 {
        bail!("--paths must be at least 1");
    }
    cfg.validate()?;
    Ok(cfg)
}
