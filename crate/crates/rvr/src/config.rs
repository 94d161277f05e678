//! Run configuration file.
//!
//! A single TOML file describes the data source, the strategy, the pool and
//! CEX cost parameters and, for grid commands, the swept axes. Every run
//! writes the fully resolved configuration next to its outputs so the run can
//! be repeated from that file alone.

use std::fs;
use std::path::{Path, PathBuf};

use rvr_core::amm::ArbParams;
use rvr_core::bps;
use rvr_core::cex::CexCostParams;
use rvr_core::series::PriceSeries;
use rvr_core::strategy::{StrategyKind, StrategyParams};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market_data::{generate_gbm, load_price_csv, GbmSpec};

/// Name of the resolved configuration written into every output directory.
pub const EFFECTIVE_CONFIG: &str = "effective_config.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub initial_value_usd: f64,
    /// Seed for synthetic data; historical CSV runs ignore it.
    #[serde(default)]
    pub seed: u64,
    pub data: DataSource,
    pub strategy: StrategyConfig,
    #[serde(default)]
    pub amm: AmmConfig,
    #[serde(default)]
    pub cex: CexConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<GridAxes>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cube: Option<GridAxes>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
    /// Expected asset columns for CSV data.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gbm: Option<GbmConfig>,
}

/// Synthetic data; the seed comes from the top-level `seed`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GbmConfig {
    pub labels: Vec<String>,
    pub initial_prices: Vec<f64>,
    pub drifts: Vec<f64>,
    pub volatilities: Vec<f64>,
    pub correlation: Vec<Vec<f64>>,
    pub steps: usize,
    #[serde(default = "default_start")]
    pub start_timestamp: i64,
    #[serde(default = "default_step_seconds")]
    pub step_seconds: i64,
}

fn default_start() -> i64 {
    1_609_459_200
}

fn default_step_seconds() -> i64 {
    60
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKindConfig {
    Momentum,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    pub kind: StrategyKindConfig,
    pub base_weights: Vec<f64>,
    #[serde(default = "default_memory_days")]
    pub memory_days: f64,
    #[serde(default = "default_k")]
    pub k: f64,
    #[serde(default = "default_min_weight")]
    pub min_weight: f64,
    /// Defaults to one day of steps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rebalance_interval: Option<usize>,
    /// Defaults to `rebalance_interval`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interpolation_steps: Option<usize>,
}

fn default_memory_days() -> f64 {
    10.0
}

fn default_k() -> f64 {
    20.0
}

fn default_min_weight() -> f64 {
    0.03
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmmConfig {
    /// Pool fee in basis points; `gamma = 1 - fee`.
    #[serde(default)]
    pub pool_fee_bps: f64,
    #[serde(default)]
    pub gas_usd: f64,
    #[serde(default = "default_delay")]
    pub discovery_delay_steps: usize,
    #[serde(default)]
    pub noise_multiplier: f64,
}

fn default_delay() -> usize {
    1
}

impl Default for AmmConfig {
    fn default() -> Self {
        Self { pool_fee_bps: 0.0, gas_usd: 0.0, discovery_delay_steps: default_delay(), noise_multiplier: 0.0 }
    }
}

impl AmmConfig {
    pub fn gamma(&self) -> f64 {
        gamma_from_bps(self.pool_fee_bps)
    }

    pub fn arb_params(&self) -> ArbParams {
        ArbParams {
            gas_cost_usd: self.gas_usd,
            discovery_delay_steps: self.discovery_delay_steps,
            noise_multiplier: self.noise_multiplier,
        }
    }
}

pub fn gamma_from_bps(fee_bps: f64) -> f64 {
    1.0 - bps(fee_bps)
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CexConfig {
    #[serde(default)]
    pub tau_cex_bps: f64,
    /// Per-asset bid-ask spread in basis points; defaults to 2 bps for every asset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spread_bps: Option<Vec<f64>>,
}

/// Default proportional spread applied when none is configured.
pub const DEFAULT_SPREAD_BPS: f64 = 2.0;

impl CexConfig {
    pub fn spreads_bps(&self, n_assets: usize) -> Vec<f64> {
        self.spread_bps.clone().unwrap_or_else(|| vec![DEFAULT_SPREAD_BPS; n_assets])
    }

    pub fn cost_params(&self, n_assets: usize) -> CexCostParams {
        CexCostParams {
            tau_cex: bps(self.tau_cex_bps),
            spreads: self.spreads_bps(n_assets).into_iter().map(bps).collect(),
        }
    }
}

/// One grid axis: an explicit list or `count` evenly spaced values from `from` to `to`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Axis {
    Values(Vec<f64>),
    Range { from: f64, to: f64, count: usize },
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Axis::Values(ref v) => v.clone(),
            Axis::Range { from, to, count } => match count {
                0 => Vec::new(),
                1 => vec![from],
                _ => (0..count).map(|i| from + (to - from) * i as f64 / (count - 1) as f64).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxes {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub memory_days: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pool_fee_bps: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gas_usd: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_cex_bps: Option<Axis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_multiplier: Option<Axis>,
}

impl GridAxes {
    fn resolve(&mut self) {
        for axis in [
            &mut self.memory_days,
            &mut self.k,
            &mut self.pool_fee_bps,
            &mut self.gas_usd,
            &mut self.tau_cex_bps,
            &mut self.noise_multiplier,
        ]
        .into_iter()
        .flatten()
        {
            *axis = Axis::Values(axis.values());
        }
    }

    fn validate(&self, section: &str, required: &[&str]) -> Result<()> {
        let named = [
            ("memory_days", &self.memory_days),
            ("k", &self.k),
            ("pool_fee_bps", &self.pool_fee_bps),
            ("gas_usd", &self.gas_usd),
            ("tau_cex_bps", &self.tau_cex_bps),
            ("noise_multiplier", &self.noise_multiplier),
        ];
        for (name, axis) in named {
            match axis {
                Some(a) if a.values().is_empty() => {
                    return Err(Error::Config(format!("[{section}] axis `{name}` is empty")));
                }
                Some(a) if a.values().iter().any(|v| !v.is_finite()) => {
                    return Err(Error::Config(format!("[{section}] axis `{name}` has non-finite values")));
                }
                None if required.contains(&name) => {
                    return Err(Error::Config(format!("[{section}] requires axis `{name}`")));
                }
                _ => {}
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
    /// Sweep cells between partial-result flushes.
    #[serde(default = "default_flush_every")]
    pub flush_every: usize,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_flush_every() -> usize {
    100
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_out_dir(), flush_every: default_flush_every() }
    }
}

impl RunConfig {
    /// Reads, resolves and validates a configuration file. Relative data paths
    /// are resolved against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(csv) = &config.data.csv {
            if csv.is_relative() {
                config.data.csv = Some(base.join(csv));
            }
        }
        config.resolve();
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let mut config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.resolve();
        config.validate()?;
        Ok(config)
    }

    /// Fills defaults that depend on other fields and expands axis ranges.
    fn resolve(&mut self) {
        if let Some(gbm) = &self.data.gbm {
            if self.data.labels.is_none() {
                self.data.labels = Some(gbm.labels.clone());
            }
        }
        let step_seconds = self.data.gbm.as_ref().map_or(60, |g| g.step_seconds).max(1);
        let day = (86_400 / step_seconds).max(1) as usize;
        let interval = *self.strategy.rebalance_interval.get_or_insert(day);
        self.strategy.interpolation_steps.get_or_insert(interval);
        if self.cex.spread_bps.is_none() {
            if let Some(labels) = &self.data.labels {
                self.cex.spread_bps = Some(vec![DEFAULT_SPREAD_BPS; labels.len()]);
            }
        }
        if let Some(grid) = self.sweep.as_mut() {
            grid.resolve();
        }
        if let Some(grid) = self.cube.as_mut() {
            grid.resolve();
        }
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.data.csv, &self.data.gbm) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return Err(Error::Config("[data] needs exactly one of `csv` or `gbm`".into())),
        }
        if !(self.initial_value_usd > 0.0 && self.initial_value_usd.is_finite()) {
            return Err(Error::Config(format!("initial_value_usd must be positive, got {}", self.initial_value_usd)));
        }
        if !(self.amm.pool_fee_bps >= 0.0 && self.amm.pool_fee_bps < 10_000.0) {
            return Err(Error::Config(format!("pool_fee_bps must be in [0, 10000), got {}", self.amm.pool_fee_bps)));
        }
        self.amm.arb_params().validate()?;
        if !(self.cex.tau_cex_bps >= 0.0 && self.cex.tau_cex_bps < 10_000.0) {
            return Err(Error::Config(format!("tau_cex_bps must be in [0, 10000), got {}", self.cex.tau_cex_bps)));
        }
        if self.output.flush_every == 0 {
            return Err(Error::Config("output.flush_every must be >= 1".into()));
        }
        if let Some(labels) = &self.data.labels {
            self.strategy_params().validate(labels.len())?;
            self.cex.cost_params(labels.len()).validate(labels.len())?;
        }
        if let Some(grid) = &self.sweep {
            grid.validate("sweep", &["memory_days", "k"])?;
        }
        if let Some(grid) = &self.cube {
            grid.validate("cube", &["pool_fee_bps", "gas_usd", "tau_cex_bps"])?;
        }
        Ok(())
    }

    pub fn strategy_params(&self) -> StrategyParams {
        let s = &self.strategy;
        let interval = s.rebalance_interval.unwrap_or(1440);
        StrategyParams {
            kind: match s.kind {
                StrategyKindConfig::Momentum => StrategyKind::Momentum,
                StrategyKindConfig::Constant => StrategyKind::Constant,
            },
            base_weights: s.base_weights.clone(),
            memory_days: s.memory_days,
            aggressiveness: s.k,
            min_weight: s.min_weight,
            rebalance_interval: interval,
            interpolation_steps: s.interpolation_steps.unwrap_or(interval),
        }
    }

    /// Loads or generates the price series.
    pub fn load_series(&self) -> Result<PriceSeries> {
        let series = match (&self.data.csv, &self.data.gbm) {
            (Some(path), _) => load_price_csv(path, self.data.labels.as_deref())?,
            (None, Some(g)) => generate_gbm(&GbmSpec {
                labels: g.labels.clone(),
                initial_prices: g.initial_prices.clone(),
                drifts: g.drifts.clone(),
                volatilities: g.volatilities.clone(),
                correlation: g.correlation.clone(),
                steps: g.steps,
                seed: self.seed,
                start_timestamp: g.start_timestamp,
                step_seconds: g.step_seconds,
            })?,
            (None, None) => return Err(Error::Config("no data source".into())),
        };
        self.strategy_params().validate(series.n_assets())?;
        self.cex.cost_params(series.n_assets()).validate(series.n_assets())?;
        Ok(series)
    }

    /// Resolved configuration as TOML; data paths are made absolute.
    pub fn to_toml(&self) -> Result<String> {
        let mut echo = self.clone();
        if let Some(csv) = &echo.data.csv {
            if let Ok(abs) = csv.canonicalize() {
                echo.data.csv = Some(abs);
            }
        }
        toml::to_string(&echo).map_err(|e| Error::Config(format!("cannot serialise config: {e}")))
    }

    pub fn write_effective(&self, dir: &Path) -> Result<()> {
        let path = dir.join(EFFECTIVE_CONFIG);
        fs::write(&path, self.to_toml()?).map_err(|e| Error::io(path, e))
    }
}
