//! Command implementations behind the `rvr` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rvr_core::amm::{pool_value, run_pool};
use rvr_core::bench::{lvr_reference, rvr, summarize, SummaryInputs};
use rvr_core::cex::run_cex;
use rvr_core::series::PriceSeries;
use rvr_core::strategy::{build_trajectory, StrategyKind};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::output::{numbered, write_summary, CsvOut};
use crate::sweep::{run_grid, CellResult, GridOutput, SweepGrid};

pub const SUMMARY_CSV: &str = "summary.csv";
pub const SERIES_CSV: &str = "series.csv";
pub const TRADES_CSV: &str = "trades.csv";
pub const CEX_STEPS_CSV: &str = "cex_steps.csv";
pub const TRAJECTORY_CSV: &str = "trajectory.csv";
pub const SWEEP_CSV: &str = "sweep_summary.csv";
pub const CUBE_CSV: &str = "cube_summary.csv";
pub const FIGURE_CFMM_CSV: &str = "returns_cfmm.csv";
pub const FIGURE_TFMM_CSV: &str = "returns_tfmm.csv";

/// Command-line overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

/// Loads the config and applies overrides; returns it with the output directory.
pub fn prepare(config_path: &Path, overrides: &Overrides) -> Result<(RunConfig, PathBuf)> {
    let mut config = RunConfig::load(config_path)?;
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    if let Some(out) = &overrides.out {
        config.output.dir = out.clone();
    }
    let dir = config.output.dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok((config, dir))
}

/// Full single run with per-step outputs.
pub fn simulate(config: &RunConfig, dir: &Path) -> Result<CellResult> {
    let series = config.load_series()?;
    config.write_effective(dir)?;
    let params = config.strategy_params();
    let traj = build_trajectory(&params, &series)?;
    let v0 = config.initial_value_usd;
    let n = series.n_assets();

    let mut out = CsvOut::create(&dir.join(TRAJECTORY_CSV), &header("step", &numbered("w", n)))?;
    for (t, row) in traj.rows().enumerate() {
        out.record(std::iter::once(t.to_string()).chain(row.iter().map(f64::to_string)))?;
    }
    out.finish()?;

    let mut trades = CsvOut::create(
        &dir.join(TRADES_CSV),
        &["step", "executed", "profit_usd", "volume_usd", "k_before", "k_after", "V_pool"],
    )?;
    let mut first_err = None;
    let pool = run_pool(&series, &traj, config.amm.gamma(), &config.amm.arb_params(), v0, |t, state, report| {
        if !(report.trade.executed || report.lapsed) || first_err.is_some() {
            return;
        }
        let row = [
            t.to_string(),
            u8::from(report.trade.executed).to_string(),
            report.trade.arb_profit_usd.to_string(),
            report.trade.volume_usd.to_string(),
            report.k_before.to_string(),
            report.k_after.to_string(),
            pool_value(state, series.row(t)).to_string(),
        ];
        if let Err(e) = trades.record(row) {
            first_err = Some(e);
        }
    })?;
    if let Some(e) = first_err {
        return Err(e);
    }
    trades.finish()?;

    let mut steps = CsvOut::create(
        &dir.join(CEX_STEPS_CSV),
        &["step", "V_cex", "cost_fees", "cost_spread", "turnover_usd"],
    )?;
    let cex = run_cex(&series, &traj, &config.cex.cost_params(n), v0, |t, step| {
        if first_err.is_some() {
            return;
        }
        let row = [
            t.to_string(),
            step.state.value.to_string(),
            step.cost_fees.to_string(),
            step.cost_spread.to_string(),
            step.turnover_usd.to_string(),
        ];
        if let Err(e) = steps.record(row) {
            first_err = Some(e);
        }
    })?;
    if let Some(e) = first_err {
        return Err(e);
    }
    steps.finish()?;

    let lvr = lvr_reference(&series, &traj, v0)?;
    let gap = rvr(&pool.values, &cex.values)?;
    let mut out = CsvOut::create(&dir.join(SERIES_CSV), &["step", "timestamp", "v_pool", "v_cex", "v_lvr", "rvr"])?;
    for t in 0..series.len() {
        out.record([
            t.to_string(),
            series.timestamps()[t].to_string(),
            pool.values[t].to_string(),
            cex.values[t].to_string(),
            lvr[t].to_string(),
            gap[t].to_string(),
        ])?;
    }
    out.finish()?;

    let last = series.len() - 1;
    let result = CellResult {
        strategy_id: "s0000".into(),
        cell: SweepGrid::single(config).cells()[0],
        summary: summarize(&SummaryInputs {
            initial_value: v0,
            final_pool_value: pool.values[last],
            final_cex_value: cex.values[last],
            final_lvr_value: lvr[last],
            pool_volume_usd: pool.volume_usd,
            span_minutes: series.span_minutes(),
        }),
    };
    write_summary(&dir.join(SUMMARY_CSV), std::slice::from_ref(&result))?;
    Ok(result)
}

fn header<'a>(first: &'a str, rest: &'a [String]) -> Vec<&'a str> {
    std::iter::once(first).chain(rest.iter().map(String::as_str)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Sweep,
    Cube,
}

impl GridKind {
    fn file(self) -> &'static str {
        match self {
            GridKind::Sweep => SWEEP_CSV,
            GridKind::Cube => CUBE_CSV,
        }
    }

    fn section(self) -> &'static str {
        match self {
            GridKind::Sweep => "sweep",
            GridKind::Cube => "cube",
        }
    }
}

/// Grid described by the `[sweep]` or `[cube]` section of `config`.
pub fn grid_for(config: &RunConfig, kind: GridKind) -> Result<SweepGrid> {
    let axes = match kind {
        GridKind::Sweep => config.sweep.as_ref(),
        GridKind::Cube => config.cube.as_ref(),
    }
    .ok_or_else(|| Error::Config(format!("no [{}] section in config", kind.section())))?;
    SweepGrid::from_axes(axes, config)
}

/// Runs a sweep or cube grid; returns the summary path and row count.
pub fn run_grid_command(config: &RunConfig, dir: &Path, kind: GridKind, workers: usize) -> Result<(PathBuf, usize)> {
    let grid = grid_for(config, kind)?;
    let series = config.load_series()?;
    config.write_effective(dir)?;
    eprintln!("{}: {} cells on {} workers", kind.section(), grid.len(), workers);
    let started = Instant::now();
    let path = dir.join(kind.file());
    let output = GridOutput { path: path.clone(), flush_every: config.output.flush_every, progress: true };
    let rows = run_grid(config, &series, &grid, workers, Some(&output))?;
    eprintln!("{}: {} cells in {:.1}s -> {}", kind.section(), rows.len(), started.elapsed().as_secs_f64(), path.display());
    Ok((path, rows.len()))
}

/// Cumulative return series `V(t)/V(0) - 1` for the pool, CEX and LVR benchmark.
fn write_returns(path: &Path, config: &RunConfig, series: &PriceSeries, kind: StrategyKind) -> Result<()> {
    let mut params = config.strategy_params();
    params.kind = kind;
    let traj = build_trajectory(&params, series)?;
    let v0 = config.initial_value_usd;
    let pool = run_pool(series, &traj, config.amm.gamma(), &config.amm.arb_params(), v0, |_, _, _| {})?;
    let cex = run_cex(series, &traj, &config.cex.cost_params(series.n_assets()), v0, |_, _| {})?;
    let lvr = lvr_reference(series, &traj, v0)?;
    let mut out = CsvOut::create(path, &["step", "timestamp", "pool_return", "cex_return", "lvr_return"])?;
    for t in 0..series.len() {
        out.record([
            t.to_string(),
            series.timestamps()[t].to_string(),
            (pool.values[t] / v0 - 1.0).to_string(),
            (cex.values[t] / v0 - 1.0).to_string(),
            (lvr[t] / v0 - 1.0).to_string(),
        ])?;
    }
    out.finish()
}

/// Cumulative-return series for a constant-weight pool and the configured momentum pool.
pub fn emit_figure_data(config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>> {
    let series = config.load_series()?;
    config.write_effective(dir)?;
    let cfmm = dir.join(FIGURE_CFMM_CSV);
    let tfmm = dir.join(FIGURE_TFMM_CSV);
    write_returns(&cfmm, config, &series, StrategyKind::Constant)?;
    write_returns(&tfmm, config, &series, StrategyKind::Momentum)?;
    Ok(vec![cfmm, tfmm])
}
