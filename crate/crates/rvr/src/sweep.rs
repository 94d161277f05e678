//! Parameter grids over strategies and cost settings.
//!
//! Cells are ordered lexicographically by
//! `(memory_days, k, pool_fee_bps, gas_usd, tau_cex_bps, nu)` with `nu`
//! varying fastest. Work is grouped per strategy: the weight trajectory and
//! LVR reference are built once, every distinct pool setting is simulated
//! once and every distinct CEX fee level is simulated once, then the cells are
//! assembled from those pieces. Results are collected in cell order, so the
//! output never depends on the number of workers.

use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use rvr_core::amm::run_pool;
use rvr_core::bench::{lvr_reference, summarize, RunSummary, SummaryInputs};
use rvr_core::cex::run_cex;
use rvr_core::series::PriceSeries;
use rvr_core::strategy::{build_trajectory, StrategyParams, WeightTrajectory};

use crate::config::{gamma_from_bps, CexConfig, GridAxes, RunConfig};
use crate::error::{Error, Result};
use crate::output::SummaryWriter;

/// Cartesian grid; axes not listed in the config take the base run's value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub memory_days: Vec<f64>,
    pub k: Vec<f64>,
    pub pool_fee_bps: Vec<f64>,
    pub gas_usd: Vec<f64>,
    pub tau_cex_bps: Vec<f64>,
    pub nu: Vec<f64>,
}

/// One grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub memory_days: f64,
    pub k: f64,
    pub pool_fee_bps: f64,
    pub gas_usd: f64,
    pub tau_cex_bps: f64,
    pub nu: f64,
}

impl Cell {
    pub fn coords(&self) -> String {
        format!(
            "(memory_days={}, k={}, pool_fee_bps={}, gas_usd={}, tau_cex_bps={}, nu={})",
            self.memory_days, self.k, self.pool_fee_bps, self.gas_usd, self.tau_cex_bps, self.nu
        )
    }

    /// The base configuration with this cell's parameters substituted.
    pub fn apply(&self, base: &RunConfig) -> RunConfig {
        let mut c = base.clone();
        c.strategy.memory_days = self.memory_days;
        c.strategy.k = self.k;
        c.amm.pool_fee_bps = self.pool_fee_bps;
        c.amm.gas_usd = self.gas_usd;
        c.amm.noise_multiplier = self.nu;
        c.cex.tau_cex_bps = self.tau_cex_bps;
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub strategy_id: String,
    pub cell: Cell,
    pub summary: RunSummary,
}

impl SweepGrid {
    /// The single cell described by the base configuration.
    pub fn single(base: &RunConfig) -> Self {
        Self {
            memory_days: vec![base.strategy.memory_days],
            k: vec![base.strategy.k],
            pool_fee_bps: vec![base.amm.pool_fee_bps],
            gas_usd: vec![base.amm.gas_usd],
            tau_cex_bps: vec![base.cex.tau_cex_bps],
            nu: vec![base.amm.noise_multiplier],
        }
    }

    pub fn from_axes(axes: &GridAxes, base: &RunConfig) -> Result<Self> {
        let single = Self::single(base);
        let pick = |axis: &Option<crate::config::Axis>, fallback: Vec<f64>| {
            axis.as_ref().map_or(fallback, |a| a.values())
        };
        let grid = Self {
            memory_days: pick(&axes.memory_days, single.memory_days),
            k: pick(&axes.k, single.k),
            pool_fee_bps: pick(&axes.pool_fee_bps, single.pool_fee_bps),
            gas_usd: pick(&axes.gas_usd, single.gas_usd),
            tau_cex_bps: pick(&axes.tau_cex_bps, single.tau_cex_bps),
            nu: pick(&axes.noise_multiplier, single.nu),
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, axis) in self.named() {
            if axis.is_empty() {
                return Err(Error::Config(format!("grid axis `{name}` is empty")));
            }
        }
        Ok(())
    }

    fn named(&self) -> [(&'static str, &Vec<f64>); 6] {
        [
            ("memory_days", &self.memory_days),
            ("k", &self.k),
            ("pool_fee_bps", &self.pool_fee_bps),
            ("gas_usd", &self.gas_usd),
            ("tau_cex_bps", &self.tau_cex_bps),
            ("nu", &self.nu),
        ]
    }

    pub fn len(&self) -> usize {
        self.named().iter().map(|(_, a)| a.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn cells_per_strategy(&self) -> usize {
        self.pool_fee_bps.len() * self.gas_usd.len() * self.tau_cex_bps.len() * self.nu.len()
    }

    /// All cells in output order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::with_capacity(self.len());
        for &memory_days in &self.memory_days {
            for &k in &self.k {
                out.extend(self.cost_cells(memory_days, k));
            }
        }
        out
    }

    fn cost_cells(&self, memory_days: f64, k: f64) -> Vec<Cell> {
        let mut out = Vec::with_capacity(self.cells_per_strategy());
        for &pool_fee_bps in &self.pool_fee_bps {
            for &gas_usd in &self.gas_usd {
                for &tau_cex_bps in &self.tau_cex_bps {
                    for &nu in &self.nu {
                        out.push(Cell { memory_days, k, pool_fee_bps, gas_usd, tau_cex_bps, nu });
                    }
                }
            }
        }
        out
    }
}

fn strategy_params(base: &RunConfig, memory_days: f64, k: f64) -> StrategyParams {
    let mut p = base.strategy_params();
    p.memory_days = memory_days;
    p.aggressiveness = k;
    p
}

fn tag(cell: &Cell) -> impl Fn(rvr_core::Error) -> Error + '_ {
    move |source| Error::Cell { coords: cell.coords(), source }
}

/// Runs one cell from scratch.
pub fn run_cell(base: &RunConfig, series: &PriceSeries, cell: &Cell) -> Result<RunSummary> {
    let config = cell.apply(base);
    let params = strategy_params(base, cell.memory_days, cell.k);
    let traj = build_trajectory(&params, series).map_err(tag(cell))?;
    let v0 = base.initial_value_usd;
    let pool = run_pool(series, &traj, config.amm.gamma(), &config.amm.arb_params(), v0, |_, _, _| {})
        .map_err(tag(cell))?;
    let cex = run_cex(series, &traj, &config.cex.cost_params(series.n_assets()), v0, |_, _| {})
        .map_err(tag(cell))?;
    let lvr = lvr_reference(series, &traj, v0).map_err(tag(cell))?;
    Ok(summarize(&SummaryInputs {
        initial_value: v0,
        final_pool_value: *pool.values.last().unwrap_or(&v0),
        final_cex_value: *cex.values.last().unwrap_or(&v0),
        final_lvr_value: *lvr.last().unwrap_or(&v0),
        pool_volume_usd: pool.volume_usd,
        span_minutes: series.span_minutes(),
    }))
}

struct PoolFinal {
    value: f64,
    volume_usd: f64,
}

/// All cells of one strategy, in cell order.
fn run_strategy(
    base: &RunConfig,
    series: &PriceSeries,
    grid: &SweepGrid,
    index: usize,
    memory_days: f64,
    k: f64,
) -> Result<Vec<CellResult>> {
    let cells = grid.cost_cells(memory_days, k);
    let first = cells[0];
    let params = strategy_params(base, memory_days, k);
    let traj = build_trajectory(&params, series).map_err(tag(&first))?;
    let v0 = base.initial_value_usd;
    let final_lvr = *lvr_reference(series, &traj, v0).map_err(tag(&first))?.last().unwrap_or(&v0);

    let n_tau = grid.tau_cex_bps.len();
    let n_nu = grid.nu.len();
    // one pool run per (fee, gas, nu): the cells at the first tau
    let pool_keys: Vec<Cell> = cells
        .iter()
        .enumerate()
        .filter(|(i, _)| (i / n_nu).is_multiple_of(n_tau))
        .map(|(_, c)| *c)
        .collect();
    let pools: Vec<PoolFinal> = pool_keys
        .par_iter()
        .map(|cell| run_pool_final(base, series, &traj, cell))
        .collect::<Result<_>>()?;
    let cex_finals: Vec<f64> = grid
        .tau_cex_bps
        .par_iter()
        .map(|&tau| {
            let cell = Cell { tau_cex_bps: tau, ..first };
            let costs = CexConfig { tau_cex_bps: tau, ..base.cex.clone() }.cost_params(series.n_assets());
            run_cex(series, &traj, &costs, v0, |_, _| {})
                .map(|run| *run.values.last().unwrap_or(&v0))
                .map_err(tag(&cell))
        })
        .collect::<Result<_>>()?;

    let strategy_id = format!("s{index:04}");
    Ok(cells
        .into_iter()
        .enumerate()
        .map(|(i, cell)| {
            // cell index = (pool_outer * n_tau + tau) * n_nu + nu
            let nu_i = i % n_nu;
            let tau_i = (i / n_nu) % n_tau;
            let pool_outer = i / (n_nu * n_tau);
            let pool = &pools[pool_outer * n_nu + nu_i];
            let summary = summarize(&SummaryInputs {
                initial_value: v0,
                final_pool_value: pool.value,
                final_cex_value: cex_finals[tau_i],
                final_lvr_value: final_lvr,
                pool_volume_usd: pool.volume_usd,
                span_minutes: series.span_minutes(),
            });
            CellResult { strategy_id: strategy_id.clone(), cell, summary }
        })
        .collect())
}

fn run_pool_final(base: &RunConfig, series: &PriceSeries, traj: &WeightTrajectory, cell: &Cell) -> Result<PoolFinal> {
    let v0 = base.initial_value_usd;
    let arb = rvr_core::amm::ArbParams {
        gas_cost_usd: cell.gas_usd,
        discovery_delay_steps: base.amm.discovery_delay_steps,
        noise_multiplier: cell.nu,
    };
    let run = run_pool(series, traj, gamma_from_bps(cell.pool_fee_bps), &arb, v0, |_, _, _| {}).map_err(tag(cell))?;
    Ok(PoolFinal { value: *run.values.last().unwrap_or(&v0), volume_usd: run.volume_usd })
}

/// Where a grid run writes its summary.
#[derive(Debug, Clone)]
pub struct GridOutput {
    /// Final summary CSV; rows accumulate in `<path>.partial` until the run succeeds.
    pub path: PathBuf,
    /// Cells between flushes of the partial file.
    pub flush_every: usize,
    pub progress: bool,
}

pub fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".partial");
    PathBuf::from(name)
}

/// Runs every cell of `grid` on `workers` threads.
pub fn run_grid(
    base: &RunConfig,
    series: &PriceSeries,
    grid: &SweepGrid,
    workers: usize,
    output: Option<&GridOutput>,
) -> Result<Vec<CellResult>> {
    grid.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;

    let strategies: Vec<(usize, f64, f64)> = grid
        .memory_days
        .iter()
        .flat_map(|&m| grid.k.iter().map(move |&k| (m, k)))
        .enumerate()
        .map(|(i, (m, k))| (i, m, k))
        .collect();
    let per_strategy = grid.cells_per_strategy();
    let chunk = output.map_or(strategies.len(), |o| (o.flush_every / per_strategy).max(1));

    let mut writer = match output {
        Some(o) => {
            let partial = partial_path(&o.path);
            let file = File::create(&partial).map_err(|e| Error::io(&partial, e))?;
            Some(SummaryWriter::new(file, partial)?)
        }
        None => None,
    };
    let started = Instant::now();
    let mut results = Vec::with_capacity(grid.len());
    for group in strategies.chunks(chunk) {
        let done: Vec<Vec<CellResult>> = pool.install(|| {
            group
                .par_iter()
                .map(|&(i, m, k)| run_strategy(base, series, grid, i, m, k))
                .collect::<Result<_>>()
        })?;
        for rows in done {
            if let Some(w) = writer.as_mut() {
                for row in &rows {
                    w.write(row)?;
                }
            }
            results.extend(rows);
        }
        if let Some(w) = writer.as_mut() {
            w.flush()?;
        }
        if output.is_some_and(|o| o.progress) {
            eprintln!(
                "{}/{} cells done ({:.1}s)",
                results.len(),
                grid.len(),
                started.elapsed().as_secs_f64()
            );
        }
    }
    if let (Some(o), Some(w)) = (output, writer) {
        w.finish()?;
        let partial = partial_path(&o.path);
        fs::rename(&partial, &o.path).map_err(|e| Error::io(&o.path, e))?;
    }
    Ok(results)
}
