//! Benchmark portfolios and metrics.
//!
//! `RVR(t) = V_pool(t) - V_cex(t)`: positive when the pool beats the costed
//! CEX portfolio. The LVR reference is the frictionless self-financing
//! portfolio that holds `w(t-1) V(t-1) / p(t-1)` through each price move.

use alloc::vec::Vec;

use crate::series::PriceSeries;
use crate::strategy::WeightTrajectory;
use crate::{Error, Result, MINUTES_PER_MONTH};

/// Frictionless weight-matching portfolio value, starting at `initial_value`.
pub fn lvr_reference(series: &PriceSeries, trajectory: &WeightTrajectory, initial_value: f64) -> Result<Vec<f64>> {
    trajectory.check_matches(series)?;
    let mut values = Vec::with_capacity(series.len());
    let mut value = initial_value;
    values.push(value);
    for t in 1..series.len() {
        let prev = series.row(t - 1);
        let cur = series.row(t);
        let w = trajectory.row(t - 1);
        // holdings w_i V / p_i(t-1) marked to p_i(t)
        value = (0..series.n_assets()).map(|i| w[i] * value / prev[i] * cur[i]).sum();
        values.push(value);
    }
    Ok(values)
}

/// Elementwise `pool - cex`.
pub fn rvr(pool_values: &[f64], cex_values: &[f64]) -> Result<Vec<f64>> {
    if pool_values.len() != cex_values.len() {
        return Err(Error::LengthMismatch {
            what: "rvr value series",
            expected: pool_values.len(),
            found: cex_values.len(),
        });
    }
    Ok(pool_values.iter().zip(cex_values).map(|(p, c)| p - c).collect())
}

/// Per-run aggregates reported for every simulation or sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub final_rvr_usd: f64,
    /// `final_rvr_usd / initial_value`.
    pub scaled_rvr: f64,
    /// Simple cumulative return `V(T)/V(0) - 1`.
    pub pool_return: f64,
    pub cex_return: f64,
    /// `V_lvr(T) - V_pool(T)`, positive when the pool lags the frictionless benchmark.
    pub lvr_usd: f64,
    pub pool_volume_usd: f64,
    pub monthly_volume_usd: f64,
}

/// Final-state inputs to [`summarize`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryInputs {
    pub initial_value: f64,
    pub final_pool_value: f64,
    pub final_cex_value: f64,
    pub final_lvr_value: f64,
    pub pool_volume_usd: f64,
    /// Simulated time span in minutes.
    pub span_minutes: f64,
}

pub fn summarize(inputs: &SummaryInputs) -> RunSummary {
    let v0 = inputs.initial_value;
    let final_rvr_usd = inputs.final_pool_value - inputs.final_cex_value;
    let monthly_volume_usd = if inputs.span_minutes > 0.0 {
        inputs.pool_volume_usd * (MINUTES_PER_MONTH / inputs.span_minutes)
    } else {
        0.0
    };
    RunSummary {
        final_rvr_usd,
        scaled_rvr: final_rvr_usd / v0,
        pool_return: inputs.final_pool_value / v0 - 1.0,
        cex_return: inputs.final_cex_value / v0 - 1.0,
        lvr_usd: inputs.final_lvr_value - inputs.final_pool_value,
        pool_volume_usd: inputs.pool_volume_usd,
        monthly_volume_usd,
    }
}
