//! Portfolio rebalanced on a centralised exchange with commission and spread.
//!
//! Each step the portfolio moves to `R(t) = w(t) V(t) / p(t)`, where the
//! post-trade value satisfies
//!
//! ```text
//! V(t) = sum_i R_i(t-1) p_i(t) - c_fees(R(t), R(t-1), p(t)) - c_spread(R(t), R(t-1), p(t))
//! ```
//!
//! Since `R(t)` is fixed by `V(t)`, this is a scalar fixed point in `V(t)`.
//! The cost is convex and piecewise linear in `V` with slope above `-1/2`, so
//! `V + c(V) - M` is strictly increasing with a unique root in `(0, M]`.

use alloc::format;
use alloc::vec::Vec;

use crate::root::solve_increasing;
use crate::series::PriceSeries;
use crate::strategy::WeightTrajectory;
use crate::{Error, Result};

/// Relative bound on `|V - (M - c(V))|` accepted from the solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct CexCostParams {
    /// Commission as a fraction of the value bought.
    pub tau_cex: f64,
    /// Proportional bid-ask spread per asset.
    pub spreads: Vec<f64>,
}

impl CexCostParams {
    pub fn frictionless(n_assets: usize) -> Self {
        Self { tau_cex: 0.0, spreads: alloc::vec![0.0; n_assets] }
    }

    pub fn validate(&self, n_assets: usize) -> Result<()> {
        if !(self.tau_cex >= 0.0 && self.tau_cex < 1.0) {
            return Err(Error::InvalidParameter(format!("tau_cex must be in [0, 1), got {}", self.tau_cex)));
        }
        if self.spreads.len() != n_assets {
            return Err(Error::LengthMismatch { what: "spreads", expected: n_assets, found: self.spreads.len() });
        }
        if self.spreads.iter().any(|&s| !(0.0..1.0).contains(&s)) {
            return Err(Error::InvalidParameter(format!("spreads must be in [0, 1): {:?}", self.spreads)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CexState {
    pub reserves: Vec<f64>,
    /// Value at the prices of the last rebalance.
    pub value: f64,
}

impl CexState {
    pub fn aligned(weights: &[f64], prices: &[f64], value: f64) -> Self {
        Self {
            reserves: weights.iter().zip(prices).map(|(w, p)| w * value / p).collect(),
            value,
        }
    }
}

/// `tau * sum_i p_i max(new_i - old_i, 0)`: commission on the bought legs.
pub fn commission_cost(old: &[f64], new: &[f64], prices: &[f64], tau: f64) -> f64 {
    let bought: f64 = old
        .iter()
        .zip(new)
        .zip(prices)
        .map(|((o, n), p)| p * (n - o).max(0.0))
        .sum();
    tau * bought
}

/// `1/2 sum_i p_i s_i |new_i - old_i|`: half-spread crossed on every leg.
pub fn spread_cost(old: &[f64], new: &[f64], prices: &[f64], spreads: &[f64]) -> f64 {
    0.5 * old
        .iter()
        .zip(new)
        .zip(prices.iter().zip(spreads))
        .map(|((o, n), (p, s))| p * s * (n - o).abs())
        .sum::<f64>()
}

/// Outcome of one costed rebalance.
#[derive(Debug, Clone, PartialEq)]
pub struct Rebalance {
    pub state: CexState,
    /// `R(t) - R(t-1)` per asset.
    pub trade: Vec<f64>,
    pub cost_fees: f64,
    pub cost_spread: f64,
    /// Value of the previous reserves at current prices, before trading.
    pub mark_to_market: f64,
    /// `|V - (M - c(V))| / V`.
    pub residual_rel: f64,
    /// `sum_i p_i |trade_i|`.
    pub turnover_usd: f64,
}

impl Rebalance {
    pub fn cost_usd(&self) -> f64 {
        self.cost_fees + self.cost_spread
    }
}

/// Rebalances `state` to `target_w` at `prices`, paying commission and spread.
pub fn solve_rebalance(state: &CexState, target_w: &[f64], prices: &[f64], costs: &CexCostParams) -> Result<Rebalance> {
    let n = state.reserves.len();
    if target_w.len() != n || prices.len() != n || costs.spreads.len() != n {
        return Err(Error::LengthMismatch {
            what: "rebalance inputs",
            expected: n,
            found: target_w.len().min(prices.len()).min(costs.spreads.len()),
        });
    }
    let held: Vec<f64> = state.reserves.iter().zip(prices).map(|(r, p)| r * p).collect();
    let mark: f64 = held.iter().sum();
    if !(mark > 0.0 && mark.is_finite()) {
        return Err(Error::Solver(format!("portfolio has no value to rebalance (mark {mark})")));
    }
    let tau = costs.tau_cex;
    let spreads = &costs.spreads;
    // f(V) = V + c(V) - M in value space: buying leg i costs w_i V - held_i.
    let residual = |v: f64| {
        let mut cost = 0.0;
        let mut slope = 1.0;
        for i in 0..n {
            let diff = target_w[i] * v - held[i];
            if diff > 0.0 {
                cost += (tau + 0.5 * spreads[i]) * diff;
                slope += (tau + 0.5 * spreads[i]) * target_w[i];
            } else {
                cost -= 0.5 * spreads[i] * diff;
                slope -= 0.5 * spreads[i] * target_w[i];
            }
        }
        (v + cost - mark, slope)
    };
    let root = solve_increasing(residual, 0.0, mark, mark, 1e-13 * mark, 200).map_err(|e| match e {
        Error::Solver(msg) => Error::Solver(format!("CEX rebalance: {msg}")),
        other => other,
    })?;
    let value = root.x;
    if !(value > 0.0 && value <= mark) {
        return Err(Error::Solver(format!("CEX rebalance value {value} outside (0, {mark}]")));
    }
    let reserves: Vec<f64> = target_w.iter().zip(prices).map(|(w, p)| w * value / p).collect();
    if reserves.iter().any(|&r| r < 0.0) {
        return Err(Error::Solver(format!("CEX rebalance would short: {reserves:?}")));
    }
    let cost_fees = commission_cost(&state.reserves, &reserves, prices, tau);
    let cost_spread = spread_cost(&state.reserves, &reserves, prices, spreads);
    let residual_rel = (value - (mark - cost_fees - cost_spread)).abs() / value;
    let trade: Vec<f64> = reserves.iter().zip(&state.reserves).map(|(n, o)| n - o).collect();
    let turnover_usd = trade.iter().zip(prices).map(|(d, p)| (d * p).abs()).sum();
    Ok(Rebalance {
        state: CexState { reserves, value },
        trade,
        cost_fees,
        cost_spread,
        mark_to_market: mark,
        residual_rel,
        turnover_usd,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CexRun {
    /// Post-rebalance value at every step; entry 0 is the initial value.
    pub values: Vec<f64>,
    pub cost_fees: f64,
    pub cost_spread: f64,
    pub turnover_usd: f64,
    /// Largest relative fixed-point residual over the run.
    pub max_residual_rel: f64,
}

/// Runs the CEX portfolio over the series, rebalancing to the trajectory every step.
pub fn run_cex<F>(
    series: &PriceSeries,
    trajectory: &WeightTrajectory,
    costs: &CexCostParams,
    initial_value: f64,
    mut observe: F,
) -> Result<CexRun>
where
    F: FnMut(usize, &Rebalance),
{
    trajectory.check_matches(series)?;
    costs.validate(series.n_assets())?;
    if !(initial_value > 0.0 && initial_value.is_finite()) {
        return Err(Error::InvalidParameter(format!("initial value must be positive, got {initial_value}")));
    }
    let mut state = CexState::aligned(trajectory.row(0), series.row(0), initial_value);
    let mut run = CexRun {
        values: Vec::with_capacity(series.len()),
        cost_fees: 0.0,
        cost_spread: 0.0,
        turnover_usd: 0.0,
        max_residual_rel: 0.0,
    };
    run.values.push(initial_value);
    for t in 1..series.len() {
        let step = solve_rebalance(&state, trajectory.row(t), series.row(t), costs)
            .map_err(|e| Error::Solver(format!("step {t}: {e}")))?;
        if step.residual_rel > RESIDUAL_TOLERANCE {
            return Err(Error::Solver(format!(
                "step {t}: fixed-point residual {} exceeds {RESIDUAL_TOLERANCE}",
                step.residual_rel
            )));
        }
        run.cost_fees += step.cost_fees;
        run.cost_spread += step.cost_spread;
        run.turnover_usd += step.turnover_usd;
        run.max_residual_rel = run.max_residual_rel.max(step.residual_rel);
        run.values.push(step.state.value);
        observe(t, &step);
        state = step.state;
    }
    Ok(run)
}
