//! Geometric-mean pool with time-varying weights.
//!
//! The pool holds reserves `R` and weights `w` and accepts any trade that keeps
//! `prod R_i^{w_i}` from falling, with a fraction `1 - gamma` of every inflow
//! retained outside the invariant as the fee.
//!
//! # Optimal arbitrage
//!
//! An arbitrageur chooses post-trade invariant reserves `R'` to maximise
//! `sum_i phi_i(R'_i)` where `phi_i` pays `p_i` per unit withdrawn and costs
//! `p_i / gamma` per unit of effective deposit. Each `phi_i` is concave and the
//! feasible set `{sum w_i ln R'_i >= ln k}` is convex, so the KKT conditions
//! characterise the optimum: for a multiplier `mu`,
//!
//! ```text
//! R'_i(mu) = clamp(R_i, gamma * mu * w_i / p_i, mu * w_i / p_i)
//! ```
//!
//! and `mu` is the root of the nondecreasing, piecewise-linear function
//! `g(ln mu) = sum_i w_i (ln R'_i - ln R_i)`. The breakpoints of `g` are the
//! `2N` values `ln(R_i p_i / w_i)` and `ln(R_i p_i / w_i) - ln gamma`, so the
//! root is found exactly by sorting them and interpolating on one segment.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::series::PriceSeries;
use crate::strategy::WeightTrajectory;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PoolState {
    pub reserves: Vec<f64>,
    pub weights: Vec<f64>,
    /// Fraction of each trade inflow that counts towards the invariant.
    pub gamma: f64,
}

impl PoolState {
    /// Pool holding `value` split by `weights` at `prices`.
    pub fn aligned(weights: &[f64], prices: &[f64], value: f64, gamma: f64) -> Result<Self> {
        let reserves = weights.iter().zip(prices).map(|(w, p)| w * value / p).collect();
        let state = Self { reserves, weights: weights.to_vec(), gamma };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reserves.len() != self.weights.len() {
            return Err(Error::LengthMismatch {
                what: "pool weights",
                expected: self.reserves.len(),
                found: self.weights.len(),
            });
        }
        if self.reserves.iter().any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidParameter(format!("pool reserves must be positive: {:?}", self.reserves)));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || self.weights.iter().any(|&w| !(w > 0.0 && w < 1.0)) {
            return Err(Error::InvalidWeights(format!("{:?}", self.weights)));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidParameter(format!("gamma must be in (0, 1], got {}", self.gamma)));
        }
        Ok(())
    }

    pub fn n_assets(&self) -> usize {
        self.reserves.len()
    }
}

/// Arbitrageur behaviour and noise-flow settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArbParams {
    /// Minimum profit, in numeraire, before a trade is submitted.
    pub gas_cost_usd: f64,
    /// Steps between spotting an opportunity and executing it.
    pub discovery_delay_steps: usize,
    /// Noise volume as a multiple of arbitrage volume.
    pub noise_multiplier: f64,
}

impl Default for ArbParams {
    fn default() -> Self {
        Self { gas_cost_usd: 0.0, discovery_delay_steps: 1, noise_multiplier: 0.0 }
    }
}

impl ArbParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.gas_cost_usd >= 0.0 && self.gas_cost_usd.is_finite()) {
            return Err(Error::InvalidParameter(format!("gas cost must be finite and >= 0, got {}", self.gas_cost_usd)));
        }
        if !(self.noise_multiplier >= 0.0 && self.noise_multiplier.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise multiplier must be finite and >= 0, got {}",
                self.noise_multiplier
            )));
        }
        Ok(())
    }
}

/// A quoted or executed arbitrage trade, seen from the pool.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeOutcome {
    /// Set only once the trade has been applied to a pool.
    pub executed: bool,
    /// Tokens paid into the pool (gross of fee).
    pub delta_in: Vec<f64>,
    /// Tokens withdrawn from the pool.
    pub delta_out: Vec<f64>,
    pub arb_profit_usd: f64,
    /// Market value of the tokens leaving the pool.
    pub volume_usd: f64,
}

impl TradeOutcome {
    pub fn none(n: usize) -> Self {
        Self {
            executed: false,
            delta_in: vec![0.0; n],
            delta_out: vec![0.0; n],
            arb_profit_usd: 0.0,
            volume_usd: 0.0,
        }
    }

    pub fn is_null(&self) -> bool {
        self.delta_in.iter().chain(&self.delta_out).all(|&d| d == 0.0)
    }
}

/// `sum_i R_i p_i`.
pub fn pool_value(state: &PoolState, prices: &[f64]) -> f64 {
    state.reserves.iter().zip(prices).map(|(r, p)| r * p).sum()
}

/// `sum_i w_i ln R_i`.
pub fn log_invariant(reserves: &[f64], weights: &[f64]) -> f64 {
    reserves.iter().zip(weights).map(|(r, w)| w * libm::log(*r)).sum()
}

/// `prod_i R_i^{w_i}`, evaluated in log space.
pub fn invariant_k(state: &PoolState) -> f64 {
    libm::exp(log_invariant(&state.reserves, &state.weights))
}

/// Reserves on the current invariant surface whose value split matches the weights.
pub fn aligned_reserves(state: &PoolState, prices: &[f64]) -> Vec<f64> {
    let ln_k = log_invariant(&state.reserves, &state.weights);
    let ln_norm: f64 = state
        .weights
        .iter()
        .zip(prices)
        .map(|(w, p)| w * libm::log(w / p))
        .sum();
    let ln_mu = ln_k - ln_norm;
    state
        .weights
        .iter()
        .zip(prices)
        .map(|(w, p)| libm::exp(ln_mu + libm::log(w / p)))
        .collect()
}

/// True when no trade against the pool is profitable before gas: every pair's
/// quoted price ratio lies within a factor `gamma` of the market ratio.
pub fn no_arb_check(state: &PoolState, prices: &[f64]) -> bool {
    let n = state.n_assets();
    let gamma = state.gamma;
    for i in 0..n {
        for j in (i + 1)..n {
            let quoted = (state.weights[i] * state.reserves[j]) / (state.weights[j] * state.reserves[i]);
            let ratio = quoted / (prices[i] / prices[j]);
            if ratio < gamma || ratio * gamma > 1.0 {
                return false;
            }
        }
    }
    true
}

/// `g(u) = sum_i w_i (min(u - a_i, 0) + max(u - b_i, 0))`.
#[inline]
fn log_invariant_gap(u: f64, weights: &[f64], out_break: &[f64], in_break: &[f64]) -> f64 {
    let mut value = 0.0;
    for i in 0..weights.len() {
        if u < out_break[i] {
            value += weights[i] * (u - out_break[i]);
        } else if u > in_break[i] {
            value += weights[i] * (u - in_break[i]);
        }
    }
    value
}

/// Profit-maximising arbitrage against `state` at market `prices`.
///
/// The returned outcome is a quote (`executed == false`); the null trade is
/// returned when no trade has positive profit.
pub fn optimal_arb_trade(state: &PoolState, prices: &[f64]) -> Result<TradeOutcome> {
    let n = state.n_assets();
    if prices.len() != n {
        return Err(Error::LengthMismatch { what: "prices", expected: n, found: prices.len() });
    }
    let ln_gamma = libm::log(state.gamma);
    let mut out_break = vec![0.0; n];
    let mut in_break = vec![0.0; n];
    for i in 0..n {
        let a = libm::log(state.reserves[i] * prices[i] / state.weights[i]);
        if !a.is_finite() {
            return Err(Error::Solver(format!(
                "non-finite breakpoint for asset {i} (reserve {}, price {})",
                state.reserves[i], prices[i]
            )));
        }
        out_break[i] = a;
        in_break[i] = a - ln_gamma;
    }
    let max_out = out_break.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_in = in_break.iter().copied().fold(f64::INFINITY, f64::min);
    if max_out <= min_in {
        return Ok(TradeOutcome::none(n));
    }

    let mut breaks: Vec<f64> = out_break.iter().chain(in_break.iter()).copied().collect();
    breaks.sort_unstable_by(f64::total_cmp);
    // g(breaks[0]) <= 0 <= g(breaks[last]); locate the segment holding the root.
    let mut lo = breaks[0];
    let mut g_lo = log_invariant_gap(lo, &state.weights, &out_break, &in_break);
    let mut root = None;
    if g_lo == 0.0 {
        root = Some(lo);
    } else {
        for &hi in &breaks[1..] {
            let g_hi = log_invariant_gap(hi, &state.weights, &out_break, &in_break);
            if g_hi >= 0.0 {
                root = Some(if g_hi == g_lo { hi } else { lo + (hi - lo) * (-g_lo) / (g_hi - g_lo) });
                break;
            }
            lo = hi;
            g_lo = g_hi;
        }
    }
    let u = root.ok_or_else(|| Error::Solver(format!("failed to bracket arbitrage multiplier, breakpoints {breaks:?}")))?;

    let mut trade = TradeOutcome::none(n);
    let mut paid = 0.0;
    let mut received = 0.0;
    for i in 0..n {
        if u < out_break[i] {
            let out = -state.reserves[i] * libm::expm1(u - out_break[i]);
            trade.delta_out[i] = out;
            received += prices[i] * out;
        } else if u > in_break[i] {
            let effective = state.reserves[i] * libm::expm1(u - in_break[i]);
            let gross = effective / state.gamma;
            trade.delta_in[i] = gross;
            paid += prices[i] * gross;
        }
    }
    let profit = received - paid;
    if !profit.is_finite() {
        return Err(Error::Solver(format!("non-finite arbitrage profit at ln mu = {u}")));
    }
    if profit <= 0.0 {
        return Ok(TradeOutcome::none(n));
    }
    trade.arb_profit_usd = profit;
    trade.volume_usd = received;
    Ok(trade)
}

/// Applies a quoted trade: withdrawals leave, the full inflow (fee included) enters.
pub fn apply_trade(state: &mut PoolState, trade: &TradeOutcome) -> Result<()> {
    for i in 0..state.n_assets() {
        let next = state.reserves[i] - trade.delta_out[i] + trade.delta_in[i];
        if !(next > 0.0 && next.is_finite()) {
            return Err(Error::Solver(format!("trade would leave asset {i} with reserve {next}")));
        }
        state.reserves[i] = next;
    }
    Ok(())
}

/// Credits noise-trader fee income `(1 - gamma) * nu * arb_volume_usd`, bought
/// at market prices in proportion to the current weights. Returns the income.
pub fn apply_noise_income(state: &mut PoolState, prices: &[f64], arb_volume_usd: f64, arb: &ArbParams) -> f64 {
    let income = (1.0 - state.gamma) * arb.noise_multiplier * arb_volume_usd;
    if income > 0.0 {
        for i in 0..state.n_assets() {
            state.reserves[i] += state.weights[i] * income / prices[i];
        }
        income
    } else {
        0.0
    }
}

/// At most one opportunity waiting out the discovery delay.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ArbQueue {
    due: Option<usize>,
}

impl ArbQueue {
    pub fn pending_until(&self) -> Option<usize> {
        self.due
    }
}

/// Everything that happened to the pool in one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub trade: TradeOutcome,
    /// Invariant at the step's weights before and after any trade and noise income.
    pub k_before: f64,
    pub k_after: f64,
    pub noise_income_usd: f64,
    /// An opportunity was found and queued this step.
    pub queued: bool,
    /// A queued opportunity reached execution but was no longer worth the gas.
    pub lapsed: bool,
}

/// Advances the pool by one step.
///
/// Weights move to `weights_row` without touching reserves. A pending
/// opportunity that falls due is re-priced at current prices and executed only
/// if its profit still exceeds the gas cost; otherwise it lapses. With no
/// opportunity pending, a profitable one (net of gas) is queued for
/// `step + discovery_delay_steps`, executing immediately when the delay is zero.
pub fn step_pool(
    state: &mut PoolState,
    weights_row: &[f64],
    prices: &[f64],
    arb: &ArbParams,
    queue: &mut ArbQueue,
    step: usize,
) -> Result<StepReport> {
    state.weights.copy_from_slice(weights_row);
    let n = state.n_assets();
    let mut report = StepReport {
        trade: TradeOutcome::none(n),
        k_before: 0.0,
        k_after: 0.0,
        noise_income_usd: 0.0,
        queued: false,
        lapsed: false,
    };
    let mut execute_now = false;
    match queue.due {
        Some(due) if step >= due => {
            queue.due = None;
            execute_now = true;
        }
        Some(_) => {}
        None => {
            if !no_arb_check(state, prices) {
                let quote = optimal_arb_trade(state, prices)?;
                if quote.arb_profit_usd > arb.gas_cost_usd {
                    report.queued = true;
                    if arb.discovery_delay_steps == 0 {
                        execute_now = true;
                    } else {
                        queue.due = Some(step + arb.discovery_delay_steps);
                    }
                }
            }
        }
    }
    if execute_now {
        let quote = optimal_arb_trade(state, prices)?;
        if quote.arb_profit_usd > arb.gas_cost_usd {
            report.k_before = invariant_k(state);
            apply_trade(state, &quote)?;
            report.noise_income_usd = apply_noise_income(state, prices, quote.volume_usd, arb);
            report.k_after = invariant_k(state);
            report.trade = quote;
            report.trade.executed = true;
            return Ok(report);
        }
        report.lapsed = true;
    }
    let k = invariant_k(state);
    report.k_before = k;
    report.k_after = k;
    Ok(report)
}

/// Aggregates of a full pool simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolRun {
    /// Pool value after each step; entry 0 is the initial value.
    pub values: Vec<f64>,
    pub final_reserves: Vec<f64>,
    pub trades: usize,
    pub lapsed: usize,
    pub volume_usd: f64,
    pub arb_profit_usd: f64,
    pub noise_income_usd: f64,
}

/// Runs the pool over the whole series, starting aligned with trajectory row 0.
///
/// `observe` sees every step's report (step 0 is skipped: nothing trades at
/// the initial deposit).
pub fn run_pool<F>(
    series: &PriceSeries,
    trajectory: &WeightTrajectory,
    gamma: f64,
    arb: &ArbParams,
    initial_value: f64,
    mut observe: F,
) -> Result<PoolRun>
where
    F: FnMut(usize, &PoolState, &StepReport),
{
    trajectory.check_matches(series)?;
    arb.validate()?;
    if !(initial_value > 0.0 && initial_value.is_finite()) {
        return Err(Error::InvalidParameter(format!("initial value must be positive, got {initial_value}")));
    }
    let mut state = PoolState::aligned(trajectory.row(0), series.row(0), initial_value, gamma)?;
    let mut queue = ArbQueue::default();
    let mut run = PoolRun {
        values: Vec::with_capacity(series.len()),
        final_reserves: Vec::new(),
        trades: 0,
        lapsed: 0,
        volume_usd: 0.0,
        arb_profit_usd: 0.0,
        noise_income_usd: 0.0,
    };
    run.values.push(pool_value(&state, series.row(0)));
    for t in 1..series.len() {
        let prices = series.row(t);
        let report = step_pool(&mut state, trajectory.row(t), prices, arb, &mut queue, t)?;
        if report.trade.executed {
            run.trades += 1;
            run.volume_usd += report.trade.volume_usd;
            run.arb_profit_usd += report.trade.arb_profit_usd;
            run.noise_income_usd += report.noise_income_usd;
        }
        if report.lapsed {
            run.lapsed += 1;
        }
        run.values.push(pool_value(&state, prices));
        observe(t, &state, &report);
    }
    run.final_reserves = state.reserves;
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::String;
    use proptest::prelude::*;

    fn pool(reserves: &[f64], weights: &[f64], gamma: f64) -> PoolState {
        PoolState { reserves: reserves.to_vec(), weights: weights.to_vec(), gamma }
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
    }

    #[test]
    fn value_examples() {
        assert_eq!(pool_value(&pool(&[1.0, 1.0], &[0.5, 0.5], 1.0), &[100.0, 1.0]), 101.0);
        assert_eq!(pool_value(&pool(&[2.0, 3.0, 5.0], &[0.2, 0.3, 0.5], 1.0), &[1.0, 1.0, 1.0]), 10.0);
        let base = pool(&[1.5, 7.0], &[0.5, 0.5], 1.0);
        let scaled = pool(&[4.5, 21.0], &[0.5, 0.5], 1.0);
        assert!(close(pool_value(&scaled, &[3.0, 2.0]), 3.0 * pool_value(&base, &[3.0, 2.0]), 1e-15));
    }

    #[test]
    fn invariant_examples() {
        assert!(close(invariant_k(&pool(&[4.0, 1.0], &[0.5, 0.5], 1.0)), 2.0, 1e-15));
        let e = core::f64::consts::E;
        assert!(close(invariant_k(&pool(&[e, e, e], &[0.2, 0.5, 0.3], 1.0)), e, 1e-15));
        // oracle: 8^0.75 * 2^0.25 = 2^2.5
        let expected = libm::pow(2.0, 2.5);
        assert!(close(invariant_k(&pool(&[8.0, 2.0], &[0.75, 0.25], 1.0)), expected, 1e-14));
        assert!((invariant_k(&pool(&[8.0, 2.0], &[0.75, 0.25], 1.0)) - 5.6569).abs() < 1e-4);
    }

    #[test]
    fn aligned_reserves_examples() {
        let s = pool(&[4.0, 1.0], &[0.5, 0.5], 1.0);
        let r = aligned_reserves(&s, &[4.0, 1.0]);
        assert!(close(r[0], 1.0, 1e-14) && close(r[1], 4.0, 1e-14), "{r:?}");
        // already aligned is a fixed point
        let s = pool(&[0.3, 60.0, 100.0], &[0.3, 0.6, 0.1], 1.0);
        let r = aligned_reserves(&s, &[100.0, 1.0, 0.1]);
        for (a, b) in r.iter().zip(&s.reserves) {
            assert!(close(*a, *b, 1e-14));
        }
        // permutation equivariance
        let s1 = pool(&[1.0, 2.0, 3.0], &[0.2, 0.3, 0.5], 1.0);
        let s2 = pool(&[3.0, 1.0, 2.0], &[0.5, 0.2, 0.3], 1.0);
        let r1 = aligned_reserves(&s1, &[5.0, 1.0, 2.0]);
        let r2 = aligned_reserves(&s2, &[2.0, 5.0, 1.0]);
        assert!(close(r1[0], r2[1], 1e-14) && close(r1[1], r2[2], 1e-14) && close(r1[2], r2[0], 1e-14));
    }

    /// Brute-force profit for a two-asset pool as a function of the post-trade
    /// reserve of asset 0, with asset 1 pinned to the invariant.
    fn two_asset_profit(s: &PoolState, p: &[f64], x: f64) -> f64 {
        let ln_k = log_invariant(&s.reserves, &s.weights);
        let y = libm::exp((ln_k - s.weights[0] * libm::log(x)) / s.weights[1]);
        let leg = |r: f64, r_new: f64, price: f64| {
            if r_new <= r {
                price * (r - r_new)
            } else {
                -price * (r_new - r) / s.gamma
            }
        };
        leg(s.reserves[0], x, p[0]) + leg(s.reserves[1], y, p[1])
    }

    #[test]
    fn aligned_reserves_is_grid_argmax() {
        let s = pool(&[4.0, 1.0], &[0.5, 0.5], 1.0);
        let p = [4.0, 1.0];
        let mut best = (f64::NEG_INFINITY, 0.0);
        for i in 1..=80_000 {
            let x = i as f64 * 1e-4;
            let v = two_asset_profit(&s, &p, x);
            if v > best.0 {
                best = (v, x);
            }
        }
        assert!((best.1 - 1.0).abs() <= 1e-4);
        let trade = optimal_arb_trade(&s, &p).unwrap();
        assert!(close(trade.arb_profit_usd, best.0, 1e-6));
        // profit is value lost moving to aligned reserves: 17 - 8
        assert!(close(trade.arb_profit_usd, 9.0, 1e-12));
    }

    #[test]
    fn inside_band_is_null_trade() {
        let s = pool(&[1.0, 1.0], &[0.5, 0.5], 0.99);
        // quoted/market ratio 1.005 is inside [0.99, 1/0.99]
        let p = [1.0 / 1.005, 1.0];
        assert!(no_arb_check(&s, &p));
        let t = optimal_arb_trade(&s, &p).unwrap();
        assert!(t.is_null());
        assert_eq!(t.arb_profit_usd, 0.0);
    }

    #[test]
    fn aligned_pool_is_no_arb_and_frictionless_misalignment_is_not() {
        let s = pool(&[0.5, 50.0], &[0.5, 0.5], 1.0);
        assert!(no_arb_check(&s, &[100.0, 1.0]));
        assert!(!no_arb_check(&s, &[100.0 * (1.0 + 1e-9), 1.0]));
    }

    #[test]
    fn frictionless_trade_lands_on_aligned_reserves() {
        let s = pool(&[2.0, 30.0, 5.0], &[0.2, 0.5, 0.3], 1.0);
        let p = [12.0, 1.0, 3.0];
        let t = optimal_arb_trade(&s, &p).unwrap();
        let mut after = s.clone();
        apply_trade(&mut after, &t).unwrap();
        let target = aligned_reserves(&s, &p);
        for (a, b) in after.reserves.iter().zip(&target) {
            assert!(close(*a, *b, 1e-12), "{:?} vs {:?}", after.reserves, target);
        }
        let expected_profit = pool_value(&s, &p) - pool_value(&after, &p);
        assert!(close(t.arb_profit_usd, expected_profit, 1e-12));
        assert!(close(invariant_k(&after), invariant_k(&s), 1e-13));
    }

    #[test]
    fn fee_trade_grows_invariant() {
        let s = pool(&[2.0, 30.0, 5.0], &[0.2, 0.5, 0.3], 0.997);
        let p = [12.0, 1.0, 3.0];
        let t = optimal_arb_trade(&s, &p).unwrap();
        assert!(t.arb_profit_usd > 0.0);
        let mut after = s.clone();
        apply_trade(&mut after, &t).unwrap();
        assert!(invariant_k(&after) > invariant_k(&s));
        for i in 0..3 {
            assert!(t.delta_in[i] * t.delta_out[i] == 0.0);
        }
    }

    #[test]
    fn noise_income_examples() {
        let arb = ArbParams { gas_cost_usd: 0.0, discovery_delay_steps: 0, noise_multiplier: 1.0 };
        let p = [100.0, 1.0];
        let mut s = pool(&[500.0, 50_000.0], &[0.5, 0.5], 0.999);
        let before = pool_value(&s, &p);
        let income = apply_noise_income(&mut s, &p, 10_000.0, &arb);
        assert!(close(income, 10.0, 1e-12));
        assert!(close(pool_value(&s, &p) - before, 10.0, 1e-9));

        let mut s = pool(&[500.0, 50_000.0], &[0.5, 0.5], 1.0);
        let copy = s.clone();
        apply_noise_income(&mut s, &p, 10_000.0, &arb);
        assert_eq!(s, copy);

        let mut s = pool(&[500.0, 50_000.0], &[0.5, 0.5], 0.99);
        let copy = s.clone();
        apply_noise_income(&mut s, &p, 10_000.0, &ArbParams { noise_multiplier: 0.0, ..arb });
        assert_eq!(s, copy);
    }

    fn series(rows: &[Vec<f64>]) -> PriceSeries {
        let n = rows[0].len();
        let labels: Vec<String> = (0..n).map(|i| format!("A{i}")).collect();
        PriceSeries::new(
            labels,
            (0..rows.len() as i64).map(|t| 60 * t).collect(),
            rows.iter().flatten().copied().collect(),
        )
        .unwrap()
    }

    #[test]
    fn frictionless_pool_tracks_weights() {
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|t| {
                let x = t as f64;
                vec![100.0 * libm::exp(0.01 * libm::sin(x)), 1.0, 10.0 * libm::exp(0.02 * libm::cos(0.7 * x))]
            })
            .collect();
        let s = series(&rows);
        let weights: Vec<f64> = (0..50)
            .flat_map(|t| {
                let a = 0.3 + 0.002 * t as f64;
                [a, 0.5, 0.2 - 0.002 * t as f64]
            })
            .collect();
        let traj = WeightTrajectory::from_rows(3, weights).unwrap();
        let arb = ArbParams { gas_cost_usd: 0.0, discovery_delay_steps: 0, noise_multiplier: 0.0 };
        let mut checked = 0;
        run_pool(&s, &traj, 1.0, &arb, 1e6, |t, state, _| {
            let p = s.row(t);
            let v = pool_value(state, p);
            for i in 0..3 {
                assert!((state.reserves[i] * p[i] - state.weights[i] * v).abs() <= 1e-9 * v);
            }
            checked += 1;
        })
        .unwrap();
        assert_eq!(checked, 49);
    }

    #[test]
    fn lapsed_opportunity_does_not_trade() {
        // price jumps at step 1 and reverts at step 2 (the execution step)
        let s = series(&[vec![1.0, 1.0], vec![1.2, 1.0], vec![1.0, 1.0], vec![1.0, 1.0]]);
        let traj = WeightTrajectory::constant(&[0.5, 0.5], 4);
        let arb = ArbParams { gas_cost_usd: 1.0, discovery_delay_steps: 1, noise_multiplier: 0.0 };
        let mut events = Vec::new();
        let run = run_pool(&s, &traj, 0.997, &arb, 1e6, |t, _, r| events.push((t, r.queued, r.lapsed, r.trade.executed)))
            .unwrap();
        assert_eq!(run.trades, 0);
        assert_eq!(run.lapsed, 1);
        assert_eq!(events[0], (1, true, false, false));
        assert_eq!(events[1], (2, false, true, false));
    }

    #[test]
    fn single_weight_jump_trades_once_after_delay() {
        // constant prices; weights jump at step 3 from 50:50 to 60:40
        let s = series(&vec![vec![2.0, 1.0]; 12]);
        let mut rows = Vec::new();
        for t in 0..12 {
            rows.extend_from_slice(if t < 3 { &[0.5, 0.5] } else { &[0.6, 0.4] });
        }
        let traj = WeightTrajectory::from_rows(2, rows).unwrap();
        let arb = ArbParams { gas_cost_usd: 1.0, discovery_delay_steps: 2, noise_multiplier: 0.0 };
        let mut executed_at = Vec::new();
        let run = run_pool(&s, &traj, 0.99, &arb, 1e6, |t, _, r| {
            if r.trade.executed {
                executed_at.push(t);
            }
        })
        .unwrap();
        assert_eq!(run.trades, 1);
        assert_eq!(executed_at, vec![5]);
    }

    #[test]
    fn gas_threshold_blocks_small_trades() {
        let s = pool(&[1.0, 1.0], &[0.5, 0.5], 0.997);
        let p = [1.01, 1.0];
        let quote = optimal_arb_trade(&s, &p).unwrap();
        assert!(quote.arb_profit_usd > 0.0);
        let mut state = s.clone();
        let mut q = ArbQueue::default();
        let arb = ArbParams { gas_cost_usd: quote.arb_profit_usd * 2.0, discovery_delay_steps: 0, noise_multiplier: 0.0 };
        let r = step_pool(&mut state, &[0.5, 0.5], &p, &arb, &mut q, 1).unwrap();
        assert!(!r.trade.executed);
        assert_eq!(state, s);
    }

    fn arb_instance() -> impl Strategy<Value = (PoolState, Vec<f64>)> {
        (2usize..6, any::<u64>(), prop_oneof![Just(1.0), Just(0.997), Just(0.99), 0.9f64..1.0]).prop_map(
            |(n, seed, gamma)| {
                let mut x = seed | 1;
                let mut next = move || {
                    x ^= x << 13;
                    x ^= x >> 7;
                    x ^= x << 17;
                    (x >> 11) as f64 / (1u64 << 53) as f64
                };
                let raw: Vec<f64> = (0..n).map(|_| 0.1 + next()).collect();
                let total: f64 = raw.iter().sum();
                let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
                let reserves: Vec<f64> = (0..n).map(|_| libm::exp(8.0 * next() - 4.0)).collect();
                let prices: Vec<f64> = (0..n).map(|_| libm::exp(8.0 * next() - 4.0)).collect();
                (PoolState { reserves, weights, gamma }, prices)
            },
        )
    }

    proptest! {
        #[test]
        fn band_check_agrees_with_optimiser((s, p) in arb_instance()) {
            let t = optimal_arb_trade(&s, &p).unwrap();
            let v = pool_value(&s, &p);
            prop_assert_eq!(no_arb_check(&s, &p), t.arb_profit_usd <= 1e-12 * v);
        }

        #[test]
        fn trade_stays_on_invariant((s, p) in arb_instance()) {
            let t = optimal_arb_trade(&s, &p).unwrap();
            prop_assert!(t.arb_profit_usd >= 0.0);
            let effective: Vec<f64> = (0..s.n_assets())
                .map(|i| s.reserves[i] - t.delta_out[i] + s.gamma * t.delta_in[i])
                .collect();
            let gap = log_invariant(&effective, &s.weights) - log_invariant(&s.reserves, &s.weights);
            prop_assert!(gap.abs() < 1e-12, "gap {}", gap);
            for i in 0..s.n_assets() {
                prop_assert!(t.delta_in[i] >= 0.0 && t.delta_out[i] >= 0.0);
                prop_assert!(t.delta_in[i] == 0.0 || t.delta_out[i] == 0.0);
            }
        }

        #[test]
        fn trade_leaves_pool_in_band((s, p) in arb_instance()) {
            let t = optimal_arb_trade(&s, &p).unwrap();
            let mut eff = s.clone();
            for i in 0..s.n_assets() {
                eff.reserves[i] = s.reserves[i] - t.delta_out[i] + s.gamma * t.delta_in[i];
            }
            // widen the band by rounding slack
            eff.gamma = s.gamma * (1.0 - 1e-9);
            prop_assert!(no_arb_check(&eff, &p));
        }
    }
}
