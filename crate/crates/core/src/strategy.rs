//! Target weight trajectories shared by the pool and the CEX portfolio.
//!
//! A momentum strategy estimates each asset's price trend with an
//! exponentially weighted mean of one-step log returns, tilts the base weights
//! towards assets with above-average trend, and clamps the result into
//! `[min_weight, 1 - (N - 1) * min_weight]`. New targets are computed every
//! `rebalance_interval` steps from prices strictly before the update step and
//! reached by linear interpolation over `interpolation_steps` steps.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::series::PriceSeries;
use crate::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    Momentum,
    Constant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyParams {
    pub kind: StrategyKind,
    pub base_weights: Vec<f64>,
    /// Half-life of the trend estimator, in days.
    pub memory_days: f64,
    /// Weight tilt per unit of per-step log-return trend.
    pub aggressiveness: f64,
    pub min_weight: f64,
    /// Steps between strategy signal updates.
    pub rebalance_interval: usize,
    /// Steps over which a new target is reached.
    pub interpolation_steps: usize,
}

impl StrategyParams {
    /// Constant-mix strategy holding `base_weights` with one-day (1440 step) cadence defaults.
    pub fn constant(base_weights: Vec<f64>) -> Self {
        Self {
            kind: StrategyKind::Constant,
            base_weights,
            memory_days: 1.0,
            aggressiveness: 1.0,
            min_weight: 0.03,
            rebalance_interval: 1440,
            interpolation_steps: 1440,
        }
    }

    pub fn momentum(base_weights: Vec<f64>, memory_days: f64, aggressiveness: f64) -> Self {
        Self {
            kind: StrategyKind::Momentum,
            memory_days,
            aggressiveness,
            ..Self::constant(base_weights)
        }
    }

    /// Lower and upper clamp bounds for a single weight.
    pub fn bounds(&self) -> (f64, f64) {
        weight_bounds(self.base_weights.len(), self.min_weight)
    }

    pub fn validate(&self, n_assets: usize) -> Result<()> {
        let n = self.base_weights.len();
        if n != n_assets {
            return Err(Error::LengthMismatch { what: "base_weights", expected: n_assets, found: n });
        }
        if n < 2 {
            return Err(Error::InvalidWeights(format!("need at least 2 assets, got {n}")));
        }
        if self.base_weights.iter().any(|&w| !(w > 0.0 && w < 1.0)) {
            return Err(Error::InvalidWeights(format!("base weights must lie in (0, 1): {:?}", self.base_weights)));
        }
        let sum: f64 = self.base_weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::InvalidWeights(format!("base weights sum to {sum}, not 1")));
        }
        if !(self.min_weight > 0.0 && self.min_weight * (n as f64) < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "min_weight {} must be in (0, 1/{n})",
                self.min_weight
            )));
        }
        if self.rebalance_interval == 0 || self.interpolation_steps == 0 {
            return Err(Error::InvalidParameter("rebalance_interval and interpolation_steps must be >= 1".into()));
        }
        if self.kind == StrategyKind::Momentum {
            if self.memory_days.is_nan() || self.memory_days <= 0.0 {
                return Err(Error::InvalidParameter(format!("memory_days must be positive, got {}", self.memory_days)));
            }
            if !(self.aggressiveness > 0.0 && self.aggressiveness.is_finite()) {
                return Err(Error::InvalidParameter(format!("k must be positive, got {}", self.aggressiveness)));
            }
            let (lo, hi) = self.bounds();
            if self.base_weights.iter().any(|&w| w < lo || w > hi) {
                return Err(Error::InvalidWeights(format!(
                    "base weights {:?} fall outside clamp bounds [{lo}, {hi}]",
                    self.base_weights
                )));
            }
        }
        Ok(())
    }
}

/// `(min_weight, 1 - (n - 1) * min_weight)`.
pub fn weight_bounds(n: usize, min_weight: f64) -> (f64, f64) {
    (min_weight, 1.0 - (n as f64 - 1.0) * min_weight)
}

/// Per-step target weights, one row per price step.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTrajectory {
    n_assets: usize,
    weights: Vec<f64>,
}

impl WeightTrajectory {
    pub fn constant(weights: &[f64], len: usize) -> Self {
        let mut data = Vec::with_capacity(weights.len() * len);
        for _ in 0..len {
            data.extend_from_slice(weights);
        }
        Self { n_assets: weights.len(), weights: data }
    }

    /// Builds a trajectory from row-major weights, checking every row sums to one.
    pub fn from_rows(n_assets: usize, weights: Vec<f64>) -> Result<Self> {
        if n_assets == 0 || !weights.len().is_multiple_of(n_assets) {
            return Err(Error::InvalidWeights("row-major weights do not form whole rows".into()));
        }
        for (t, row) in weights.chunks_exact(n_assets).enumerate() {
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > 1e-9 || row.iter().any(|&w| !(w > 0.0 && w < 1.0)) {
                return Err(Error::InvalidWeights(format!("row {t} is not a valid weight vector: {row:?}")));
            }
        }
        Ok(Self { n_assets, weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len() / self.n_assets
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn n_assets(&self) -> usize {
        self.n_assets
    }

    #[inline]
    pub fn row(&self, t: usize) -> &[f64] {
        &self.weights[t * self.n_assets..(t + 1) * self.n_assets]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.weights.chunks_exact(self.n_assets)
    }

    pub(crate) fn check_matches(&self, series: &PriceSeries) -> Result<()> {
        if self.n_assets != series.n_assets() {
            return Err(Error::LengthMismatch {
                what: "trajectory assets",
                expected: series.n_assets(),
                found: self.n_assets,
            });
        }
        if self.len() != series.len() {
            return Err(Error::LengthMismatch { what: "trajectory rows", expected: series.len(), found: self.len() });
        }
        Ok(())
    }
}

/// Per-step decay factor for a half-life of `memory_days` days.
fn decay_factor(memory_days: f64, steps_per_day: f64) -> f64 {
    let half_life_steps = memory_days * steps_per_day;
    libm::exp(-core::f64::consts::LN_2 / half_life_steps)
}

/// Running exponentially weighted mean of one-step log returns.
///
/// The mean is normalised by the accumulated weight, so it starts at zero
/// with no observations and tends to the plain cumulative mean as the decay
/// approaches one.
#[derive(Debug, Clone)]
pub struct TrendEstimator {
    decay: f64,
    weighted_sum: Vec<f64>,
    total_weight: f64,
}

impl TrendEstimator {
    pub fn new(n_assets: usize, memory_days: f64, steps_per_day: f64) -> Self {
        Self {
            decay: decay_factor(memory_days, steps_per_day),
            weighted_sum: vec![0.0; n_assets],
            total_weight: 0.0,
        }
    }

    /// Folds in the log returns ending at step `t` of `series`.
    pub fn observe(&mut self, series: &PriceSeries, t: usize) {
        for (i, acc) in self.weighted_sum.iter_mut().enumerate() {
            *acc = self.decay * *acc + series.log_return(t, i);
        }
        self.total_weight = self.decay * self.total_weight + 1.0;
    }

    pub fn gradient(&self) -> Vec<f64> {
        if self.total_weight == 0.0 {
            return vec![0.0; self.weighted_sum.len()];
        }
        self.weighted_sum.iter().map(|s| s / self.total_weight).collect()
    }
}

/// Trend estimate available at `step`: uses log returns ending at steps `1..step`,
/// i.e. prices strictly before `step`.
pub fn ewma_log_gradient(series: &PriceSeries, memory_days: f64, step: usize) -> Vec<f64> {
    let mut est = TrendEstimator::new(series.n_assets(), memory_days, series.steps_per_day());
    for t in 1..step.min(series.len()) {
        est.observe(series, t);
    }
    est.gradient()
}

/// Momentum tilt of the base weights, clamped to valid bounds.
///
/// Raw target is `base_i + k * (g_i - mean(g))`; the mean is unweighted so the
/// raw tilt sums to zero.
pub fn momentum_target(params: &StrategyParams, gradient: &[f64]) -> Vec<f64> {
    clamp_normalize(&momentum_raw(params, gradient), params.min_weight)
}

/// Pre-clamp momentum target.
pub fn momentum_raw(params: &StrategyParams, gradient: &[f64]) -> Vec<f64> {
    let mean = gradient.iter().sum::<f64>() / gradient.len() as f64;
    params
        .base_weights
        .iter()
        .zip(gradient)
        .map(|(&b, &g)| b + params.aggressiveness * (g - mean))
        .collect()
}

/// Clips each entry into `[min_weight, 1 - (N-1) min_weight]` and rescales the
/// vector to sum to one, re-clipping entries pushed out of bounds by the
/// rescale. Vectors already valid are returned unchanged.
pub fn clamp_normalize(raw: &[f64], min_weight: f64) -> Vec<f64> {
    let n = raw.len();
    let (lo, hi) = weight_bounds(n, min_weight);
    let sum: f64 = raw.iter().sum();
    if (sum - 1.0).abs() <= SUM_TOLERANCE && raw.iter().all(|&w| w >= lo && w <= hi) {
        return raw.to_vec();
    }
    let mut w: Vec<f64> = raw.iter().map(|&x| if x.is_nan() { lo } else { x.clamp(lo, hi) }).collect();
    let mut fixed = vec![false; n];
    // Each pass pins at least one more entry, or terminates.
    for _ in 0..=n {
        let fixed_mass: f64 = w.iter().zip(&fixed).filter(|(_, &f)| f).map(|(x, _)| x).sum();
        let free_mass: f64 = w.iter().zip(&fixed).filter(|(_, &f)| !f).map(|(x, _)| x).sum();
        if free_mass <= 0.0 {
            break;
        }
        let scale = (1.0 - fixed_mass) / free_mass;
        let mut pinned = false;
        for i in 0..n {
            if fixed[i] {
                continue;
            }
            let v = w[i] * scale;
            if v > hi {
                w[i] = hi;
                fixed[i] = true;
                pinned = true;
            } else if v < lo {
                w[i] = lo;
                fixed[i] = true;
                pinned = true;
            }
        }
        if !pinned {
            for i in 0..n {
                if !fixed[i] {
                    w[i] *= scale;
                }
            }
            break;
        }
    }
    w
}

/// Builds a trajectory of `len` rows starting at `initial`; `target_at(t)`
/// is queried at every multiple of `rebalance_interval` (t >= 1) and a
/// returned target is approached linearly over `interpolation_steps` rows
/// starting with row `t`.
pub fn interpolate_targets<F>(
    initial: &[f64],
    len: usize,
    rebalance_interval: usize,
    interpolation_steps: usize,
    mut target_at: F,
) -> WeightTrajectory
where
    F: FnMut(usize) -> Option<Vec<f64>>,
{
    let n = initial.len();
    let mut data = Vec::with_capacity(n * len);
    let mut current = initial.to_vec();
    let mut start = initial.to_vec();
    let mut target = initial.to_vec();
    let mut progress = interpolation_steps;
    for t in 0..len {
        if t > 0 && t % rebalance_interval == 0 {
            if let Some(next) = target_at(t) {
                start.copy_from_slice(&current);
                target = next;
                progress = 0;
            }
        }
        if t > 0 && progress < interpolation_steps {
            progress += 1;
            if progress == interpolation_steps {
                current.copy_from_slice(&target);
            } else {
                let frac = progress as f64 / interpolation_steps as f64;
                for i in 0..n {
                    current[i] = start[i] + (target[i] - start[i]) * frac;
                }
            }
        }
        data.extend_from_slice(&current);
    }
    WeightTrajectory { n_assets: n, weights: data }
}

/// Target weight trajectory for `params` over `series`.
///
/// Row `t` depends only on prices at steps `< t`.
pub fn build_trajectory(params: &StrategyParams, series: &PriceSeries) -> Result<WeightTrajectory> {
    params.validate(series.n_assets())?;
    if series.len() < params.rebalance_interval {
        return Err(Error::InvalidParameter(format!(
            "series has {} rows, fewer than rebalance_interval {}",
            series.len(),
            params.rebalance_interval
        )));
    }
    match params.kind {
        StrategyKind::Constant => Ok(WeightTrajectory::constant(&params.base_weights, series.len())),
        StrategyKind::Momentum => {
            let mut est = TrendEstimator::new(series.n_assets(), params.memory_days, series.steps_per_day());
            let mut observed = 0usize;
            Ok(interpolate_targets(
                &params.base_weights,
                series.len(),
                params.rebalance_interval,
                params.interpolation_steps,
                |t| {
                    // absorb returns ending at steps 1..t (prices < t)
                    while observed + 1 < t {
                        observed += 1;
                        est.observe(series, observed);
                    }
                    Some(momentum_target(params, &est.gradient()))
                },
            ))
        }
    }
}
