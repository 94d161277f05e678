//! Per-asset price series sampled on a uniform time grid.

use alloc::string::String;
use alloc::vec::Vec;
use alloc::format;

use crate::{Error, Result};

const SECONDS_PER_DAY: f64 = 86_400.0;

/// Market mid prices for `N` assets over `T` uniformly spaced timestamps.
///
/// Prices are stored row-major, one row per timestamp. A constructed series
/// always has `T >= 2`, `N >= 2`, strictly positive finite prices and a
/// constant positive timestamp step.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    labels: Vec<String>,
    timestamps: Vec<i64>,
    prices: Vec<f64>,
}

impl PriceSeries {
    /// Builds a series from row-major `prices` (`timestamps.len() * labels.len()` values).
    pub fn new(labels: Vec<String>, timestamps: Vec<i64>, prices: Vec<f64>) -> Result<Self> {
        let n = labels.len();
        let t = timestamps.len();
        if n < 2 {
            return Err(Error::InvalidSeries(format!("need at least 2 assets, got {n}")));
        }
        if t < 2 {
            return Err(Error::InvalidSeries(format!("need at least 2 rows, got {t}")));
        }
        if prices.len() != n * t {
            return Err(Error::LengthMismatch {
                what: "price matrix",
                expected: n * t,
                found: prices.len(),
            });
        }
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() || labels[..i].contains(label) {
                return Err(Error::InvalidSeries(format!("asset label {label:?} is empty or duplicated")));
            }
        }
        for (idx, &p) in prices.iter().enumerate() {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::NonPositivePrice { row: idx / n, asset: idx % n, value: p });
            }
        }
        let step = timestamps[1] - timestamps[0];
        if step <= 0 {
            return Err(Error::NonUniformSpacing { row: 1, expected: step.max(1), found: step });
        }
        for row in 2..t {
            let found = timestamps[row] - timestamps[row - 1];
            if found != step {
                return Err(Error::NonUniformSpacing { row, expected: step, found });
            }
        }
        Ok(Self { labels, timestamps, prices })
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    /// Always false for a constructed series; present for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn n_assets(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn timestamps(&self) -> &[i64] {
        &self.timestamps
    }

    /// Prices of every asset at step `t`.
    #[inline]
    pub fn row(&self, t: usize) -> &[f64] {
        let n = self.labels.len();
        &self.prices[t * n..(t + 1) * n]
    }

    /// Row-major price matrix.
    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.prices.chunks_exact(self.labels.len())
    }

    /// Seconds between consecutive rows.
    pub fn step_seconds(&self) -> i64 {
        self.timestamps[1] - self.timestamps[0]
    }

    pub fn steps_per_day(&self) -> f64 {
        SECONDS_PER_DAY / self.step_seconds() as f64
    }

    /// Elapsed time from the first to the last row, in minutes.
    pub fn span_minutes(&self) -> f64 {
        (self.timestamps[self.len() - 1] - self.timestamps[0]) as f64 / 60.0
    }

    /// One-step log return of asset `asset` ending at step `t` (`t >= 1`).
    #[inline]
    pub fn log_return(&self, t: usize, asset: usize) -> f64 {
        libm::log(self.row(t)[asset] / self.row(t - 1)[asset])
    }

    /// Copy of the first `len` rows.
    pub fn truncated(&self, len: usize) -> Result<Self> {
        let len = len.min(self.len());
        let n = self.n_assets();
        Self::new(
            self.labels.clone(),
            self.timestamps[..len].to_vec(),
            self.prices[..len * n].to_vec(),
        )
    }
}
