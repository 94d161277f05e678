//! Deterministic simulation engine for comparing two ways of running the same
//! portfolio strategy: as a geometric-mean AMM pool rebalanced by arbitrageurs,
//! or as a portfolio rebalanced on a centralised exchange that charges
//! commission and crosses a bid-ask spread.
//!
//! The crate is `no_std` (it needs `alloc`). All transcendental functions go
//! through [`libm`], so results are bit-reproducible across platforms.
//!
//! Layout:
//!
//! - [`series`]: validated per-asset price series.
//! - [`strategy`]: momentum and constant-mix target weight trajectories.
//! - [`amm`]: G3M pool state, fee-aware optimal arbitrage, pool simulation.
//! - [`cex`]: costed CEX rebalancing and its scalar fixed-point solve.
//! - [`bench`]: LVR reference portfolio, RVR and run summaries.
//! - [`root`]: safeguarded scalar root finding.

#![no_std]
#![warn(missing_debug_implementations)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod amm;
pub mod bench;
pub mod cex;
mod error;
pub mod root;
pub mod series;
pub mod strategy;

pub use error::{Error, Result};

/// Minutes in a 30-day month; used to normalise traded volume.
pub const MINUTES_PER_MONTH: f64 = 30.0 * 1440.0;

/// Converts basis points to a fraction.
#[inline]
pub fn bps(value: f64) -> f64 {
    value * 1e-4
}
