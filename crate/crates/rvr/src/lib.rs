//! File formats, configuration, parameter sweeps and command implementations
//! for the `rvr` simulator. The simulation engine itself lives in `rvr-core`.

#![warn(missing_debug_implementations)]

pub mod commands;
pub mod config;
mod error;
pub mod market_data;
pub mod output;
pub mod sweep;

pub use error::{Error, Result};
