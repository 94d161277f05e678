//! Regenerates `configs/data/btc_eth_dai_synthetic.csv`, the bundled sample
//! price file: seven days of correlated GBM minute prices.
//!
//! cargo run -p rvr --example make_sample_data -- configs/data/btc_eth_dai_synthetic.csv

use std::path::PathBuf;

use rvr::market_data::{generate_gbm, write_price_csv, GbmSpec};

fn main() -> rvr::Result<()> {
    let path: PathBuf = std::env::args_os()
        .nth(1)
        .map_or_else(|| "configs/data/btc_eth_dai_synthetic.csv".into(), PathBuf::from);
    let spec = GbmSpec {
        labels: vec!["BTC".into(), "ETH".into(), "DAI".into()],
        initial_prices: vec![45_000.0, 3_000.0, 1.0],
        drifts: vec![0.0; 3],
        volatilities: vec![0.00097, 0.00117, 0.00001],
        correlation: vec![vec![1.0, 0.8, 0.0], vec![0.8, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        steps: 7 * 1440,
        seed: 7,
        start_timestamp: 1_612_137_600,
        step_seconds: 60,
    };
    write_price_csv(&path, &generate_gbm(&spec)?)?;
    println!("{}", path.display());
    Ok(())
}
