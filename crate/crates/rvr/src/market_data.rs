//! Price series IO and synthetic path generation.
//!
//! CSV layout: header `timestamp,<label1>,...,<labelN>`, one row per step,
//! integer epoch seconds, `.` decimal separator. Rows with missing or
//! non-positive prices are rejected, never filled.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rvr_core::series::PriceSeries;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reads a price CSV, optionally checking the asset columns against `expected_assets`.
pub fn load_price_csv(path: &Path, expected_assets: Option<&[String]>) -> Result<PriceSeries> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let data_err = |msg: String| Error::Data { path: path.to_path_buf(), msg };

    let header = reader.headers().map_err(|e| data_err(format!("unreadable header: {e}")))?.clone();
    let mut columns = header.iter();
    match columns.next() {
        Some("timestamp") => {}
        other => return Err(data_err(format!("first column must be `timestamp`, found {other:?}"))),
    }
    let labels: Vec<String> = columns.map(str::to_string).collect();
    if let Some(expected) = expected_assets {
        if expected != labels.as_slice() {
            return Err(data_err(format!("asset columns {labels:?} do not match expected {expected:?}")));
        }
    }
    let n = labels.len();
    if n < 2 {
        return Err(data_err(format!("need at least 2 asset columns, found {n}")));
    }

    let mut timestamps = Vec::new();
    let mut prices = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut row = 0u64;
    loop {
        let line_hint = reader.position().line();
        let more = reader.read_record(&mut record).map_err(|e| Error::Row {
            path: path.to_path_buf(),
            row: row + 1,
            line: e.position().map_or(line_hint, |p| p.line()),
            msg: e.to_string(),
        })?;
        if !more {
            break;
        }
        row += 1;
        let line = record.position().map_or(line_hint, |p| p.line());
        let row_err = |msg: String| Error::Row { path: path.to_path_buf(), row, line, msg };
        if record.len() != n + 1 {
            return Err(row_err(format!("expected {} fields, found {}", n + 1, record.len())));
        }
        let ts: i64 = record[0].parse().map_err(|_| row_err(format!("bad timestamp {:?}", &record[0])))?;
        if let Some(&prev) = timestamps.last() {
            let step = ts - prev;
            let expected = if timestamps.len() >= 2 { timestamps[1] - timestamps[0] } else { step };
            if step <= 0 || step != expected {
                return Err(row_err(format!("non-uniform timestamp spacing: step {step}s, expected {expected}s")));
            }
        }
        timestamps.push(ts);
        for (label, field) in labels.iter().zip(record.iter().skip(1)) {
            if field.is_empty() {
                return Err(row_err(format!("missing price for {label}")));
            }
            let price: f64 = field.parse().map_err(|_| row_err(format!("bad price {field:?} for {label}")))?;
            if !(price.is_finite() && price > 0.0) {
                return Err(row_err(format!("non-positive price {field} for {label}")));
            }
            prices.push(price);
        }
    }
    PriceSeries::new(labels, timestamps, prices).map_err(|e| data_err(e.to_string()))
}

/// Writes `series` in the CSV layout read by [`load_price_csv`]. Prices use the
/// shortest decimal form that parses back to the same `f64`.
pub fn write_price_csv(path: &Path, series: &PriceSeries) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        write!(out, "timestamp")?;
        for label in series.labels() {
            write!(out, ",{label}")?;
        }
        writeln!(out)?;
        for (ts, row) in series.timestamps().iter().zip(series.rows()) {
            write!(out, "{ts}")?;
            for p in row {
                write!(out, ",{p}")?;
            }
            writeln!(out)?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| Error::io(path, e))
}

/// Correlated geometric Brownian motion on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GbmSpec {
    pub labels: Vec<String>,
    pub initial_prices: Vec<f64>,
    /// Mean one-step log increment per asset.
    pub drifts: Vec<f64>,
    /// Standard deviation of the one-step log increment per asset.
    pub volatilities: Vec<f64>,
    pub correlation: Vec<Vec<f64>>,
    /// Number of increments; the series has `steps + 1` rows.
    pub steps: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_start")]
    pub start_timestamp: i64,
    #[serde(default = "default_step_seconds")]
    pub step_seconds: i64,
}

fn default_start() -> i64 {
    1_609_459_200
}

fn default_step_seconds() -> i64 {
    60
}

impl GbmSpec {
    /// Independent assets with a common per-step volatility and zero drift.
    pub fn independent(labels: &[&str], initial_prices: &[f64], volatility: f64, steps: usize, seed: u64) -> Self {
        let n = labels.len();
        let correlation = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
        Self {
            labels: labels.iter().map(|s| s.to_string()).collect(),
            initial_prices: initial_prices.to_vec(),
            drifts: vec![0.0; n],
            volatilities: vec![volatility; n],
            correlation,
            steps,
            seed,
            start_timestamp: default_start(),
            step_seconds: default_step_seconds(),
        }
    }

    fn invalid(msg: String) -> Error {
        Error::Config(format!("gbm: {msg}"))
    }

    /// Checks shapes and returns a factor `A` with `A A^T = correlation`.
    fn factor(&self) -> Result<DMatrix<f64>> {
        let n = self.labels.len();
        for (name, len) in [
            ("initial_prices", self.initial_prices.len()),
            ("drifts", self.drifts.len()),
            ("volatilities", self.volatilities.len()),
            ("correlation rows", self.correlation.len()),
        ] {
            if len != n {
                return Err(Self::invalid(format!("{name} has {len} entries for {n} assets")));
            }
        }
        if self.initial_prices.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Self::invalid("initial prices must be positive".into()));
        }
        if self.volatilities.iter().any(|&v| !(v >= 0.0 && v.is_finite())) || self.drifts.iter().any(|d| !d.is_finite()) {
            return Err(Self::invalid("volatilities must be >= 0 and drifts finite".into()));
        }
        if self.step_seconds <= 0 {
            return Err(Self::invalid("step_seconds must be positive".into()));
        }
        if self.correlation.iter().any(|r| r.len() != n) {
            return Err(Self::invalid("correlation must be square".into()));
        }
        let c = DMatrix::from_fn(n, n, |i, j| self.correlation[i][j]);
        for i in 0..n {
            if (c[(i, i)] - 1.0).abs() > 1e-12 {
                return Err(Self::invalid(format!("correlation diagonal entry {i} is {}", c[(i, i)])));
            }
            for j in 0..i {
                if (c[(i, j)] - c[(j, i)]).abs() > 1e-12 {
                    return Err(Self::invalid(format!("correlation not symmetric at ({i}, {j})")));
                }
            }
        }
        let eig = SymmetricEigen::new(c);
        if let Some(min) = eig.eigenvalues.iter().copied().reduce(f64::min) {
            if min < -1e-12 {
                return Err(Self::invalid(format!("correlation is not positive semi-definite (eigenvalue {min})")));
            }
        }
        let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
        Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots))
    }
}

/// Simulates the price series described by `spec`. The same spec always
/// produces the same bits.
pub fn generate_gbm(spec: &GbmSpec) -> Result<PriceSeries> {
    let factor = spec.factor()?;
    let n = spec.labels.len();
    let rows = spec.steps + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut prices = Vec::with_capacity(rows * n);
    prices.extend_from_slice(&spec.initial_prices);
    let mut log_price: Vec<f64> = spec.initial_prices.iter().map(|p| p.ln()).collect();
    let mut eps = vec![0.0; n];
    for _ in 0..spec.steps {
        for e in eps.iter_mut() {
            *e = StandardNormal.sample(&mut rng);
        }
        for i in 0..n {
            let z: f64 = (0..n).map(|j| factor[(i, j)] * eps[j]).sum();
            log_price[i] += spec.drifts[i] + spec.volatilities[i] * z;
        }
        for i in 0..n {
            // exact for zero diffusion so flat paths stay flat
            prices.push(if spec.volatilities[i] == 0.0 && spec.drifts[i] == 0.0 {
                spec.initial_prices[i]
            } else {
                log_price[i].exp()
            });
        }
    }
    let timestamps = (0..rows as i64).map(|t| spec.start_timestamp + t * spec.step_seconds).collect();
    Ok(PriceSeries::new(spec.labels.clone(), timestamps, prices)?)
}
