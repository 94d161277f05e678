//! CSV writers for run outputs.
//!
//! Floats use Rust's shortest round-trip formatting, so every value reads
//! back exactly and identical runs produce identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::sweep::CellResult;

pub const SUMMARY_HEADER: [&str; 13] = [
    "strategy_id",
    "memory_days",
    "k",
    "gamma_bps",
    "gas_usd",
    "tau_cex_bps",
    "nu",
    "final_rvr_usd",
    "scaled_rvr",
    "pool_return",
    "cex_return",
    "lvr_usd",
    "monthly_volume_usd",
];

/// Thin CSV writer that tags IO failures with the output path.
#[derive(Debug)]
pub struct CsvOut<W: Write> {
    inner: csv::Writer<W>,
    path: PathBuf,
}

impl CsvOut<BufWriter<File>> {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        Self::new(BufWriter::new(file), path.to_path_buf(), header)
    }
}

impl<W: Write> CsvOut<W> {
    pub fn new(sink: W, path: PathBuf, header: &[&str]) -> Result<Self> {
        let mut out = Self { inner: csv::Writer::from_writer(sink), path };
        out.record(header.iter().copied())?;
        Ok(out)
    }

    pub fn record<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner.write_record(fields).map_err(|e| self.csv_err(e))
    }

    pub fn flush(&mut self) -> Result<()> {
        let path = &self.path;
        self.inner.flush().map_err(|e| Error::io(path, e))
    }

    pub fn finish(mut self) -> Result<()> {
        self.flush()?;
        let path = self.path.clone();
        let mut sink = self.inner.into_inner().map_err(|e| Error::io(&path, e.into_error()))?;
        sink.flush().map_err(|e| Error::io(&path, e))
    }

    fn csv_err(&self, e: csv::Error) -> Error {
        Error::io(&self.path, e.into())
    }
}

/// Summary table writer shared by `simulate`, `sweep` and `cube`.
#[derive(Debug)]
pub struct SummaryWriter<W: Write> {
    out: CsvOut<W>,
}

impl<W: Write> SummaryWriter<W> {
    pub fn new(sink: W, path: PathBuf) -> Result<Self> {
        Ok(Self { out: CsvOut::new(sink, path, &SUMMARY_HEADER)? })
    }

    pub fn write(&mut self, row: &CellResult) -> Result<()> {
        let c = &row.cell;
        let s = &row.summary;
        self.out.record([
            row.strategy_id.clone(),
            c.memory_days.to_string(),
            c.k.to_string(),
            c.pool_fee_bps.to_string(),
            c.gas_usd.to_string(),
            c.tau_cex_bps.to_string(),
            c.nu.to_string(),
            s.final_rvr_usd.to_string(),
            s.scaled_rvr.to_string(),
            s.pool_return.to_string(),
            s.cex_return.to_string(),
            s.lvr_usd.to_string(),
            s.monthly_volume_usd.to_string(),
        ])
    }

    pub fn flush(&mut self) -> Result<()> {
        self.out.flush()
    }

    pub fn finish(self) -> Result<()> {
        self.out.finish()
    }
}

pub fn write_summary(path: &Path, rows: &[CellResult]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = SummaryWriter::new(BufWriter::new(file), path.to_path_buf())?;
    for row in rows {
        w.write(row)?;
    }
    w.finish()
}

/// Header `prefix_1, ..., prefix_n` style columns.
pub fn numbered(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}_{i}")).collect()
}
