//! Parameter sweeps written as CSV.

use std::io::Write;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::monte_carlo::{monte_carlo, PolicySummary};
use crate::error::Result;

pub const CSV_HEADER: [&str; 8] = [
    "axis",
    "policy",
    "mean_utility",
    "std_err",
    "mean_kappa",
    "mean_alpha",
    "mean_beta",
    "trials",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis: f64,
    pub policy: String,
    pub mean_utility: f64,
    pub std_err: f64,
    pub mean_kappa: f64,
    pub mean_alpha: f64,
    pub mean_beta: f64,
    pub trials: usize,
}

impl SweepRow {
    pub fn from_summary(axis: f64, s: &PolicySummary) -> Self {
        SweepRow {
            axis,
            policy: s.policy.to_string(),
            mean_utility: s.mean_utility,
            std_err: s.std_err,
            mean_kappa: s.mean_kappa,
            mean_alpha: s.mean_alpha,
            mean_beta: s.mean_beta,
            trials: s.trials,
        }
    }
}

/// CSV sink that writes the header up front and flushes after every batch.
pub struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut writer = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(out);
        writer.write_record(CSV_HEADER)?;
        writer.flush()?;
        Ok(CsvSink { writer })
    }

    pub fn write_rows(&mut self, rows: &[SweepRow]) -> Result<()> {
        for r in rows {
            self.writer.serialize(r)?;
        }
        self.writer.flush()?;
        Ok(())
    }

    pub fn into_inner(self) -> Result<W> {
        self.writer
            .into_inner()
            .map_err(|e| crate::error::Error::Io(e.into_error()))
    }
}

/// One Monte-Carlo run per grid value, rows streamed to `out` as each grid
/// point completes. Rows already written stay written if a later point
/// fails.
pub fn sweep_to_writer<W: Write>(config: &ExperimentConfig, out: W) -> Result<Vec<SweepRow>> {
    let mut sink = CsvSink::new(out)?;
    let mut all = Vec::new();
    for v in config.grid() {
        let point = config.at(v)?;
        let run = monte_carlo(&point)?;
        let rows: Vec<SweepRow> = run
            .summaries
            .iter()
            .map(|s| SweepRow::from_summary(v, s))
            .collect();
        sink.write_rows(&rows)?;
        all.extend(rows);
    }
    Ok(all)
}

pub fn sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    sweep_to_writer(config, std::io::sink())
}

pub fn rows_to_csv(rows: &[SweepRow]) -> Result<String> {
    let mut sink = CsvSink::new(Vec::new())?;
    sink.write_rows(rows)?;
    let bytes = sink.into_inner()?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
