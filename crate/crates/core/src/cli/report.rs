//! Report rows and their CSV / JSON-lines encodings.
//!
//! Column order (gnuplot-ready, one header line):
//! `experiment_id, estimate, std_error, theory, z_score, n_samples, n_accepted,
//! wall_time_s, seed, reference, truncation_offset`. Missing values are empty.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::config::OutputFormat;
use crate::error::{Error, Result};
use crate::estimators::EstimatorResult;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub experiment_id: String,
    pub estimate: f64,
    pub std_error: f64,
    pub theory: Option<f64>,
    pub z_score: Option<f64>,
    pub n_samples: u64,
    pub n_accepted: u64,
    pub wall_time_s: f64,
    pub seed: u64,
    pub reference: Option<f64>,
    pub truncation_offset: Option<f64>,
}

impl ReportRow {
    pub fn new(experiment_id: String, r: &EstimatorResult, seed: u64) -> Self {
        ReportRow {
            experiment_id,
            estimate: r.estimate,
            std_error: r.std_error,
            theory: r.theory.as_ref().map(|t| t.value),
            z_score: r.z_score,
            n_samples: r.n_samples,
            n_accepted: r.n_accepted,
            wall_time_s: r.wall_time,
            seed,
            reference: r.reference.as_ref().map(|t| t.value),
            truncation_offset: r.truncation_offset,
        }
    }
}

pub fn write_rows<W: Write>(out: W, rows: &[ReportRow], format: OutputFormat) -> Result<()> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for row in rows {
                w.serialize(row).map_err(csv_error)?;
            }
            w.flush()?;
        }
        OutputFormat::Jsonl => {
            let mut out = out;
            for row in rows {
                let line = serde_json::to_string(row).map_err(|e| Error::Io(e.to_string()))?;
                writeln!(out, "{line}")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

pub fn read_csv_rows<R: std::io::Read>(input: R) -> Result<Vec<ReportRow>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .map(|r| r.map_err(csv_error))
        .collect()
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(format!("csv: {e}"))
}
