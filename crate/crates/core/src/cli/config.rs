//! Strict JSON experiment definitions.
//!
//! ```json
//! {
//!   "experiment_id": "segments-on-disk",
//!   "estimator": "mean_traversed_length",
//!   "body": {"shape": "ball", "radius": 1.0},
//!   "process": {"curve": "segment", "length": 2.0},
//!   "n_samples": 1000000,
//!   "seed": 7
//! }
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bodies::{Body, BodySpec};
use crate::curves::ProcessSpec;
use crate::error::{Error, Result};
use crate::estimators::MIN_SAMPLES;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// ⟨L⟩ = Σ L / Σ χ for segments, walks, trees, loops or lines.
    MeanTraversedLength,
    /// Mean length, inclusion probability, mean arc and mean χ of a small loop.
    SmallLoop,
    /// Containment probability of one ball placed inside another.
    Inclusion,
    /// Truncated walk or line, pieces counted as half the crossings.
    InfiniteCurve,
    /// One-chord and multiple-chord means over random lines.
    ChordMeans,
    /// Mean traversed length for several processes, with pairwise z-scores.
    Invariance,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::MeanTraversedLength => "mean_traversed_length",
            EstimatorKind::SmallLoop => "small_loop",
            EstimatorKind::Inclusion => "inclusion",
            EstimatorKind::InfiniteCurve => "infinite_curve",
            EstimatorKind::ChordMeans => "chord_means",
            EstimatorKind::Invariance => "invariance",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Report file; standard output when absent.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub estimator: EstimatorKind,
    pub body: BodySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process: Option<ProcessSpec>,
    /// Process list for the invariance estimator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub processes: Option<Vec<ProcessSpec>>,
    /// Moving ball for the inclusion estimator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moving_body: Option<BodySpec>,
    pub n_samples: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_factor: Option<f64>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    /// Parses and validates. Schema errors carry the line and column.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| {
            Error::Config(format!("line {}, column {}: {e}", e.line(), e.column()))
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Cross-field checks that the schema cannot express.
    pub fn validate(&self) -> Result<()> {
        if self.experiment_id.trim().is_empty() {
            return Err(Error::Config("experiment_id must not be empty".into()));
        }
        if self.n_samples < MIN_SAMPLES {
            return Err(Error::Config(format!(
                "n_samples = {} is below the minimum of {MIN_SAMPLES}",
                self.n_samples
            )));
        }
        if let Some(k) = self.truncation_factor {
            if !(k.is_finite() && k > 0.0) {
                return Err(Error::Config(format!("truncation_factor must be positive, got {k}")));
            }
        }
        let body = self.body()?;
        let need = |field: &str, present: bool| {
            if present {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "estimator {} needs the `{field}` field",
                    self.estimator.name()
                )))
            }
        };
        match self.estimator {
            EstimatorKind::Inclusion => need("moving_body", self.moving_body.is_some())?,
            EstimatorKind::ChordMeans => {}
            EstimatorKind::Invariance => need("processes", self.processes.is_some())?,
            _ => need("process", self.process.is_some())?,
        }
        if let Some(p) = &self.process {
            p.validate().map_err(|e| Error::Config(format!("process: {e}")))?;
        }
        for p in self.processes.iter().flatten() {
            p.validate().map_err(|e| Error::Config(format!("processes: {e}")))?;
        }
        if let Some(m) = &self.moving_body {
            let m = Body::from_spec(m).map_err(|e| Error::Config(format!("moving_body: {e}")))?;
            if m.dimension() != body.dimension() {
                return Err(Error::Config("moving_body and body differ in dimension".into()));
            }
        }
        Ok(())
    }

    pub fn body(&self) -> Result<Body> {
        Body::from_spec(&self.body).map_err(|e| Error::Config(format!("body: {e}")))
    }
}
