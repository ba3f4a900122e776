//! Experiment matrices: config files, sweeps over stabilizer × predictor ×
//! backup size, and CSV/JSON reports.

mod config;
mod report;

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use config::{parse_config, parse_config_str, Overrides};
pub use report::{emit_reports, preflight, read_json_report, JsonReport, Report, ReportRow, CSV_HEADER};

use crate::engine::{run_all, PredictorError, SimConfig};
use crate::error::{Error, Result};
use crate::predictors::PredictorKind;
use crate::stabilizers::StabilizerKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::config("format", format!("unknown report format `{s}`"))),
        }
    }
}

/// A resolved experiment: the base configuration plus the sweep lists.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub base: SimConfig,
    pub backup_sizes: Vec<usize>,
    pub stabilizers: Vec<StabilizerKind>,
    pub predictors: Vec<PredictorKind>,
    pub out_dir: PathBuf,
    pub formats: Vec<ReportFormat>,
}

impl RunSpec {
    pub fn new(base: SimConfig) -> Self {
        RunSpec {
            backup_sizes: vec![base.backup_size],
            stabilizers: vec![base.stabilizer],
            predictors: vec![base.predictor],
            base,
            out_dir: PathBuf::from("results"),
            formats: vec![ReportFormat::Csv, ReportFormat::Json],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.backup_sizes.is_empty() {
            return Err(Error::config("backup-size", "sweep list is empty"));
        }
        if self.stabilizers.is_empty() {
            return Err(Error::config("stabilizer", "sweep list is empty"));
        }
        if self.predictors.is_empty() {
            return Err(Error::config("predictor", "sweep list is empty"));
        }
        if self.formats.is_empty() {
            return Err(Error::config("format", "no report format selected"));
        }
        for c in self.combinations() {
            c.validate()?;
        }
        Ok(())
    }

    /// Every sweep combination, stabilizers outermost and backup sizes innermost.
    pub fn combinations(&self) -> Vec<SimConfig> {
        let mut out = Vec::new();
        for &stabilizer in &self.stabilizers {
            for &predictor in &self.predictors {
                for &backup_size in &self.backup_sizes {
                    out.push(SimConfig {
                        stabilizer,
                        predictor,
                        backup_size,
                        ..self.base.clone()
                    });
                }
            }
        }
        out
    }
}

/// Runs every combination of `spec` in order. Progress goes to the log.
pub fn run_experiments(spec: &RunSpec) -> Result<Vec<Report>> {
    spec.validate()?;
    let combos = spec.combinations();
    let total = combos.len();
    let mut reports = Vec::with_capacity(total);
    for (i, config) in combos.into_iter().enumerate() {
        log::info!(
            "[{}/{total}] stabilizer={} predictor={} backup-size={}",
            i + 1,
            config.stabilizer,
            config.predictor,
            config.backup_size
        );
        let metrics = run_all(&config).map_err(|e| {
            Error::config(
                "combination",
                format!(
                    "stabilizer={} predictor={} backup-size={}: {e}",
                    config.stabilizer, config.predictor, config.backup_size
                ),
            )
        })?;
        reports.push(Report::new(&config, metrics));
    }
    Ok(reports)
}

/// Prediction error of all seven predictors on the same churn trace, with
/// routing recovery switched off.
pub fn predict_bench(base: &SimConfig) -> Result<Vec<PredictorError>> {
    let config = SimConfig {
        stabilizer: StabilizerKind::None,
        predictor: PredictorKind::SwDbg,
        shadow_predictors: PredictorKind::ALL.to_vec(),
        ..base.clone()
    };
    Ok(run_all(&config)?.predictor_errors)
}
