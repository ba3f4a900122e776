use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::ReportFormat;
use crate::engine::{PredictorError, RunMetrics, SimConfig, SlotMetrics};
use crate::error::Result;
use crate::predictors::PredictorKind;
use crate::stabilizers::StabilizerKind;

/// One line of the results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportRow {
    pub stabilizer: StabilizerKind,
    pub predictor: PredictorKind,
    pub backup_size: usize,
    pub avg_success_ratio: f64,
    pub avg_search_latency_ms: f64,
    pub avg_prediction_error: f64,
    pub avg_resolve_messages: f64,
    pub std_success_ratio: f64,
    pub std_search_latency_ms: f64,
    pub std_prediction_error: f64,
    pub topologies: u32,
    pub slots: u32,
    pub seed: u64,
}

pub const CSV_HEADER: &str = "stabilizer,predictor,backupSize,avgSuccessRatio,avgSearchLatencyMs,\
avgPredictionError,avgResolveMessages,stdSuccessRatio,stdSearchLatencyMs,stdPredictionError,topologies,slots,seed";

impl ReportRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.stabilizer,
            self.predictor,
            self.backup_size,
            self.avg_success_ratio,
            self.avg_search_latency_ms,
            self.avg_prediction_error,
            self.avg_resolve_messages,
            self.std_success_ratio,
            self.std_search_latency_ms,
            self.std_prediction_error,
            self.topologies,
            self.slots,
            self.seed
        )
    }
}

/// A row together with the metrics it was computed from.
#[derive(Clone, Debug)]
pub struct Report {
    pub row: ReportRow,
    pub metrics: RunMetrics,
}

impl Report {
    pub fn new(config: &SimConfig, metrics: RunMetrics) -> Self {
        let row = ReportRow {
            stabilizer: config.stabilizer,
            predictor: config.predictor,
            backup_size: config.backup_size,
            avg_success_ratio: metrics.avg_success_ratio,
            avg_search_latency_ms: metrics.avg_search_latency_ms,
            avg_prediction_error: metrics.avg_prediction_error,
            avg_resolve_messages: metrics.avg_resolve_messages,
            std_success_ratio: metrics.std_success_ratio,
            std_search_latency_ms: metrics.std_search_latency_ms,
            std_prediction_error: metrics.std_prediction_error,
            topologies: metrics.topologies,
            slots: config.slots,
            seed: config.seed,
        };
        Report { row, metrics }
    }

    fn trace_file_name(&self) -> String {
        format!(
            "trace-{}-{}-b{}.ndjson",
            self.row.stabilizer, self.row.predictor, self.row.backup_size
        )
    }
}

/// JSON form of a report: the row fields, the secondary averages and the
/// per-slot series summed over topologies.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct JsonReport {
    #[serde(flatten)]
    pub row: ReportRow,
    pub avg_backup_neighbors_per_level: f64,
    pub avg_hops: f64,
    pub avg_right_state_size: f64,
    pub predictor_errors: Vec<PredictorError>,
    pub series: Vec<SlotMetrics>,
}

impl From<&Report> for JsonReport {
    fn from(r: &Report) -> Self {
        JsonReport {
            row: r.row.clone(),
            avg_backup_neighbors_per_level: r.metrics.avg_backup_neighbors_per_level,
            avg_hops: r.metrics.avg_hops,
            avg_right_state_size: r.metrics.avg_right_state_size,
            predictor_errors: r.metrics.predictor_errors.clone(),
            series: r.metrics.slots.clone(),
        }
    }
}

/// Fails early when `dir` cannot hold the reports.
pub fn preflight(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let probe = dir.join(".interlace-write-probe");
    fs::write(&probe, b"")?;
    fs::remove_file(&probe)?;
    Ok(())
}

/// Writes `results.csv` and/or `results.json` (plus trace files when traces
/// were recorded) and returns the paths written.
pub fn emit_reports(reports: &[Report], formats: &[ReportFormat], dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    if formats.contains(&ReportFormat::Csv) {
        let mut csv = String::from(CSV_HEADER);
        csv.push('\n');
        for r in reports {
            csv.push_str(&r.row.csv_line());
            csv.push('\n');
        }
        let path = dir.join("results.csv");
        fs::write(&path, csv)?;
        written.push(path);
    }
    if formats.contains(&ReportFormat::Json) {
        let json: Vec<JsonReport> = reports.iter().map(JsonReport::from).collect();
        let path = dir.join("results.json");
        fs::write(&path, serde_json::to_string_pretty(&json)? + "\n")?;
        written.push(path);
    }
    for r in reports.iter().filter(|r| !r.metrics.trace.is_empty()) {
        let mut text = String::new();
        for line in &r.metrics.trace {
            let _ = writeln!(text, "{line}");
        }
        let path = dir.join(r.trace_file_name());
        fs::write(&path, text)?;
        written.push(path);
    }
    Ok(written)
}

pub fn read_json_report(path: &Path) -> Result<Vec<JsonReport>> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
