use serde::{Deserialize, Serialize};

use crate::predictors::PredictorKind;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SlotMetrics {
    pub slot_index: u32,
    pub online_count: u64,
    pub searches_initiated: u64,
    pub searches_succeeded: u64,
    pub sum_latency_ms: f64,
    pub sum_hops: u64,
    pub sum_prediction_error: f64,
    pub prediction_samples: u64,
    pub resolve_invocations: u64,
    pub resolve_messages: u64,
    /// Sum over online nodes of (stored backup entries / levels).
    pub sum_backup_per_level: f64,
    pub backup_samples: u64,
    pub sum_right_state_size: f64,
    pub right_state_samples: u64,
}

impl SlotMetrics {
    fn add(&mut self, o: &SlotMetrics) {
        self.online_count += o.online_count;
        self.searches_initiated += o.searches_initiated;
        self.searches_succeeded += o.searches_succeeded;
        self.sum_latency_ms += o.sum_latency_ms;
        self.sum_hops += o.sum_hops;
        self.sum_prediction_error += o.sum_prediction_error;
        self.prediction_samples += o.prediction_samples;
        self.resolve_invocations += o.resolve_invocations;
        self.resolve_messages += o.resolve_messages;
        self.sum_backup_per_level += o.sum_backup_per_level;
        self.backup_samples += o.backup_samples;
        self.sum_right_state_size += o.sum_right_state_size;
        self.right_state_samples += o.right_state_samples;
    }

    pub fn success_ratio(&self) -> f64 {
        ratio(self.searches_succeeded as f64, self.searches_initiated)
    }
}

fn ratio(num: f64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num / den as f64
    }
}

/// Error totals for one predictor run on the trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PredictorError {
    pub predictor: PredictorKind,
    pub sum_error: f64,
    pub samples: u64,
    pub mean_error: f64,
    pub std_dev: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunMetrics {
    pub topologies: u32,
    /// Per-slot totals, summed over topologies.
    pub slots: Vec<SlotMetrics>,
    pub totals: SlotMetrics,
    pub avg_success_ratio: f64,
    pub avg_search_latency_ms: f64,
    pub avg_prediction_error: f64,
    pub avg_backup_neighbors_per_level: f64,
    pub avg_resolve_messages: f64,
    pub avg_hops: f64,
    pub avg_right_state_size: f64,
    /// Standard deviations of the per-topology averages.
    pub std_success_ratio: f64,
    pub std_search_latency_ms: f64,
    pub std_prediction_error: f64,
    /// Primary predictor first, then any shadow predictors.
    pub predictor_errors: Vec<PredictorError>,
    #[serde(skip)]
    pub trace: Vec<String>,
}

impl RunMetrics {
    pub(crate) fn from_slots(slots: Vec<SlotMetrics>, predictor_errors: Vec<PredictorError>, trace: Vec<String>) -> Self {
        let mut totals = SlotMetrics::default();
        for s in &slots {
            totals.add(s);
        }
        let mut m = RunMetrics {
            topologies: 1,
            slots,
            totals,
            predictor_errors,
            trace,
            ..RunMetrics::default()
        };
        m.finish();
        m
    }

    fn finish(&mut self) {
        let t = &self.totals;
        self.avg_success_ratio = t.success_ratio();
        self.avg_search_latency_ms = ratio(t.sum_latency_ms, t.searches_initiated);
        self.avg_prediction_error = ratio(t.sum_prediction_error, t.prediction_samples);
        self.avg_backup_neighbors_per_level = ratio(t.sum_backup_per_level, t.backup_samples);
        self.avg_resolve_messages = ratio(t.resolve_messages as f64, t.resolve_invocations);
        self.avg_hops = ratio(t.sum_hops as f64, t.searches_initiated);
        self.avg_right_state_size = ratio(t.sum_right_state_size, t.right_state_samples);
        for e in &mut self.predictor_errors {
            e.mean_error = ratio(e.sum_error, e.samples);
        }
    }
}

fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

/// Sample-weighted combination of runs; standard deviations are taken over
/// the per-run averages.
pub fn aggregate(runs: &[RunMetrics]) -> RunMetrics {
    let Some(first) = runs.first() else {
        return RunMetrics::default();
    };
    if runs.len() == 1 {
        return first.clone();
    }
    let slot_count = runs.iter().map(|r| r.slots.len()).max().unwrap_or(0);
    let mut slots: Vec<SlotMetrics> = (0..slot_count)
        .map(|i| SlotMetrics {
            slot_index: i as u32,
            ..SlotMetrics::default()
        })
        .collect();
    let mut totals = SlotMetrics::default();
    for r in runs {
        for (acc, s) in slots.iter_mut().zip(&r.slots) {
            acc.add(s);
        }
        totals.add(&r.totals);
    }
    let mut predictor_errors = first.predictor_errors.clone();
    for (i, e) in predictor_errors.iter_mut().enumerate() {
        e.sum_error = runs.iter().map(|r| r.predictor_errors[i].sum_error).sum();
        e.samples = runs.iter().map(|r| r.predictor_errors[i].samples).sum();
        let means: Vec<f64> = runs.iter().map(|r| r.predictor_errors[i].mean_error).collect();
        e.std_dev = std_dev(&means);
    }
    let per_run = |f: fn(&RunMetrics) -> f64| runs.iter().map(f).collect::<Vec<f64>>();
    let mut m = RunMetrics {
        topologies: runs.iter().map(|r| r.topologies).sum(),
        slots,
        totals,
        std_success_ratio: std_dev(&per_run(|r| r.avg_success_ratio)),
        std_search_latency_ms: std_dev(&per_run(|r| r.avg_search_latency_ms)),
        std_prediction_error: std_dev(&per_run(|r| r.avg_prediction_error)),
        predictor_errors,
        trace: runs.iter().flat_map(|r| r.trace.iter().cloned()).collect(),
        ..RunMetrics::default()
    };
    m.finish();
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(succ: u64, init: u64, lat: f64) -> RunMetrics {
        let slot = SlotMetrics {
            searches_initiated: init,
            searches_succeeded: succ,
            sum_latency_ms: lat,
            ..SlotMetrics::default()
        };
        RunMetrics::from_slots(vec![slot], Vec::new(), Vec::new())
    }

    #[test]
    fn aggregate_is_weighted() {
        let agg = aggregate(&[run(1, 2, 10.0), run(9, 10, 50.0)]);
        assert!((agg.avg_success_ratio - 10.0 / 12.0).abs() < 1e-12);
        assert!((agg.avg_search_latency_ms - 5.0).abs() < 1e-12);
        assert_eq!(agg.topologies, 2);
        assert_eq!(agg.slots.len(), 1);
    }

    #[test]
    fn aggregate_of_identical_runs() {
        let r = run(3, 4, 8.0);
        let agg = aggregate(&[r.clone(), r.clone(), r.clone()]);
        assert_eq!(agg.avg_success_ratio, r.avg_success_ratio);
        assert_eq!(agg.avg_search_latency_ms, r.avg_search_latency_ms);
        assert_eq!(agg.std_success_ratio, 0.0);
    }
}
