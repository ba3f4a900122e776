use interlace::engine::SimConfig;
use interlace::runner::{
    emit_reports, parse_config_str, preflight, read_json_report, run_experiments, Overrides, ReportFormat, RunSpec,
    CSV_HEADER,
};
use interlace::stabilizers::StabilizerKind;

fn tiny_spec(dir: &std::path::Path) -> RunSpec {
    let mut spec = RunSpec::new(SimConfig {
        capacity: 64,
        slots: 6,
        topologies: 2,
        search_cap: Some(50),
        ..SimConfig::default()
    });
    spec.out_dir = dir.to_path_buf();
    spec
}

#[test]
fn one_combination_gives_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let spec = tiny_spec(dir.path());
    let reports = run_experiments(&spec).unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].row.topologies, 2);
    emit_reports(&reports, &[ReportFormat::Csv], dir.path()).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0], CSV_HEADER);
    assert!(lines[1].starts_with("interlaced,swdbg,40,"));
    assert_eq!(lines[1].split(',').count(), CSV_HEADER.split(',').count());
}

#[test]
fn sweep_gives_one_row_per_combination() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = tiny_spec(dir.path());
    spec.base.topologies = 1;
    spec.base.slots = 2;
    spec.backup_sizes = vec![10, 20, 30, 40, 50];
    spec.stabilizers = vec![StabilizerKind::Interlaced, StabilizerKind::Dks];
    assert_eq!(run_experiments(&spec).unwrap().len(), 10);
}

#[test]
fn json_round_trips_and_series_add_up() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = tiny_spec(dir.path());
    spec.base.capacity = 256;
    spec.base.slots = 12;
    let reports = run_experiments(&spec).unwrap();
    emit_reports(&reports, &[ReportFormat::Json], dir.path()).unwrap();
    let back = read_json_report(&dir.path().join("results.json")).unwrap();
    assert_eq!(back.len(), 1);
    assert_eq!(back[0].row, reports[0].row);
    let series = &back[0].series;
    assert_eq!(series.len(), 12);
    let init: u64 = series.iter().map(|s| s.searches_initiated).sum();
    let succ: u64 = series.iter().map(|s| s.searches_succeeded).sum();
    let lat: f64 = series.iter().map(|s| s.sum_latency_ms).sum();
    let err: f64 = series.iter().map(|s| s.sum_prediction_error).sum();
    let samples: u64 = series.iter().map(|s| s.prediction_samples).sum();
    let row = &back[0].row;
    assert!(init > 0);
    assert!((row.avg_success_ratio - succ as f64 / init as f64).abs() < 1e-12);
    assert!((row.avg_search_latency_ms - lat / init as f64).abs() < 1e-9);
    assert!((row.avg_prediction_error - err / samples as f64).abs() < 1e-12);
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let mut spec = tiny_spec(dir.path());
        spec.base.capacity = 128;
        spec.backup_sizes = vec![10, 30];
        let reports = run_experiments(&spec).unwrap();
        emit_reports(&reports, &[ReportFormat::Csv, ReportFormat::Json], dir.path()).unwrap();
    }
    for name in ["results.csv", "results.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
}

#[test]
fn unwritable_output_is_rejected_up_front() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain-file");
    std::fs::write(&file, "x").unwrap();
    assert!(preflight(&file.join("sub")).is_err());
    assert!(preflight(&dir.path().join("fresh/nested")).is_ok());
}

#[test]
fn file_and_flags_combine() {
    let overrides = Overrides {
        slots: Some(5),
        stabilizers: Some(vec![StabilizerKind::Kademlia]),
        ..Overrides::default()
    };
    let spec = parse_config_str("slots = 9\ncapacity = 128\nstabilizer = \"dks\"", &overrides).unwrap();
    assert_eq!(spec.base.slots, 5);
    assert_eq!(spec.base.capacity, 128);
    assert_eq!(spec.stabilizers, vec![StabilizerKind::Kademlia]);
}
