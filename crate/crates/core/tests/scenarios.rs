//! The shipped scenario and profile files, run end to end through the
//! public runner. These tests treat the files in `scenarios/` and
//! `profiles/` as part of the product: if an edit there changes the
//! numbers, it fails here.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use sema_core::{load_profile, run_scenario, ConfigError, CostProfile};

fn repo_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

#[derive(Debug, Clone)]
struct Row {
    series: String,
    x: Option<f64>,
    y: f64,
    source: String,
}

fn run_to_rows(scenario: &str) -> Vec<Row> {
    let dir = tempfile::tempdir().unwrap();
    let output = run_scenario(&repo_path(scenario), dir.path()).unwrap();
    let text = std::fs::read_to_string(&output.csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("scenario,series,x,x_unit,y,y_unit,source"),
        "header drifted"
    );
    lines
        .map(|line| {
            let fields: Vec<&str> = line.split(',').collect();
            assert_eq!(fields.len(), 7, "malformed row: {line}");
            Row {
                series: fields[1].to_string(),
                x: (!fields[2].is_empty()).then(|| fields[2].parse().unwrap()),
                y: fields[4].parse().unwrap(),
                source: fields[6].to_string(),
            }
        })
        .collect()
}

fn computed(rows: &[Row], series: &str) -> f64 {
    let hits: Vec<&Row> = rows
        .iter()
        .filter(|r| r.series == series && r.source == "computed")
        .collect();
    assert_eq!(hits.len(), 1, "expected one computed {series} row");
    hits[0].y
}

fn computed_at(rows: &[Row], series: &str, x: f64) -> f64 {
    rows.iter()
        .find(|r| r.series == series && r.source == "computed" && r.x == Some(x))
        .unwrap_or_else(|| panic!("no computed {series} row at x={x}"))
        .y
}

#[test]
fn table1_reports_the_published_byte_cells() {
    let rows = run_to_rows("scenarios/table1.toml");
    assert_eq!(computed(&rows, "raw/voice"), 96_000.0);
    assert_eq!(computed(&rows, "raw/vision"), 950_000.0);
    assert_eq!(computed(&rows, "raw_compress/voice"), 12_000.0);
    assert_eq!(computed(&rows, "raw_compress/vision"), 700_000.0);
    assert_eq!(computed(&rows, "sema_static/voice"), 188.0);
    assert_eq!(computed(&rows, "sema_static/vision"), 832.0);
    assert_eq!(computed(&rows, "sema_hybrid/voice"), 188.0);
    let hybrid = computed(&rows, "sema_hybrid/vision");
    assert!(
        (3000.0..=5000.0).contains(&hybrid),
        "hybrid median {hybrid} outside the published range"
    );
    assert!(
        rows.iter().any(|r| r.source == "paper"),
        "reference overlay missing"
    );
}

#[test]
fn latency_sweep_keeps_sema_under_100ms_at_the_anchor_bandwidths() {
    let rows = run_to_rows("scenarios/fig_latency.toml");
    for series in ["sema_static/vision", "sema_hybrid/vision"] {
        for bw in [1.0, 5.0, 100.0] {
            let total = computed_at(&rows, series, bw);
            assert!(total < 100.0, "{series} at {bw} Mbps was {total} ms");
        }
    }
    let raw_5 = computed_at(&rows, "raw_compress/vision", 5.0);
    assert!((raw_5 - 1120.0).abs() <= 112.0, "raw compress at 5 Mbps: {raw_5}");
    let raw_1 = computed_at(&rows, "raw_compress/vision", 1.0);
    assert!((raw_1 - 5600.0).abs() <= 560.0, "raw compress at 1 Mbps: {raw_1}");
}

#[test]
fn hybrid_latency_stays_nearly_flat_across_the_sweep() {
    let rows = run_to_rows("scenarios/fig_latency.toml");
    let totals: Vec<f64> = rows
        .iter()
        .filter(|r| r.series == "sema_hybrid/vision" && r.source == "computed")
        .map(|r| r.y)
        .collect();
    assert_eq!(totals.len(), 7);
    let spread = totals.iter().cloned().fold(f64::MIN, f64::max)
        - totals.iter().cloned().fold(f64::MAX, f64::min);
    assert!(spread < 44.0, "1-100 Mbps spread was {spread} ms");
    for total in totals {
        assert!((60.0..104.0).contains(&total));
    }
}

#[test]
fn breakdown_stages_sum_to_the_sweep_totals() {
    let breakdown = run_to_rows("scenarios/fig_breakdown.toml");
    let sweep = run_to_rows("scenarios/fig_latency.toml");
    let mut sums: HashMap<String, f64> = HashMap::new();
    for row in breakdown.iter().filter(|r| r.source == "computed") {
        let (series, _stage) = row.series.rsplit_once('/').unwrap();
        *sums.entry(series.to_string()).or_default() += row.y;
    }
    for series in ["raw/vision", "raw_compress/vision", "sema_static/vision", "sema_hybrid/vision"] {
        let total = computed_at(&sweep, series, 5.0);
        let sum = sums[series];
        assert!(
            (sum - total).abs() < 1e-9,
            "{series}: stages sum {sum}, sweep total {total}"
        );
    }
    assert!(sums.contains_key("sema_hybrid/voice"), "voice breakdown missing");
}

#[test]
fn gap_rate_sweep_reports_the_calibrated_thresholds() {
    let rows = run_to_rows("scenarios/fig_gap_rate.toml");
    assert_eq!(computed(&rows, "batch_tts_3s/gap_free_up_to"), 600.0);
    assert_eq!(computed(&rows, "batch_tts_5s/gap_free_up_to"), 1000.0);
    assert_eq!(computed(&rows, "streaming_rtc/gap_free_up_to"), 0.0);
    for jitter in [100.0, 200.0, 300.0, 400.0, 500.0, 600.0] {
        assert_eq!(
            computed_at(&rows, "batch_tts_3s", jitter),
            0.0,
            "batch 3 s should absorb {jitter} ms"
        );
        assert!(
            computed_at(&rows, "streaming_rtc", jitter) > 0.0,
            "streaming should gap at {jitter} ms"
        );
    }
    assert!(
        rows.iter().any(|r| r.source == "paper"),
        "published thresholds overlay missing"
    );
}

#[test]
fn rate_accuracy_scatter_replays_published_scores_only() {
    let rows = run_to_rows("scenarios/fig_rate_accuracy.toml");
    assert!(rows.iter().all(|r| r.source == "paper"));
    let point = |series: &str| {
        rows.iter()
            .find(|r| r.series == series)
            .unwrap_or_else(|| panic!("missing {series}"))
    };
    let wer_sema = point("voice_wer/sema");
    assert_eq!(wer_sema.x, Some(188.0));
    assert_eq!(wer_sema.y, 4.1);
    let wer_raw = point("voice_wer/raw_compress");
    assert_eq!(wer_raw.x, Some(12_000.0));
    assert_eq!(wer_raw.y, 2.7);
    assert_eq!(point("vision_text/raw").y, 94.0);
    assert_eq!(point("vision_text/sema_static").x, Some(832.0));
    assert_eq!(point("vision_text/sema_static").y, 75.5);
    let hybrid = point("vision_text/sema_hybrid");
    assert_eq!(hybrid.y, 93.3);
    assert!((3000.0..=5000.0).contains(&hybrid.x.unwrap()));
}

#[test]
fn reruns_of_a_shipped_scenario_are_byte_identical() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let path = repo_path("scenarios/fig_gap_rate.toml");
    let a = run_scenario(&path, dir_a.path()).unwrap();
    let b = run_scenario(&path, dir_b.path()).unwrap();
    let bytes_a = std::fs::read(&a.csv_path).unwrap();
    let bytes_b = std::fs::read(&b.csv_path).unwrap();
    assert_eq!(bytes_a, bytes_b);
}

#[test]
fn shipped_profiles_match_the_builtins() {
    let dir = repo_path("profiles");
    let from_file = load_profile("paper_defaults.toml", &dir).unwrap();
    assert_eq!(from_file, CostProfile::paper_defaults());
    let mobile = load_profile("mobile.toml", &dir).unwrap();
    assert_eq!(mobile, CostProfile::mobile());
}

#[test]
fn missing_scenario_files_surface_a_read_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = run_scenario(&repo_path("scenarios/no_such.toml"), dir.path()).unwrap_err();
    assert!(matches!(
        err,
        sema_core::ScenarioError::Config(ConfigError::Read { .. })
    ));
}
