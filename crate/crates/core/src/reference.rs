//! Published reference measurements for overlay plots.
//!
//! Accuracy, word-error, and opinion-score numbers come from live model
//! and listener studies that a desk-scale simulation cannot rerun. They
//! are carried here verbatim and replayed into outputs tagged
//! `source=paper`, never recomputed. Byte and latency anchors sit next to
//! them so sweeps can draw the published points on top of computed
//! curves.

/// Which published table or figure a row belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Dataset {
    Table1,
    Fig3,
    Fig5,
    Fig6,
    Fig7,
    Fig8,
}

impl Dataset {
    pub const ALL: [Dataset; 6] = [
        Dataset::Table1,
        Dataset::Fig3,
        Dataset::Fig5,
        Dataset::Fig6,
        Dataset::Fig7,
        Dataset::Fig8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Dataset::Table1 => "table1",
            Dataset::Fig3 => "fig3",
            Dataset::Fig5 => "fig5",
            Dataset::Fig6 => "fig6",
            Dataset::Fig7 => "fig7",
            Dataset::Fig8 => "fig8",
        }
    }

    pub fn from_name(name: &str) -> Option<Dataset> {
        Dataset::ALL.into_iter().find(|d| d.name() == name)
    }
}

/// One published value. Curve and scatter points carry an x coordinate;
/// table cells and scalar thresholds do not.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub dataset: Dataset,
    pub series: &'static str,
    pub x: Option<f64>,
    pub x_unit: Option<&'static str>,
    pub y: f64,
    pub y_unit: &'static str,
}

const fn cell(dataset: Dataset, series: &'static str, y: f64, y_unit: &'static str) -> ReferenceRow {
    ReferenceRow {
        dataset,
        series,
        x: None,
        x_unit: None,
        y,
        y_unit,
    }
}

const fn point(
    dataset: Dataset,
    series: &'static str,
    x: f64,
    x_unit: &'static str,
    y: f64,
    y_unit: &'static str,
) -> ReferenceRow {
    ReferenceRow {
        dataset,
        series,
        x: Some(x),
        x_unit: Some(x_unit),
        y,
        y_unit,
    }
}

/// Every reference value the suite replays, in dataset order.
pub const REFERENCE_ROWS: &[ReferenceRow] = &[
    // Median uplink bytes per turn. The hybrid screenshot cell is a band,
    // split into explicit min and max rows.
    cell(Dataset::Table1, "raw/voice", 96_000.0, "bytes"),
    cell(Dataset::Table1, "raw/vision", 950_000.0, "bytes"),
    cell(Dataset::Table1, "raw_compress/voice", 12_000.0, "bytes"),
    cell(Dataset::Table1, "raw_compress/vision", 700_000.0, "bytes"),
    cell(Dataset::Table1, "sema_static/voice", 188.0, "bytes"),
    cell(Dataset::Table1, "sema_static/vision", 832.0, "bytes"),
    cell(Dataset::Table1, "sema_hybrid/voice", 188.0, "bytes"),
    cell(Dataset::Table1, "sema_hybrid/vision_min", 3_000.0, "bytes"),
    cell(Dataset::Table1, "sema_hybrid/vision_max", 5_000.0, "bytes"),
    // Screen-turn latency anchors over the bandwidth sweep.
    point(Dataset::Fig3, "raw_compress/vision", 1.0, "mbps", 5_600.0, "ms"),
    point(Dataset::Fig3, "raw_compress/vision", 5.0, "mbps", 1_100.0, "ms"),
    point(Dataset::Fig3, "sema_hybrid/vision", 5.0, "mbps", 75.0, "ms"),
    point(Dataset::Fig3, "sema_hybrid_ocr/vision", 5.0, "mbps", 105.0, "ms"),
    point(Dataset::Fig3, "sema_upper_bound/vision", 1.0, "mbps", 100.0, "ms"),
    point(Dataset::Fig3, "raw_compress/voice", 1.0, "mbps", 96.0, "ms"),
    // Rate-accuracy scatter: bytes per turn against downstream scores.
    point(Dataset::Fig5, "vision_text/raw", 950_000.0, "bytes", 94.0, "percent"),
    point(Dataset::Fig5, "vision_text/sema_static", 832.0, "bytes", 75.5, "percent"),
    point(Dataset::Fig5, "vision_text/sema_hybrid", 5_000.0, "bytes", 93.3, "percent"),
    point(Dataset::Fig5, "voice_wer/raw_compress", 12_000.0, "bytes", 2.7, "percent"),
    point(Dataset::Fig5, "voice_wer/sema", 188.0, "bytes", 4.1, "percent"),
    // Task accuracy by workload category.
    cell(Dataset::Fig6, "voice_wer/raw", 2.7, "percent"),
    cell(Dataset::Fig6, "voice_wer/sema", 4.1, "percent"),
    cell(Dataset::Fig6, "vision_text/raw", 94.0, "percent"),
    cell(Dataset::Fig6, "vision_text/sema_static", 75.5, "percent"),
    cell(Dataset::Fig6, "vision_text/sema_hybrid", 93.3, "percent"),
    cell(Dataset::Fig6, "navigation/max_drop_vs_raw", 2.0, "pp"),
    // Uplink jitter tolerance, two receivers on the same sweep.
    point(Dataset::Fig7, "wer", 0.0, "ms", 2.7, "percent"),
    point(Dataset::Fig7, "wer", 200.0, "ms", 3.2, "percent"),
    point(Dataset::Fig7, "wer", 500.0, "ms", 3.8, "percent"),
    point(Dataset::Fig7, "mos", 0.0, "ms", 4.3, "mos"),
    point(Dataset::Fig7, "mos", 200.0, "ms", 2.6, "mos"),
    point(Dataset::Fig7, "mos", 500.0, "ms", 1.8, "mos"),
    // Downlink playout tolerance thresholds.
    cell(Dataset::Fig8, "batch_tts_3s/gap_free_up_to", 500.0, "ms"),
    cell(Dataset::Fig8, "batch_tts_5s/gap_free_up_to", 1_000.0, "ms"),
    cell(Dataset::Fig8, "streaming_rtc/gaps_from", 50.0, "ms"),
];

/// Expected shape of each dataset: row count and the series it must
/// contain. Any edit to the table has to land here too, which keeps
/// accidental drift out of the replayed values.
pub const MANIFEST: &[(Dataset, usize, &[&str])] = &[
    (
        Dataset::Table1,
        9,
        &[
            "raw/voice",
            "raw/vision",
            "raw_compress/voice",
            "raw_compress/vision",
            "sema_static/voice",
            "sema_static/vision",
            "sema_hybrid/voice",
            "sema_hybrid/vision_min",
            "sema_hybrid/vision_max",
        ],
    ),
    (
        Dataset::Fig3,
        6,
        &[
            "raw_compress/vision",
            "sema_hybrid/vision",
            "sema_hybrid_ocr/vision",
            "sema_upper_bound/vision",
            "raw_compress/voice",
        ],
    ),
    (
        Dataset::Fig5,
        5,
        &[
            "vision_text/raw",
            "vision_text/sema_static",
            "vision_text/sema_hybrid",
            "voice_wer/raw_compress",
            "voice_wer/sema",
        ],
    ),
    (
        Dataset::Fig6,
        6,
        &[
            "voice_wer/raw",
            "voice_wer/sema",
            "vision_text/raw",
            "vision_text/sema_static",
            "vision_text/sema_hybrid",
            "navigation/max_drop_vs_raw",
        ],
    ),
    (Dataset::Fig7, 6, &["wer", "mos"]),
    (
        Dataset::Fig8,
        3,
        &[
            "batch_tts_3s/gap_free_up_to",
            "batch_tts_5s/gap_free_up_to",
            "streaming_rtc/gaps_from",
        ],
    ),
];

/// Check every row against the manifest: counts per dataset, no stray or
/// missing series, finite values, x and its unit present together.
pub fn verify_manifest() -> Result<(), String> {
    if MANIFEST.len() != Dataset::ALL.len() {
        return Err("manifest does not cover every dataset".to_string());
    }
    for &(dataset, count, series) in MANIFEST {
        let rows: Vec<_> = rows_for(dataset).collect();
        if rows.len() != count {
            return Err(format!(
                "{}: expected {count} rows, found {}",
                dataset.name(),
                rows.len()
            ));
        }
        for s in series {
            if !rows.iter().any(|r| r.series == *s) {
                return Err(format!("{} is missing series {s}", dataset.name()));
            }
        }
        for row in rows {
            if !series.contains(&row.series) {
                return Err(format!("{}: unexpected series {}", dataset.name(), row.series));
            }
            if !row.y.is_finite() {
                return Err(format!("{}: non-finite value", row.series));
            }
            if row.x.is_some() != row.x_unit.is_some() {
                return Err(format!("{}: x and x_unit must appear together", row.series));
            }
        }
    }
    let total: usize = MANIFEST.iter().map(|(_, n, _)| n).sum();
    if REFERENCE_ROWS.len() != total {
        return Err("row total does not match manifest".to_string());
    }
    Ok(())
}

/// Rows belonging to one dataset, in declaration order.
pub fn rows_for(dataset: Dataset) -> impl Iterator<Item = &'static ReferenceRow> {
    REFERENCE_ROWS.iter().filter(move |r| r.dataset == dataset)
}

/// A scalar cell by series name, for datasets that hold one value per
/// series.
pub fn scalar(dataset: Dataset, series: &str) -> Option<f64> {
    rows_for(dataset)
        .find(|r| r.series == series && r.x.is_none())
        .map(|r| r.y)
}

/// A curve or scatter point by series name and x coordinate.
pub fn point_at(dataset: Dataset, series: &str, x: f64) -> Option<f64> {
    rows_for(dataset)
        .find(|r| r.series == series && r.x == Some(x))
        .map(|r| r.y)
}
