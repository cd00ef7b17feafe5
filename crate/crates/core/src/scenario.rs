//! Scenario files and the sweep runner.
//!
//! A scenario is a small TOML file naming a run kind, a cost profile, the
//! grids to sweep, and an output CSV. Runs are deterministic: the same
//! file and seed always produce byte-identical CSV output. Each run is
//! pure given its inputs, so independent scenarios can execute on
//! separate threads without coordination.
//!
//! Output rows use one long-format schema for every kind:
//! `scenario,series,x,x_unit,y,y_unit,source`. Computed rows carry
//! `source=computed`; values replayed from the published reference tables
//! carry `source=paper` and are never recomputed.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::corpus::{generate_corpus, load_corpus, CorpusError, CorpusSpec};
use crate::cost::{payload_size, CostProfile, StreamKind};
use crate::link::{mbps, JitterSpec, LinkSpec};
use crate::pipeline::{Medium, Method, PipelineEnv, PipelineError};
use crate::playout::{gap_free_threshold, simulate_playout, PlayoutConfig};
use crate::reference::{rows_for, Dataset};
use crate::screen::{assemble_hybrid, plan_tiling, OcrConfig, ScreenSnapshot};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}")]
    Read {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
}

impl ConfigError {
    fn invalid(field: &str, reason: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.to_string(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    BytesTable,
    LatencySweep,
    StageBreakdown,
    GapRateSweep,
    RateAccuracy,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::BytesTable => "bytes_table",
            ScenarioKind::LatencySweep => "latency_sweep",
            ScenarioKind::StageBreakdown => "stage_breakdown",
            ScenarioKind::GapRateSweep => "gap_rate_sweep",
            ScenarioKind::RateAccuracy => "rate_accuracy",
        }
    }
}

fn default_profile() -> String {
    "paper_defaults".to_string()
}

fn default_true() -> bool {
    true
}

/// Raw scenario file contents, exactly as written on disk.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    /// Schema version; currently always 1.
    pub schema: u32,
    pub name: String,
    pub kind: ScenarioKind,
    /// Builtin profile name (`paper_defaults`, `mobile`) or a path to a
    /// profile TOML, relative to the scenario file.
    #[serde(default = "default_profile")]
    pub profile: String,
    /// Master seed; corpus generation and jitter streams derive from it.
    pub seed: u64,
    /// CSV file name, joined onto the runner's output directory.
    pub output: String,
    /// Append matching published reference rows tagged `source=paper`.
    #[serde(default = "default_true")]
    pub include_reference: bool,
    #[serde(default)]
    pub grid: Grid,
    #[serde(default)]
    pub snapshot: SnapshotSpec,
    #[serde(default)]
    pub corpus: CorpusSource,
    #[serde(default)]
    pub playout: PlayoutGrid,
}

/// Method by medium by bandwidth grid for latency kinds.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Grid {
    pub methods: Vec<Method>,
    pub media: Vec<Medium>,
    pub bandwidths_mbps: Vec<f64>,
    pub rtt_ms: f64,
    pub include_propagation: bool,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            methods: Vec::new(),
            media: Vec::new(),
            bandwidths_mbps: Vec::new(),
            rtt_ms: 50.0,
            include_propagation: false,
        }
    }
}

/// Which screen snapshot vision turns encode.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnapshotSpec {
    /// `reference` for the built-in fixture, `corpus` to index into a
    /// corpus file.
    pub source: String,
    pub path: Option<String>,
    pub index: usize,
}

impl Default for SnapshotSpec {
    fn default() -> Self {
        SnapshotSpec {
            source: "reference".to_string(),
            path: None,
            index: 0,
        }
    }
}

/// Where hybrid byte statistics come from: a corpus file, or a corpus
/// generated on the fly from the scenario seed.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSource {
    pub path: Option<String>,
    pub count: usize,
}

impl Default for CorpusSource {
    fn default() -> Self {
        CorpusSource {
            path: None,
            count: 60,
        }
    }
}

/// Playout sweep grid for `gap_rate_sweep`.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlayoutGrid {
    /// TTS batch durations to sweep, in milliseconds.
    pub batch_ms: Vec<f64>,
    /// Also sweep the 20 ms streaming baseline.
    pub include_streaming: bool,
    /// Uniform jitter bounds to sweep, in milliseconds.
    pub jitter_ms: Vec<f64>,
    pub trials: usize,
    pub bandwidth_mbps: f64,
    pub rtt_ms: f64,
}

impl Default for PlayoutGrid {
    fn default() -> Self {
        PlayoutGrid {
            batch_ms: vec![3000.0, 5000.0],
            include_streaming: true,
            jitter_ms: (0..=15).map(|i| i as f64 * 100.0).collect(),
            trials: 200,
            bandwidth_mbps: 10.0,
            rtt_ms: 50.0,
        }
    }
}

/// A validated scenario with its profile resolved, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    file: ScenarioFile,
    profile: CostProfile,
    base_dir: PathBuf,
}

/// Provenance of one output row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source {
    Computed,
    Paper,
}

impl Source {
    pub fn name(self) -> &'static str {
        match self {
            Source::Computed => "computed",
            Source::Paper => "paper",
        }
    }
}

/// One long-format output row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub series: String,
    pub x: Option<f64>,
    pub x_unit: &'static str,
    pub y: f64,
    pub y_unit: &'static str,
    pub source: Source,
}

impl CsvRow {
    fn computed(series: impl Into<String>, x: Option<f64>, x_unit: &'static str, y: f64, y_unit: &'static str) -> Self {
        CsvRow {
            series: series.into(),
            x,
            x_unit,
            y,
            y_unit,
            source: Source::Computed,
        }
    }
}

/// Result of one scenario run.
#[derive(Debug)]
pub struct ScenarioOutput {
    pub name: String,
    pub csv_path: PathBuf,
    pub rows: Vec<CsvRow>,
}

impl Scenario {
    pub fn from_path(path: &Path) -> Result<Scenario, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let value: toml::Value = toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Scenario::from_toml_value(value, &base_dir).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse {
                path: path.to_path_buf(),
                message,
            },
            other => other,
        })
    }

    /// Build from an already parsed TOML document, after overrides.
    pub fn from_toml_value(value: toml::Value, base_dir: &Path) -> Result<Scenario, ConfigError> {
        let file: ScenarioFile = value.try_into().map_err(|e: toml::de::Error| ConfigError::Parse {
            path: PathBuf::new(),
            message: e.to_string(),
        })?;
        Scenario::from_file(file, base_dir)
    }

    pub fn from_file(file: ScenarioFile, base_dir: &Path) -> Result<Scenario, ConfigError> {
        validate(&file)?;
        let profile = load_profile(&file.profile, base_dir)?;
        Ok(Scenario {
            file,
            profile,
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn name(&self) -> &str {
        &self.file.name
    }

    pub fn kind(&self) -> ScenarioKind {
        self.file.kind
    }

    pub fn output_name(&self) -> &str {
        &self.file.output
    }

    /// Compute the output rows without writing anything.
    pub fn rows(&self) -> Result<Vec<CsvRow>, ScenarioError> {
        let mut rows = match self.file.kind {
            ScenarioKind::BytesTable => self.run_bytes_table()?,
            ScenarioKind::LatencySweep => self.run_latency_sweep(false)?,
            ScenarioKind::StageBreakdown => self.run_latency_sweep(true)?,
            ScenarioKind::GapRateSweep => self.run_gap_rate_sweep(),
            ScenarioKind::RateAccuracy => self.run_rate_accuracy()?,
        };
        if self.file.include_reference {
            if let Some(dataset) = self.overlay_dataset() {
                rows.extend(rows_for(dataset).map(|r| CsvRow {
                    series: r.series.to_string(),
                    x: r.x,
                    x_unit: r.x_unit.unwrap_or(""),
                    y: r.y,
                    y_unit: r.y_unit,
                    source: Source::Paper,
                }));
            }
        }
        Ok(rows)
    }

    /// Run and write the CSV under `out_dir`, returning the rows as well.
    pub fn run(&self, out_dir: &Path) -> Result<ScenarioOutput, ScenarioError> {
        let rows = self.rows()?;
        let csv_path = out_dir.join(&self.file.output);
        if let Some(parent) = csv_path.parent() {
            fs::create_dir_all(parent).map_err(|source| ScenarioError::Write {
                path: csv_path.clone(),
                source,
            })?;
        }
        fs::write(&csv_path, render_csv(&self.file.name, &rows)).map_err(|source| {
            ScenarioError::Write {
                path: csv_path.clone(),
                source,
            }
        })?;
        Ok(ScenarioOutput {
            name: self.file.name.clone(),
            csv_path,
            rows,
        })
    }

    fn overlay_dataset(&self) -> Option<Dataset> {
        match self.file.kind {
            ScenarioKind::BytesTable => Some(Dataset::Table1),
            ScenarioKind::LatencySweep => Some(Dataset::Fig3),
            ScenarioKind::GapRateSweep => Some(Dataset::Fig8),
            // Breakdown rows have no published counterpart; the
            // rate-accuracy kind already replays its reference values.
            ScenarioKind::StageBreakdown | ScenarioKind::RateAccuracy => None,
        }
    }

    fn env(&self) -> PipelineEnv {
        let mut env = PipelineEnv::new(self.profile.clone());
        env.include_propagation = self.file.grid.include_propagation;
        env.seed = self.file.seed;
        env
    }

    fn resolve_snapshot(&self) -> Result<ScreenSnapshot, ScenarioError> {
        if self.file.snapshot.source == "reference" {
            return Ok(crate::corpus::reference_snapshot());
        }
        let rel = self.file.snapshot.path.as_deref().expect("validated");
        let corpus = load_corpus(&self.base_dir.join(rel))?;
        corpus
            .into_iter()
            .nth(self.file.snapshot.index)
            .ok_or_else(|| {
                ConfigError::invalid(
                    "snapshot.index",
                    format!("corpus has no snapshot {}", self.file.snapshot.index),
                )
                .into()
            })
    }

    fn corpus_snapshots(&self) -> Result<Vec<ScreenSnapshot>, ScenarioError> {
        match &self.file.corpus.path {
            Some(rel) => Ok(load_corpus(&self.base_dir.join(rel))?),
            None => {
                let spec = CorpusSpec {
                    count: self.file.corpus.count,
                    seed: self.file.seed,
                    ..CorpusSpec::default()
                };
                Ok(generate_corpus(&spec))
            }
        }
    }

    /// Median hybrid payload bytes over the corpus, headers excluded so
    /// the figure matches the published application-layer convention.
    fn hybrid_corpus_median(&self) -> Result<f64, ScenarioError> {
        let registry = crate::frame::CodebookRegistry::simulation_defaults();
        let ocr = OcrConfig::default();
        let mut sizes = Vec::new();
        for snap in self.corpus_snapshots()? {
            let plan = plan_tiling(snap.width, snap.height, &self.profile.tiling);
            let hybrid = assemble_hybrid(&snap, &plan, &registry, &ocr).map_err(PipelineError::Screen)?;
            sizes.push(hybrid.payload_bytes() as f64);
        }
        sizes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = sizes.len();
        Ok(if n % 2 == 1 {
            sizes[n / 2]
        } else {
            (sizes[n / 2 - 1] + sizes[n / 2]) / 2.0
        })
    }

    fn run_bytes_table(&self) -> Result<Vec<CsvRow>, ScenarioError> {
        let p = &self.profile;
        let hybrid_median = self.hybrid_corpus_median()?;
        let audio_tokens = payload_size(p, StreamKind::AudioTokens3s) as f64;
        let rows = vec![
            ("raw/voice", payload_size(p, StreamKind::RawPcm3s) as f64),
            ("raw/vision", payload_size(p, StreamKind::RawPng) as f64),
            ("raw_compress/voice", payload_size(p, StreamKind::Opus3s) as f64),
            ("raw_compress/vision", payload_size(p, StreamKind::Webp1080p) as f64),
            ("sema_static/voice", audio_tokens),
            ("sema_static/vision", payload_size(p, StreamKind::VisualTokens1080p) as f64),
            ("sema_hybrid/voice", audio_tokens),
            ("sema_hybrid/vision", hybrid_median),
        ];
        Ok(rows
            .into_iter()
            .map(|(series, y)| CsvRow::computed(series, None, "", y, "bytes"))
            .collect())
    }

    fn run_latency_sweep(&self, per_stage: bool) -> Result<Vec<CsvRow>, ScenarioError> {
        let env = self.env();
        let needs_snapshot = self
            .file
            .grid
            .media
            .contains(&Medium::Vision)
            && self.file.grid.methods.iter().any(|m| m.is_sema());
        let snapshot = if needs_snapshot {
            Some(self.resolve_snapshot()?)
        } else {
            None
        };
        let mut rows = Vec::new();
        for &bw in &self.file.grid.bandwidths_mbps {
            let link = LinkSpec::symmetric(mbps(bw), self.file.grid.rtt_ms);
            for &medium in &self.file.grid.media {
                for &method in &self.file.grid.methods {
                    let turn = env.run_uplink_turn(method, medium, &link, snapshot.as_ref())?;
                    let base = format!("{}/{}", method.name(), medium.name());
                    if per_stage {
                        for (stage, ms) in turn.stages() {
                            rows.push(CsvRow::computed(
                                format!("{base}/{stage}"),
                                Some(bw),
                                "mbps",
                                ms,
                                "ms",
                            ));
                        }
                    } else {
                        rows.push(CsvRow::computed(base, Some(bw), "mbps", turn.total_ms, "ms"));
                    }
                }
            }
        }
        Ok(rows)
    }

    fn run_gap_rate_sweep(&self) -> Vec<CsvRow> {
        let grid = &self.file.playout;
        let link = LinkSpec {
            jitter: JitterSpec::none(),
            ..LinkSpec::symmetric(mbps(grid.bandwidth_mbps), grid.rtt_ms)
        };
        let mut sweep = grid.jitter_ms.clone();
        sweep.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sweep.dedup();

        let mut configs: Vec<(String, PlayoutConfig)> = grid
            .batch_ms
            .iter()
            .map(|&ms| (format!("batch_tts_{}s", ms / 1000.0), PlayoutConfig::batch_tts(ms)))
            .collect();
        if grid.include_streaming {
            configs.push(("streaming_rtc".to_string(), PlayoutConfig::streaming_rtc()));
        }

        let mut rows = Vec::new();
        for (series, config) in &configs {
            for &j in &sweep {
                let jittered = LinkSpec {
                    jitter: JitterSpec::uniform(j, self.file.seed),
                    ..link
                };
                let summary = simulate_playout(config, &jittered, grid.trials);
                rows.push(CsvRow::computed(
                    series.clone(),
                    Some(j),
                    "ms",
                    summary.gap_rate,
                    "fraction",
                ));
            }
            let template = LinkSpec {
                jitter: JitterSpec::uniform(0.0, self.file.seed),
                ..link
            };
            let positive: Vec<f64> = sweep.iter().copied().filter(|&j| j > 0.0).collect();
            let threshold = gap_free_threshold(config, &template, &positive, grid.trials);
            rows.push(CsvRow::computed(
                format!("{series}/gap_free_up_to"),
                None,
                "",
                threshold,
                "ms",
            ));
        }
        rows
    }

    /// Byte coordinates are computed; every accuracy value is replayed
    /// from the reference table and tagged accordingly.
    fn run_rate_accuracy(&self) -> Result<Vec<CsvRow>, ScenarioError> {
        let p = &self.profile;
        let hybrid_median = self.hybrid_corpus_median()?;
        let acc = |series: &str| {
            crate::reference::scalar(Dataset::Fig6, series).expect("manifest-checked series")
        };
        let points = vec![
            ("voice_wer/raw_compress", payload_size(p, StreamKind::Opus3s) as f64, acc("voice_wer/raw")),
            ("voice_wer/sema", payload_size(p, StreamKind::AudioTokens3s) as f64, acc("voice_wer/sema")),
            ("vision_text/raw", payload_size(p, StreamKind::RawPng) as f64, acc("vision_text/raw")),
            ("vision_text/sema_static", payload_size(p, StreamKind::VisualTokens1080p) as f64, acc("vision_text/sema_static")),
            ("vision_text/sema_hybrid", hybrid_median, acc("vision_text/sema_hybrid")),
        ];
        Ok(points
            .into_iter()
            .map(|(series, bytes, accuracy)| CsvRow {
                series: series.to_string(),
                x: Some(bytes),
                x_unit: "bytes",
                y: accuracy,
                y_unit: "percent",
                source: Source::Paper,
            })
            .collect())
    }
}

/// Load and run one scenario file, writing its CSV under `out_dir`.
pub fn run_scenario(path: &Path, out_dir: &Path) -> Result<ScenarioOutput, ScenarioError> {
    Scenario::from_path(path)?.run(out_dir)
}

/// Load a scenario file, applying `field=value` overrides to the parsed
/// document before validation.
pub fn load_with_overrides(
    path: &Path,
    overrides: &[(String, String)],
) -> Result<Scenario, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut value: toml::Value = toml::from_str(&text).map_err(|e| ConfigError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    for (field, raw) in overrides {
        apply_override(&mut value, field, raw)?;
    }
    let base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    Scenario::from_toml_value(value, &base_dir).map_err(|e| match e {
        ConfigError::Parse { message, .. } => ConfigError::Parse {
            path: path.to_path_buf(),
            message,
        },
        other => other,
    })
}

fn validate(file: &ScenarioFile) -> Result<(), ConfigError> {
    if file.schema != 1 {
        return Err(ConfigError::invalid(
            "schema",
            format!("unsupported schema version {}", file.schema),
        ));
    }
    if file.name.is_empty() {
        return Err(ConfigError::invalid("name", "must not be empty"));
    }
    if file.output.is_empty() {
        return Err(ConfigError::invalid("output", "must not be empty"));
    }
    match file.snapshot.source.as_str() {
        "reference" => {}
        "corpus" => {
            if file.snapshot.path.is_none() {
                return Err(ConfigError::invalid(
                    "snapshot.path",
                    "required when snapshot.source is \"corpus\"",
                ));
            }
        }
        other => {
            return Err(ConfigError::invalid(
                "snapshot.source",
                format!("expected \"reference\" or \"corpus\", got \"{other}\""),
            ))
        }
    }
    match file.kind {
        ScenarioKind::LatencySweep | ScenarioKind::StageBreakdown => {
            let grid = &file.grid;
            if grid.methods.is_empty() {
                return Err(ConfigError::invalid("grid.methods", "must not be empty"));
            }
            if grid.media.is_empty() {
                return Err(ConfigError::invalid("grid.media", "must not be empty"));
            }
            if grid.bandwidths_mbps.is_empty() {
                return Err(ConfigError::invalid("grid.bandwidths_mbps", "must not be empty"));
            }
            if grid.bandwidths_mbps.iter().any(|b| !b.is_finite() || *b <= 0.0) {
                return Err(ConfigError::invalid(
                    "grid.bandwidths_mbps",
                    "every bandwidth must be finite and positive",
                ));
            }
            if !grid.rtt_ms.is_finite() || grid.rtt_ms < 0.0 {
                return Err(ConfigError::invalid("grid.rtt_ms", "must be finite and non-negative"));
            }
        }
        ScenarioKind::BytesTable | ScenarioKind::RateAccuracy => {
            if file.corpus.path.is_none() && file.corpus.count == 0 {
                return Err(ConfigError::invalid("corpus.count", "must be at least 1"));
            }
        }
        ScenarioKind::GapRateSweep => {
            let grid = &file.playout;
            if grid.batch_ms.is_empty() && !grid.include_streaming {
                return Err(ConfigError::invalid("playout.batch_ms", "nothing to sweep"));
            }
            if grid.batch_ms.iter().any(|b| !b.is_finite() || *b <= 0.0) {
                return Err(ConfigError::invalid(
                    "playout.batch_ms",
                    "every batch duration must be finite and positive",
                ));
            }
            if grid.jitter_ms.is_empty() {
                return Err(ConfigError::invalid("playout.jitter_ms", "must not be empty"));
            }
            if grid.jitter_ms.iter().any(|j| !j.is_finite() || *j < 0.0) {
                return Err(ConfigError::invalid(
                    "playout.jitter_ms",
                    "every jitter bound must be finite and non-negative",
                ));
            }
            if grid.trials == 0 {
                return Err(ConfigError::invalid("playout.trials", "must be at least 1"));
            }
            if !grid.bandwidth_mbps.is_finite() || grid.bandwidth_mbps <= 0.0 {
                return Err(ConfigError::invalid(
                    "playout.bandwidth_mbps",
                    "must be finite and positive",
                ));
            }
        }
    }
    Ok(())
}

/// Resolve a profile reference: a builtin name or a TOML file path
/// relative to `base_dir`.
pub fn load_profile(reference: &str, base_dir: &Path) -> Result<CostProfile, ConfigError> {
    let profile = match reference {
        "paper_defaults" => CostProfile::paper_defaults(),
        "mobile" => CostProfile::mobile(),
        path => {
            let full = base_dir.join(path);
            let text = fs::read_to_string(&full).map_err(|source| ConfigError::Read {
                path: full.clone(),
                source,
            })?;
            toml::from_str(&text).map_err(|e| ConfigError::Parse {
                path: full,
                message: e.to_string(),
            })?
        }
    };
    profile
        .validate()
        .map_err(|e| ConfigError::invalid("profile", e.to_string()))?;
    Ok(profile)
}

/// Apply one `path=value` override to a parsed TOML document. The value
/// is parsed as a TOML literal where possible and kept as a string
/// otherwise, so `seed=9`, `grid.methods=["raw"]`, and `profile=mobile`
/// all work.
pub fn apply_override(doc: &mut toml::Value, path: &str, raw_value: &str) -> Result<(), ConfigError> {
    let parsed: toml::Value = match toml::from_str::<toml::Value>(&format!("v = {raw_value}")) {
        Ok(toml::Value::Table(mut t)) => t.remove("v").unwrap(),
        _ => toml::Value::String(raw_value.to_string()),
    };
    let mut cursor = doc;
    let segments: Vec<&str> = path.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(ConfigError::invalid(path, "empty segment in override path"));
    }
    for segment in &segments[..segments.len() - 1] {
        let table = cursor
            .as_table_mut()
            .ok_or_else(|| ConfigError::invalid(path, "path crosses a non-table value"))?;
        cursor = table
            .entry(segment.to_string())
            .or_insert_with(|| toml::Value::Table(toml::map::Map::new()));
    }
    let table = cursor
        .as_table_mut()
        .ok_or_else(|| ConfigError::invalid(path, "path crosses a non-table value"))?;
    table.insert(segments[segments.len() - 1].to_string(), parsed);
    Ok(())
}

fn format_number(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Render rows into the long-format CSV. Formatting is fixed so equal
/// rows always produce identical bytes.
pub fn render_csv(scenario: &str, rows: &[CsvRow]) -> String {
    let mut out = String::from("scenario,series,x,x_unit,y,y_unit,source\n");
    for row in rows {
        let x = row.x.map(format_number).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            csv_field(scenario),
            csv_field(&row.series),
            x,
            row.x_unit,
            format_number(row.y),
            row.y_unit,
            row.source.name()
        );
    }
    out
}
