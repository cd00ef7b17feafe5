//! Self-checks covering every headline result the suite reproduces.
//!
//! Each check compares a freshly computed value against its published
//! anchor at a stated tolerance and lands in the report as one line;
//! nothing here short-circuits, so a red line never hides later ones.
//! The checks group into six criteria: byte table, screen latency, voice
//! latency, playout thresholds, simulation properties, and replayed
//! accuracy data.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{generate_corpus, generate_snapshot, reference_snapshot, CorpusSpec};
use crate::cost::{payload_size, CostProfile, ResolveMode, StreamKind};
use crate::frame::{
    decode_frame, encode_frame, CodebookRegistry, Modality, TokenFrame, AUDIO_CODEBOOK,
    TTS_CODEBOOK, VISUAL_CODEBOOK,
};
use crate::link::{mbps, JitterSpec, LinkSpec};
use crate::pipeline::{Medium, Method, PipelineEnv};
use crate::playout::{gap_free_threshold, simulate_playout, PlayoutConfig};
use crate::reference::{point_at, scalar, verify_manifest, Dataset};
use crate::scenario::{Scenario, ScenarioFile, ScenarioKind, Source};
use crate::screen::{
    assemble_hybrid, encode_compact_text, flatten, parse_compact_text, plan_tiling, OcrConfig,
    UiNode,
};

/// Knobs the checks run under. The defaults reproduce the published
/// setup; unit tests perturb them to prove the checks can fail.
#[derive(Debug, Clone)]
pub struct AcceptanceConfig {
    pub profile: CostProfile,
    /// Trials per playout sweep point; at least 100.
    pub playout_trials: usize,
    /// Playout cushion as a fraction of the batch duration.
    pub beta: f64,
    /// Synthetic screen corpus backing the hybrid byte statistics.
    pub corpus: CorpusSpec,
    pub seed: u64,
}

impl Default for AcceptanceConfig {
    fn default() -> Self {
        AcceptanceConfig {
            profile: CostProfile::paper_defaults(),
            playout_trials: 200,
            beta: 0.2,
            corpus: CorpusSpec::default(),
            seed: 42,
        }
    }
}

/// One expected-versus-actual comparison.
#[derive(Debug, Clone)]
pub struct CheckLine {
    pub criterion: u8,
    pub name: &'static str,
    pub expected: String,
    pub actual: String,
    pub tolerance: &'static str,
    pub pass: bool,
}

#[derive(Debug)]
pub struct AcceptanceReport {
    pub checks: Vec<CheckLine>,
}

const CRITERION_TITLES: [(u8, &str); 6] = [
    (1, "byte table"),
    (2, "screen latency anchors"),
    (3, "voice latency anchors"),
    (4, "playout thresholds"),
    (5, "simulation properties"),
    (6, "replayed accuracy data"),
];

impl AcceptanceReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn criterion_passed(&self, criterion: u8) -> bool {
        self.checks
            .iter()
            .filter(|c| c.criterion == criterion)
            .all(|c| c.pass)
    }

    /// One line per criterion, for terse output.
    pub fn summary_lines(&self) -> Vec<String> {
        CRITERION_TITLES
            .iter()
            .map(|&(n, title)| {
                let total = self.checks.iter().filter(|c| c.criterion == n).count();
                let passed = self
                    .checks
                    .iter()
                    .filter(|c| c.criterion == n && c.pass)
                    .count();
                let verdict = if passed == total { "PASS" } else { "FAIL" };
                format!("criterion {n} ({title}): {verdict} [{passed}/{total}]")
            })
            .collect()
    }

    /// Full report: every check line, grouped by criterion.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for &(n, title) in &CRITERION_TITLES {
            let verdict = if self.criterion_passed(n) { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "criterion {n} ({title}): {verdict}");
            for check in self.checks.iter().filter(|c| c.criterion == n) {
                let mark = if check.pass { "pass" } else { "FAIL" };
                let _ = writeln!(
                    out,
                    "  [{mark}] {}: expected {} | actual {} | tolerance {}",
                    check.name, check.expected, check.actual, check.tolerance
                );
            }
        }
        let overall = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "overall: {overall}");
        out
    }
}

struct Checker {
    checks: Vec<CheckLine>,
}

impl Checker {
    fn push(
        &mut self,
        criterion: u8,
        name: &'static str,
        expected: impl Into<String>,
        actual: impl Into<String>,
        tolerance: &'static str,
        pass: bool,
    ) {
        self.checks.push(CheckLine {
            criterion,
            name,
            expected: expected.into(),
            actual: actual.into(),
            tolerance,
            pass,
        });
    }

    fn exact(&mut self, criterion: u8, name: &'static str, expected: f64, actual: f64) {
        self.push(
            criterion,
            name,
            format_value(expected),
            format_value(actual),
            "exact",
            actual == expected,
        );
    }

    fn within_rel(
        &mut self,
        criterion: u8,
        name: &'static str,
        expected: f64,
        actual: f64,
        rel: f64,
        tolerance: &'static str,
    ) {
        let pass = (actual - expected).abs() <= rel * expected.abs();
        self.push(
            criterion,
            name,
            format_value(expected),
            format_value(actual),
            tolerance,
            pass,
        );
    }

    fn within_band(
        &mut self,
        criterion: u8,
        name: &'static str,
        lo: f64,
        hi: f64,
        actual: f64,
        tolerance: &'static str,
    ) {
        self.push(
            criterion,
            name,
            format!("[{}, {}]", format_value(lo), format_value(hi)),
            format_value(actual),
            tolerance,
            (lo..=hi).contains(&actual),
        );
    }

    fn runtime(&mut self, criterion: u8, name: &'static str, started: Instant, limit_s: f64) {
        let elapsed = started.elapsed().as_secs_f64();
        self.push(
            criterion,
            name,
            format!("< {limit_s} s"),
            format!("{elapsed:.3} s"),
            "hard limit",
            elapsed < limit_s,
        );
    }
}

fn format_value(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e12 {
        format!("{}", v as i64)
    } else {
        format!("{v:.3}")
    }
}

/// Runs every criterion and returns the full report. Failures are report
/// entries, never errors.
pub fn run_acceptance(config: &AcceptanceConfig) -> AcceptanceReport {
    let mut c = Checker { checks: Vec::new() };
    check_byte_table(config, &mut c);
    check_screen_latency(config, &mut c);
    check_voice_latency(config, &mut c);
    let thresholds = check_playout(config, &mut c);
    check_properties(config, thresholds, &mut c);
    check_replayed_data(config, &mut c);
    AcceptanceReport { checks: c.checks }
}

fn check_byte_table(config: &AcceptanceConfig, c: &mut Checker) {
    let started = Instant::now();
    let p = &config.profile;
    let audio = payload_size(p, StreamKind::AudioTokens3s) as f64;
    let visual = payload_size(p, StreamKind::VisualTokens1080p) as f64;
    let opus = payload_size(p, StreamKind::Opus3s) as f64;
    let webp = payload_size(p, StreamKind::Webp1080p) as f64;

    c.exact(1, "audio tokens, 3 s turn", scalar(Dataset::Table1, "sema_static/voice").unwrap(), audio);
    c.exact(1, "visual tokens, 1080p", scalar(Dataset::Table1, "sema_static/vision").unwrap(), visual);
    c.exact(1, "opus, 3 s turn", scalar(Dataset::Table1, "raw_compress/voice").unwrap(), opus);
    c.exact(1, "webp, 1080p", scalar(Dataset::Table1, "raw_compress/vision").unwrap(), webp);
    c.within_rel(1, "audio compression ratio", 64.0, opus / audio, 0.01, "±1%");
    c.within_rel(1, "visual compression ratio", 841.0, webp / visual, 0.01, "±1%");

    let registry = CodebookRegistry::simulation_defaults();
    let ocr = OcrConfig::default();
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio: f64 = 0.0;
    let snapshots = generate_corpus(&config.corpus);
    for snap in &snapshots {
        let plan = plan_tiling(snap.width, snap.height, &p.tiling);
        let hybrid = assemble_hybrid(snap, &plan, &registry, &ocr).expect("generated snapshot");
        let ratio = webp / hybrid.payload_bytes() as f64;
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
    }
    c.push(
        1,
        "hybrid compression ratio over corpus",
        "[130, 210]",
        format!(
            "[{min_ratio:.1}, {max_ratio:.1}] over {} snapshots",
            snapshots.len()
        ),
        "band",
        min_ratio >= 130.0 && max_ratio <= 210.0,
    );
    c.runtime(1, "byte table runtime", started, 1.0);
}

fn check_screen_latency(config: &AcceptanceConfig, c: &mut Checker) {
    let started = Instant::now();
    let mut env = PipelineEnv::new(config.profile.clone());
    env.seed = config.seed;
    let snap = reference_snapshot();
    let turn = |method: Method, bw: f64| {
        env.run_uplink_turn(method, Medium::Vision, &LinkSpec::symmetric(mbps(bw), 50.0), Some(&snap))
            .expect("reference snapshot present")
            .total_ms
    };

    c.within_rel(
        2,
        "compressed screenshot at 5 Mbps",
        point_at(Dataset::Fig3, "raw_compress/vision", 5.0).unwrap(),
        turn(Method::RawCompress, 5.0),
        0.10,
        "±10%",
    );
    c.within_rel(
        2,
        "compressed screenshot at 1 Mbps",
        point_at(Dataset::Fig3, "raw_compress/vision", 1.0).unwrap(),
        turn(Method::RawCompress, 1.0),
        0.10,
        "±10%",
    );
    c.within_rel(
        2,
        "hybrid screen turn at 5 Mbps",
        point_at(Dataset::Fig3, "sema_hybrid/vision", 5.0).unwrap(),
        turn(Method::SemaHybrid, 5.0),
        0.10,
        "±10%",
    );
    let at_1 = turn(Method::SemaHybrid, 1.0);
    c.push(
        2,
        "hybrid screen turn at 1 Mbps",
        "< 100",
        format_value(at_1),
        "hard bound",
        at_1 < 100.0,
    );

    // The published curve is read as a band: totals near 94 ms at the
    // 1 Mbps end, near 70 ms at the 100 Mbps end, and inside the padded
    // envelope everywhere between.
    let sweep: Vec<f64> = [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0]
        .iter()
        .map(|&bw| turn(Method::SemaHybrid, bw))
        .collect();
    c.within_band(2, "hybrid total at 1 Mbps vs published 94", 84.0, 104.0, sweep[0], "±10 ms");
    c.within_band(
        2,
        "hybrid total at 100 Mbps vs published 70",
        60.0,
        80.0,
        sweep[sweep.len() - 1],
        "±10 ms",
    );
    let lo = sweep.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sweep.iter().copied().fold(0.0_f64, f64::max);
    c.push(
        2,
        "hybrid sweep inside published envelope",
        "[60, 104]",
        format!("[{lo:.1}, {hi:.1}]"),
        "band",
        lo >= 60.0 && hi <= 104.0,
    );
    c.runtime(2, "screen sweep runtime", started, 5.0);
}

fn check_voice_latency(config: &AcceptanceConfig, c: &mut Checker) {
    let mut env = PipelineEnv::new(config.profile.clone());
    env.seed = config.seed;
    let link = LinkSpec::symmetric(mbps(1.0), 50.0);

    let sema = env
        .run_uplink_turn(Method::SemaStatic, Medium::Voice, &link, None)
        .expect("voice needs no snapshot");
    c.push(
        3,
        "token frame transfer at 1 Mbps",
        "< 2 ms",
        format!("{:.3} ms", sema.serialization_ms),
        "hard bound",
        sema.serialization_ms < 2.0,
    );

    let opus = env
        .run_uplink_turn(Method::RawCompress, Medium::Voice, &link, None)
        .expect("voice needs no snapshot");
    c.within_rel(
        3,
        "opus transfer at 1 Mbps",
        point_at(Dataset::Fig3, "raw_compress/voice", 1.0).unwrap(),
        opus.total_ms,
        0.10,
        "±10%",
    );

    let mut fast_encode = config.profile.clone();
    fast_encode.audio_turn_encode = fast_encode.audio_turn_encode.with_mode(ResolveMode::Low);
    let crossover = PipelineEnv::new(fast_encode).audio_crossover_bps(&link);
    let (actual, pass) = match crossover {
        Ok(bps) => (format!("{:.2} Mbps", bps / 1e6), (1.0e6..=3.0e6).contains(&bps)),
        Err(_) => ("no crossing found".to_string(), false),
    };
    c.push(3, "voice crossover bandwidth, fast encode", "[1, 3] Mbps", actual, "band", pass);
}

/// Runs the playout criterion; returns the two batch thresholds for the
/// dominance property.
fn check_playout(config: &AcceptanceConfig, c: &mut Checker) -> (f64, f64) {
    let started = Instant::now();
    c.push(
        4,
        "trials per sweep point",
        ">= 100",
        format!("{}", config.playout_trials),
        "hard bound",
        config.playout_trials >= 100,
    );

    let template = LinkSpec {
        jitter: JitterSpec::uniform(0.0, config.seed),
        ..LinkSpec::symmetric(mbps(10.0), 50.0)
    };
    let sweep: Vec<f64> = (1..=15).map(|i| i as f64 * 100.0).collect();
    let threshold_for = |batch_ms: f64| {
        let mut playout = PlayoutConfig::batch_tts(batch_ms);
        playout.beta = config.beta;
        gap_free_threshold(&playout, &template, &sweep, config.playout_trials)
    };

    let t3 = threshold_for(3000.0);
    let t5 = threshold_for(5000.0);
    c.within_rel(
        4,
        "gap-free threshold, 3 s batches",
        scalar(Dataset::Fig8, "batch_tts_3s/gap_free_up_to").unwrap(),
        t3,
        0.30,
        "±30%",
    );
    c.within_rel(
        4,
        "gap-free threshold, 5 s batches",
        scalar(Dataset::Fig8, "batch_tts_5s/gap_free_up_to").unwrap(),
        t5,
        0.30,
        "±30%",
    );

    let streaming_jitter = scalar(Dataset::Fig8, "streaming_rtc/gaps_from").unwrap();
    let link = LinkSpec {
        jitter: JitterSpec::uniform(streaming_jitter, config.seed),
        ..template
    };
    let summary = simulate_playout(&PlayoutConfig::streaming_rtc(), &link, config.playout_trials);
    c.push(
        4,
        "streaming gaps at 50 ms jitter",
        "gap rate > 0",
        format!("{:.3}", summary.gap_rate),
        "hard bound",
        summary.gap_rate > 0.0,
    );
    c.runtime(4, "playout sweeps runtime", started, 30.0);
    (t3, t5)
}

fn check_properties(config: &AcceptanceConfig, thresholds: (f64, f64), c: &mut Checker) {
    let registry = CodebookRegistry::simulation_defaults();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));

    // Frame round trips at the stated scale.
    let frame_trials = 10_000;
    let mut frame_failures = 0;
    for i in 0..frame_trials {
        let frame = random_frame(&mut rng, &registry, i);
        let bytes = encode_frame(&frame, &registry).expect("valid random frame");
        if decode_frame(&bytes, &registry).ok() != Some(frame) {
            frame_failures += 1;
        }
    }
    c.push(
        5,
        "frame round-trip identity",
        format!("0 failures in {frame_trials}"),
        format!("{frame_failures} failures"),
        "exact",
        frame_failures == 0,
    );

    let tree_trials = 1_000;
    let mut tree_failures = 0;
    for _ in 0..tree_trials {
        let nodes = rng.random_range(8..=120);
        let mut snap = generate_snapshot(&mut rng, 1920, 1080, nodes);
        roughen_labels(&mut snap.root, &mut rng);
        let text = encode_compact_text(&snap.root);
        if parse_compact_text(&text).ok() != Some(flatten(&snap.root)) {
            tree_failures += 1;
        }
    }
    c.push(
        5,
        "compact-text round-trip identity",
        format!("0 failures in {tree_trials}"),
        format!("{tree_failures} failures"),
        "exact",
        tree_failures == 0,
    );

    // Gap rate must not drop as jitter grows.
    let base = LinkSpec::symmetric(mbps(10.0), 50.0);
    let mut monotone = true;
    for playout in [PlayoutConfig::streaming_rtc(), PlayoutConfig::batch_tts(3000.0)] {
        let mut last = -1.0;
        for j in [0.0, 100.0, 300.0, 600.0, 900.0, 1200.0] {
            let link = LinkSpec {
                jitter: JitterSpec::uniform(j, config.seed),
                ..base
            };
            let rate = simulate_playout(&playout, &link, 100).gap_rate;
            if rate + 1e-12 < last {
                monotone = false;
            }
            last = rate;
        }
    }
    c.push(
        5,
        "gap rate monotone in jitter",
        "non-decreasing",
        if monotone { "non-decreasing" } else { "decreased" }.to_string(),
        "exact",
        monotone,
    );

    let (t3, t5) = thresholds;
    c.push(
        5,
        "longer batches tolerate more jitter",
        "threshold(3 s) <= threshold(5 s)",
        format!("{} <= {}", format_value(t3), format_value(t5)),
        "ordering",
        t3 <= t5,
    );

    // Totals must not rise with bandwidth for any method.
    let mut env = PipelineEnv::new(config.profile.clone());
    env.seed = config.seed;
    let snap = reference_snapshot();
    let mut latency_monotone = true;
    for method in Method::ALL {
        for medium in [Medium::Voice, Medium::Vision] {
            let mut last = f64::INFINITY;
            for bw in [1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0] {
                let total = env
                    .run_uplink_turn(method, medium, &LinkSpec::symmetric(mbps(bw), 50.0), Some(&snap))
                    .expect("snapshot provided")
                    .total_ms;
                if total > last + 1e-9 {
                    latency_monotone = false;
                }
                last = total;
            }
        }
    }
    c.push(
        5,
        "latency monotone in bandwidth",
        "non-increasing",
        if latency_monotone { "non-increasing" } else { "increased" }.to_string(),
        "exact",
        latency_monotone,
    );

    // Identical seeds must reproduce a randomized run bit for bit.
    let scenario = Scenario::from_file(
        ScenarioFile {
            schema: 1,
            name: "repro-probe".to_string(),
            kind: ScenarioKind::GapRateSweep,
            profile: "paper_defaults".to_string(),
            seed: config.seed,
            output: "repro.csv".to_string(),
            include_reference: false,
            grid: Default::default(),
            snapshot: Default::default(),
            corpus: Default::default(),
            playout: crate::scenario::PlayoutGrid {
                batch_ms: vec![3000.0],
                include_streaming: true,
                jitter_ms: vec![0.0, 300.0, 700.0],
                trials: 50,
                bandwidth_mbps: 10.0,
                rtt_ms: 50.0,
            },
        },
        Path::new("."),
    )
    .expect("static scenario");
    let first = scenario.rows().expect("in-memory run");
    let second = scenario.rows().expect("in-memory run");
    let identical = first == second
        && crate::scenario::render_csv("repro-probe", &first)
            == crate::scenario::render_csv("repro-probe", &second);
    c.push(
        5,
        "bit-exact reproducibility under fixed seeds",
        "identical rows and CSV bytes",
        if identical { "identical" } else { "diverged" }.to_string(),
        "exact",
        identical,
    );
}

fn check_replayed_data(config: &AcceptanceConfig, c: &mut Checker) {
    let manifest = verify_manifest();
    c.push(
        6,
        "reference table matches its manifest",
        "all rows accounted for",
        match &manifest {
            Ok(()) => "all rows accounted for".to_string(),
            Err(e) => e.clone(),
        },
        "exact",
        manifest.is_ok(),
    );

    let scenario = Scenario::from_file(
        ScenarioFile {
            schema: 1,
            name: "rate-accuracy-probe".to_string(),
            kind: ScenarioKind::RateAccuracy,
            profile: "paper_defaults".to_string(),
            seed: config.seed,
            output: "probe.csv".to_string(),
            include_reference: true,
            grid: Default::default(),
            snapshot: Default::default(),
            corpus: Default::default(),
            playout: Default::default(),
        },
        Path::new("."),
    )
    .expect("static scenario");
    let rows = scenario.rows().expect("in-memory run");

    let expected_scores = [
        ("voice_wer/raw_compress", 2.7),
        ("voice_wer/sema", 4.1),
        ("vision_text/raw", 94.0),
        ("vision_text/sema_static", 75.5),
        ("vision_text/sema_hybrid", 93.3),
    ];
    let mut replay_ok = true;
    for (series, score) in expected_scores {
        let row = rows.iter().find(|r| r.series == series);
        match row {
            Some(r) if r.y == score && r.source == Source::Paper => {}
            _ => replay_ok = false,
        }
    }
    c.push(
        6,
        "accuracy values replayed verbatim",
        "published scores, tagged source=paper",
        if replay_ok { "matched" } else { "mismatch" }.to_string(),
        "exact",
        replay_ok,
    );

    let byte_of = |series: &str| rows.iter().find(|r| r.series == series).and_then(|r| r.x);
    let fixed_ok = byte_of("voice_wer/sema") == Some(188.0)
        && byte_of("vision_text/sema_static") == Some(832.0)
        && byte_of("voice_wer/raw_compress") == Some(12_000.0)
        && byte_of("vision_text/raw") == Some(950_000.0);
    c.push(
        6,
        "fixed byte coordinates match the byte table",
        "188 / 832 / 12000 / 950000",
        if fixed_ok { "matched" } else { "mismatch" }.to_string(),
        "exact",
        fixed_ok,
    );

    let hybrid = byte_of("vision_text/sema_hybrid").unwrap_or(f64::NAN);
    let ratio = 700_000.0 / hybrid;
    c.push(
        6,
        "hybrid byte coordinate inside the corpus band",
        "compression ratio in [130, 210]",
        format!("{hybrid:.0} bytes, ratio {ratio:.1}"),
        "band",
        (130.0..=210.0).contains(&ratio),
    );
}

fn random_frame(rng: &mut ChaCha8Rng, registry: &CodebookRegistry, sequence: u32) -> TokenFrame {
    let timestamp = rng.random::<u64>() >> 1;
    if rng.random::<f64>() < 0.25 {
        let modality = if rng.random::<bool>() {
            Modality::StructuredText
        } else {
            Modality::ActionCommand
        };
        let len = rng.random_range(0..120);
        let text: String = (0..len).map(|_| random_char(rng)).collect();
        TokenFrame::text(modality, sequence, timestamp, text).expect("short text")
    } else {
        let (modality, codebook) = match rng.random_range(0..3) {
            0 => (Modality::AudioTokens, AUDIO_CODEBOOK),
            1 => (Modality::VisualTokens, VISUAL_CODEBOOK),
            _ => (Modality::TtsTokens, TTS_CODEBOOK),
        };
        let size = registry.size_of(codebook).expect("default codebook");
        let count = rng.random_range(0..400);
        let tokens: Vec<u32> = (0..count).map(|_| rng.random_range(0..size)).collect();
        TokenFrame::tokens(modality, codebook, sequence, timestamp, tokens).expect("short frame")
    }
}

fn random_char(rng: &mut ChaCha8Rng) -> char {
    match rng.random_range(0..8) {
        0 => '"',
        1 => '\\',
        2 => '\n',
        3 => '[',
        4 => ']',
        _ => rng.random::<char>(),
    }
}

fn roughen_labels(node: &mut UiNode, rng: &mut ChaCha8Rng) {
    if rng.random::<f64>() < 0.15 {
        let len = rng.random_range(0..12);
        node.label = (0..len).map(|_| random_char(rng)).collect();
    }
    for child in &mut node.children {
        roughen_labels(child, rng);
    }
}
