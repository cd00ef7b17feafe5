//! Receiver playout model for timed media streams.
//!
//! Units (TTS batches or RTC frames) leave the sender on a fixed schedule,
//! cross a jittery link, and are consumed at a fixed cadence after a
//! cushion. Unit `i` is sent at `i * D`; playout starts a cushion of
//! `beta * D` after the first arrival; unit `i` is due at
//! `playout_start + i * D`. A unit that arrives after its deadline is a
//! gap, and the gap length is the overshoot.
//!
//! Under uniform jitter on `[0, J)` the first arrival's draw is the only
//! reference, so a stream is gap-free exactly when `J <= beta * D`; the
//! sweep in `gap_free_threshold` recovers that edge from simulation alone.

use serde::{Deserialize, Serialize};

use crate::frame::{payload_bytes, HEADER_LEN};
use crate::link::{Direction, Link, LinkSpec};

/// Cadenced delivery flavors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlayoutMode {
    /// Multi-second synthesized-speech batches with a startup cushion.
    BatchTts,
    /// Short conversational frames played as they land.
    StreamingRtc,
}

/// One playout experiment: the cadence, the cushion, and the unit size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlayoutConfig {
    pub mode: PlayoutMode,
    /// Schedule interval `D` in milliseconds: batch duration or frame gap.
    pub unit_ms: f64,
    pub n_units: usize,
    /// Cushion before playout starts, as a fraction of `unit_ms`.
    pub beta: f64,
    /// Serialized size of one unit on the wire.
    pub unit_bytes: u64,
    pub include_propagation: bool,
}

impl PlayoutConfig {
    /// A token-batch TTS stream: 50 tokens per second of speech, framed,
    /// with a 20% startup cushion.
    pub fn batch_tts(batch_ms: f64) -> Self {
        let tokens = (batch_ms / 1000.0 * 50.0).round() as usize;
        PlayoutConfig {
            mode: PlayoutMode::BatchTts,
            unit_ms: batch_ms,
            n_units: 25,
            beta: 0.2,
            unit_bytes: (HEADER_LEN + payload_bytes(tokens, 1024)) as u64,
            include_propagation: false,
        }
    }

    /// A 20 ms conversational frame stream played with no cushion.
    pub fn streaming_rtc() -> Self {
        PlayoutConfig {
            mode: PlayoutMode::StreamingRtc,
            unit_ms: 20.0,
            n_units: 100,
            beta: 0.0,
            unit_bytes: 80,
            include_propagation: false,
        }
    }
}

/// One unit's timing in a single trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitRecord {
    pub sequence: u32,
    pub send_ms: f64,
    pub arrival_ms: f64,
    pub deadline_ms: f64,
    pub gap_ms: f64,
}

/// Full timing of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct PlayoutTrace {
    pub units: Vec<UnitRecord>,
    pub playout_start_ms: f64,
    pub gap_count: usize,
    pub total_gap_ms: f64,
}

/// Aggregate over repeated seeded trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlayoutSummary {
    pub trials: usize,
    pub n_units: usize,
    pub gap_count: usize,
    /// Gaps per scheduled unit across all trials, in `[0, 1]`.
    pub gap_rate: f64,
    pub total_gap_ms: f64,
}

/// Runs one trial. Trial indexes select independent jitter substreams
/// under the link's seed, so a trial is reproducible in isolation.
pub fn simulate_trial(config: &PlayoutConfig, link: &LinkSpec, trial: u64) -> PlayoutTrace {
    assert!(config.n_units >= 2, "a stream needs at least two units");
    assert!(config.unit_ms > 0.0 && config.beta >= 0.0);
    let mut link = Link::with_substream(*link, trial);
    let units: Vec<(f64, f64)> = (0..config.n_units)
        .map(|i| {
            let send = i as f64 * config.unit_ms;
            let arrival = send
                + link.one_way_ms(
                    config.unit_bytes,
                    Direction::Downlink,
                    config.include_propagation,
                );
            (send, arrival)
        })
        .collect();
    let playout_start = units[0].1 + config.beta * config.unit_ms;
    let mut records = Vec::with_capacity(config.n_units);
    let mut gap_count = 0;
    let mut total_gap_ms = 0.0;
    for (i, &(send, arrival)) in units.iter().enumerate() {
        let deadline = playout_start + i as f64 * config.unit_ms;
        let gap_ms = (arrival - deadline).max(0.0);
        if gap_ms > 0.0 {
            gap_count += 1;
            total_gap_ms += gap_ms;
        }
        records.push(UnitRecord {
            sequence: i as u32,
            send_ms: send,
            arrival_ms: arrival,
            deadline_ms: deadline,
            gap_ms,
        });
    }
    PlayoutTrace {
        units: records,
        playout_start_ms: playout_start,
        gap_count,
        total_gap_ms,
    }
}

/// Runs `trials` seeded trials and aggregates their gap statistics.
pub fn simulate_playout(config: &PlayoutConfig, link: &LinkSpec, trials: usize) -> PlayoutSummary {
    assert!(trials > 0, "at least one trial");
    let mut gap_count = 0;
    let mut total_gap_ms = 0.0;
    for trial in 0..trials {
        let trace = simulate_trial(config, link, trial as u64);
        gap_count += trace.gap_count;
        total_gap_ms += trace.total_gap_ms;
    }
    PlayoutSummary {
        trials,
        n_units: config.n_units,
        gap_count,
        gap_rate: gap_count as f64 / (config.n_units * trials) as f64,
        total_gap_ms,
    }
}

/// Sweeps uniform jitter bounds and returns the largest bound that stayed
/// gap-free across every trial, or 0 when even the smallest bound gapped.
/// The sweep must be ascending.
pub fn gap_free_threshold(
    config: &PlayoutConfig,
    link_template: &LinkSpec,
    sweep_ms: &[f64],
    trials: usize,
) -> f64 {
    assert!(
        sweep_ms.windows(2).all(|w| w[0] < w[1]),
        "sweep must be strictly ascending"
    );
    let mut best = 0.0;
    for &bound in sweep_ms {
        let mut link = *link_template;
        link.jitter = crate::link::JitterSpec::uniform(bound, link_template.jitter.seed);
        let summary = simulate_playout(config, &link, trials);
        if summary.gap_count > 0 {
            break;
        }
        best = bound;
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::{mbps, JitterSpec, LinkSpec};

    fn sweep_100_to_1500() -> Vec<f64> {
        (1..=15).map(|i| i as f64 * 100.0).collect()
    }

    fn link_with_uniform(max_ms: f64, seed: u64) -> LinkSpec {
        LinkSpec {
            uplink_bps: mbps(1.0),
            downlink_bps: mbps(1.0),
            rtt_ms: 50.0,
            jitter: JitterSpec::uniform(max_ms, seed),
        }
    }

    /// Independent numeric oracle for the streaming gap rate: with no
    /// cushion, unit i gaps exactly when its jitter draw exceeds the first
    /// unit's draw, so the expected rate is the average over j0 of
    /// P(j > j0), weighted by (n-1)/n for the unit that cannot gap.
    fn expected_streaming_gap_rate(n_units: usize) -> f64 {
        let steps = 100_000;
        let mut p_sum = 0.0;
        for k in 0..steps {
            let j0 = (k as f64 + 0.5) / steps as f64;
            p_sum += 1.0 - j0;
        }
        (p_sum / steps as f64) * (n_units as f64 - 1.0) / n_units as f64
    }

    #[test]
    fn streaming_gap_rate_matches_numeric_oracle() {
        let oracle = expected_streaming_gap_rate(100);
        assert!((oracle - 0.495).abs() < 1e-4, "oracle {oracle}");

        let config = PlayoutConfig::streaming_rtc();
        let summary = simulate_playout(&config, &link_with_uniform(50.0, 42), 400);
        assert!(
            (summary.gap_rate - oracle).abs() < 0.05,
            "simulated {} vs oracle {oracle}",
            summary.gap_rate
        );
        assert!(summary.gap_rate > 0.3);
    }

    #[test]
    fn batch_3s_is_gap_free_at_600ms_jitter() {
        let config = PlayoutConfig::batch_tts(3000.0);
        let summary = simulate_playout(&config, &link_with_uniform(600.0, 42), 200);
        assert_eq!(summary.gap_count, 0);
        assert_eq!(summary.gap_rate, 0.0);
    }

    #[test]
    fn batch_3s_gaps_at_700ms_jitter() {
        let config = PlayoutConfig::batch_tts(3000.0);
        let summary = simulate_playout(&config, &link_with_uniform(700.0, 42), 200);
        assert!(summary.gap_count > 0);
    }

    #[test]
    fn threshold_for_3s_batches_is_600ms() {
        let config = PlayoutConfig::batch_tts(3000.0);
        let threshold =
            gap_free_threshold(&config, &link_with_uniform(0.0, 42), &sweep_100_to_1500(), 200);
        assert_eq!(threshold, 600.0);
        assert_eq!(threshold, config.beta * config.unit_ms);
    }

    #[test]
    fn threshold_for_5s_batches_is_1000ms() {
        let config = PlayoutConfig::batch_tts(5000.0);
        let threshold =
            gap_free_threshold(&config, &link_with_uniform(0.0, 42), &sweep_100_to_1500(), 200);
        assert_eq!(threshold, 1000.0);
    }

    #[test]
    fn streaming_has_no_gap_free_point_in_the_sweep() {
        let config = PlayoutConfig::streaming_rtc();
        let sweep: Vec<f64> = (1..=5).map(|i| i as f64 * 10.0).collect();
        let threshold = gap_free_threshold(&config, &link_with_uniform(0.0, 42), &sweep, 100);
        assert_eq!(threshold, 0.0);
    }

    #[test]
    fn no_cushion_makes_zero_beta_thresholds_zero() {
        let mut config = PlayoutConfig::batch_tts(3000.0);
        config.beta = 0.0;
        let threshold =
            gap_free_threshold(&config, &link_with_uniform(0.0, 42), &sweep_100_to_1500(), 100);
        assert_eq!(threshold, 0.0);
    }

    #[test]
    fn trace_schedule_and_deadlines_are_structured() {
        let config = PlayoutConfig::batch_tts(3000.0);
        let trace = simulate_trial(&config, &link_with_uniform(400.0, 9), 0);
        assert_eq!(trace.units.len(), config.n_units);
        assert_eq!(
            trace.playout_start_ms,
            trace.units[0].arrival_ms + 0.2 * 3000.0
        );
        for pair in trace.units.windows(2) {
            assert!((pair[1].send_ms - pair[0].send_ms - 3000.0).abs() < 1e-6);
            assert!((pair[1].deadline_ms - pair[0].deadline_ms - 3000.0).abs() < 1e-6);
        }
        assert_eq!(trace.units[0].gap_ms, 0.0, "first unit starts playout");
    }

    #[test]
    fn gap_accounting_is_conserved() {
        let config = PlayoutConfig::streaming_rtc();
        let trace = simulate_trial(&config, &link_with_uniform(50.0, 3), 1);
        let from_units: f64 = trace.units.iter().map(|u| u.gap_ms).sum();
        assert_eq!(trace.total_gap_ms, from_units);
        assert_eq!(
            trace.gap_count,
            trace.units.iter().filter(|u| u.gap_ms > 0.0).count()
        );
        assert!(trace.units.iter().all(|u| u.gap_ms >= 0.0));
    }

    #[test]
    fn batch_tts_unit_bytes_follow_token_framing() {
        assert_eq!(PlayoutConfig::batch_tts(3000.0).unit_bytes, 205);
        assert_eq!(PlayoutConfig::batch_tts(5000.0).unit_bytes, 330);
    }

    #[test]
    fn identical_configs_reproduce_identical_summaries() {
        let config = PlayoutConfig::batch_tts(3000.0);
        let link = link_with_uniform(800.0, 123);
        let a = simulate_playout(&config, &link, 50);
        let b = simulate_playout(&config, &link, 50);
        assert_eq!(a, b);
    }

    #[test]
    fn gap_rate_grows_with_jitter() {
        let config = PlayoutConfig::batch_tts(3000.0);
        let rates: Vec<f64> = [400.0, 800.0, 1200.0]
            .iter()
            .map(|&j| simulate_playout(&config, &link_with_uniform(j, 42), 100).gap_rate)
            .collect();
        assert!(rates[0] <= rates[1] && rates[1] <= rates[2], "{rates:?}");
        assert_eq!(rates[0], 0.0);
        assert!(rates[2] > 0.0);
    }
}
