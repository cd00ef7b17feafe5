//! WAN link emulation: serialization delay, optional propagation, and
//! seeded jitter.
//!
//! Delays are computed, not slept. Serialization of `n` bytes on a `b`
//! bit/s link takes `n * 8 * 1000 / b` milliseconds; propagation adds half
//! the round-trip time and is off by default so transfer numbers stay
//! comparable across links with different RTTs. Jitter draws come from a
//! seeded generator, so every run with the same spec reproduces the same
//! delays. Nothing reorders traffic back into FIFO order: a later send can
//! arrive first, and deliveries keep their original sequence numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Normal};
use serde::{Deserialize, Serialize};

/// Jitter distribution for one direction of a link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "distribution", rename_all = "snake_case")]
pub enum JitterKind {
    None,
    /// Uniform on `[0, max_ms)`.
    Uniform { max_ms: f64 },
    /// Zero-mean normal; negative draws mean an early arrival.
    Normal { sd_ms: f64 },
    /// Exponential with the given mean.
    Exponential { mean_ms: f64 },
}

/// Jitter configuration: the distribution plus a mandatory seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterSpec {
    #[serde(flatten)]
    pub kind: JitterKind,
    pub seed: u64,
}

impl JitterSpec {
    pub fn none() -> Self {
        JitterSpec {
            kind: JitterKind::None,
            seed: 0,
        }
    }

    pub fn uniform(max_ms: f64, seed: u64) -> Self {
        JitterSpec {
            kind: JitterKind::Uniform { max_ms },
            seed,
        }
    }
}

/// A stream of jitter samples. Streams created from the same spec yield
/// identical draws; `substream` picks an independent sequence for the same
/// seed, which keeps per-trial draws stable when sweeping a parameter.
#[derive(Debug, Clone)]
pub struct JitterStream {
    kind: JitterKind,
    rng: ChaCha8Rng,
}

impl JitterStream {
    pub fn new(spec: &JitterSpec) -> Self {
        Self::substream(spec, 0)
    }

    pub fn substream(spec: &JitterSpec, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(index);
        JitterStream {
            kind: spec.kind,
            rng,
        }
    }

    /// Next jitter value in milliseconds.
    ///
    /// Uniform draws scale a unit sample by the bound, so sweeps that vary
    /// only the bound see the same underlying randomness at every point.
    pub fn sample_ms(&mut self) -> f64 {
        match self.kind {
            JitterKind::None => 0.0,
            JitterKind::Uniform { max_ms } => self.rng.random::<f64>() * max_ms,
            JitterKind::Normal { sd_ms } => {
                if sd_ms == 0.0 {
                    0.0
                } else {
                    Normal::new(0.0, sd_ms).expect("finite sd").sample(&mut self.rng)
                }
            }
            JitterKind::Exponential { mean_ms } => {
                if mean_ms == 0.0 {
                    0.0
                } else {
                    Exp::new(1.0 / mean_ms).expect("positive rate").sample(&mut self.rng)
                }
            }
        }
    }
}

/// Static description of an emulated link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub uplink_bps: f64,
    pub downlink_bps: f64,
    pub rtt_ms: f64,
    pub jitter: JitterSpec,
}

impl LinkSpec {
    pub fn symmetric(bps: f64, rtt_ms: f64) -> Self {
        LinkSpec {
            uplink_bps: bps,
            downlink_bps: bps,
            rtt_ms,
            jitter: JitterSpec::none(),
        }
    }

    pub fn bps(&self, direction: Direction) -> f64 {
        match direction {
            Direction::Uplink => self.uplink_bps,
            Direction::Downlink => self.downlink_bps,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Uplink,
    Downlink,
}

/// Milliseconds to clock `bytes` onto a `bps` link.
pub fn serialization_ms(bytes: u64, bps: f64) -> f64 {
    assert!(bps > 0.0, "link rate must be positive");
    bytes as f64 * 8.0 * 1000.0 / bps
}

/// One-way delay without jitter: serialization plus optional propagation.
pub fn one_way_ms(bytes: u64, bps: f64, rtt_ms: f64, include_propagation: bool) -> f64 {
    let propagation = if include_propagation { rtt_ms / 2.0 } else { 0.0 };
    serialization_ms(bytes, bps) + propagation
}

/// A link instance with its jitter stream attached.
#[derive(Debug, Clone)]
pub struct Link {
    pub spec: LinkSpec,
    jitter: JitterStream,
}

/// One scheduled transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SendEvent {
    pub at_ms: f64,
    pub bytes: u64,
}

/// One delivered transmission, tagged with the sender's sequence number.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Delivery {
    pub sequence: u32,
    pub sent_ms: f64,
    pub arrival_ms: f64,
}

impl Link {
    pub fn new(spec: LinkSpec) -> Self {
        Link {
            jitter: JitterStream::new(&spec.jitter),
            spec,
        }
    }

    /// Link whose jitter draws come from an independent substream, for
    /// repeated trials under one seed.
    pub fn with_substream(spec: LinkSpec, index: u64) -> Self {
        Link {
            jitter: JitterStream::substream(&spec.jitter, index),
            spec,
        }
    }

    /// One-way delay for a single transmission, consuming one jitter draw.
    /// The result never goes below zero even for negative jitter.
    pub fn one_way_ms(
        &mut self,
        bytes: u64,
        direction: Direction,
        include_propagation: bool,
    ) -> f64 {
        let base = one_way_ms(
            bytes,
            self.spec.bps(direction),
            self.spec.rtt_ms,
            include_propagation,
        );
        (base + self.jitter.sample_ms()).max(0.0)
    }

    /// Delivers a schedule of sends, one jitter draw each. Deliveries come
    /// back in send order; their arrival times may interleave arbitrarily.
    pub fn deliver_sequence(
        &mut self,
        sends: &[SendEvent],
        direction: Direction,
        include_propagation: bool,
    ) -> Vec<Delivery> {
        sends
            .iter()
            .enumerate()
            .map(|(seq, send)| Delivery {
                sequence: seq as u32,
                sent_ms: send.at_ms,
                arrival_ms: send.at_ms
                    + self.one_way_ms(send.bytes, direction, include_propagation),
            })
            .collect()
    }
}

/// Convenience for specs quoted in megabits per second.
pub fn mbps(rate: f64) -> f64 {
    rate * 1e6
}
