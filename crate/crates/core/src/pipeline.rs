//! End-to-end turn pipelines: what one voice or vision turn costs on the
//! wire under each transport method.
//!
//! A turn is client encode, serialization, optional propagation, and
//! server decode; model inference afterwards is the same for every method
//! and is deliberately left out. Methods compose the cost model with the
//! framing arithmetic, so the byte counts reported here are the serialized
//! frame sizes the codec would actually put on the wire (the raw and
//! compressed baselines ship unframed blobs and their table sizes apply
//! unchanged).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{component_latency, payload_size, Component, CostProfile, StreamKind};
use crate::frame::{payload_bytes, CodebookRegistry, HEADER_LEN};
use crate::link::{serialization_ms, LinkSpec};
use crate::screen::{
    assemble_hybrid, plan_tiling, OcrConfig, ScreenError, ScreenSnapshot, SnapshotSource,
};

/// Transport method under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Raw,
    RawCompress,
    SemaStatic,
    SemaHybrid,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Raw,
        Method::RawCompress,
        Method::SemaStatic,
        Method::SemaHybrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Raw => "raw",
            Method::RawCompress => "raw_compress",
            Method::SemaStatic => "sema_static",
            Method::SemaHybrid => "sema_hybrid",
        }
    }

    pub fn is_sema(self) -> bool {
        matches!(self, Method::SemaStatic | Method::SemaHybrid)
    }
}

/// What the turn carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Medium {
    Voice,
    Vision,
}

impl Medium {
    pub fn name(self) -> &'static str {
        match self {
            Medium::Voice => "voice",
            Medium::Vision => "vision",
        }
    }
}

/// Stage costs of one turn. `total_ms` is always the sum of the four
/// stages, and `payload_bytes` is what crossed the link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencyBreakdown {
    pub client_encode_ms: f64,
    pub serialization_ms: f64,
    pub propagation_ms: f64,
    pub server_decode_ms: f64,
    pub total_ms: f64,
    pub payload_bytes: u64,
}

impl LatencyBreakdown {
    fn compose(encode: f64, ser: f64, prop: f64, decode: f64, bytes: u64) -> Self {
        LatencyBreakdown {
            client_encode_ms: encode,
            serialization_ms: ser,
            propagation_ms: prop,
            server_decode_ms: decode,
            total_ms: encode + ser + prop + decode,
            payload_bytes: bytes,
        }
    }

    pub fn stages(&self) -> [(&'static str, f64); 4] {
        [
            ("client_encode", self.client_encode_ms),
            ("serialization", self.serialization_ms),
            ("propagation", self.propagation_ms),
            ("server_decode", self.server_decode_ms),
        ]
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("method {0:?} needs a screen snapshot for vision turns")]
    MissingSnapshot(&'static str),
    #[error("the two methods never cross inside the searched band")]
    NoCrossover,
    #[error(transparent)]
    Screen(#[from] ScreenError),
}

/// Everything a pipeline run needs besides the link: costs, codebooks, and
/// the propagation convention. Runs are pure given an environment, so one
/// environment can serve any number of concurrent sweeps.
#[derive(Debug, Clone)]
pub struct PipelineEnv {
    pub profile: CostProfile,
    pub registry: CodebookRegistry,
    /// Count half the RTT into each turn. Off by default so curves from
    /// links with different RTTs stay comparable.
    pub include_propagation: bool,
    /// Seed for profiles that resolve stages by sampling.
    pub seed: u64,
}

impl PipelineEnv {
    pub fn new(profile: CostProfile) -> Self {
        PipelineEnv {
            profile,
            registry: CodebookRegistry::simulation_defaults(),
            include_propagation: false,
            seed: 0,
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    fn propagation_ms(&self, link: &LinkSpec) -> f64 {
        if self.include_propagation {
            link.rtt_ms / 2.0
        } else {
            0.0
        }
    }

    /// One client-to-server turn: a 3 s utterance for voice, one screen
    /// update for vision. Sema vision methods require the snapshot.
    pub fn run_uplink_turn(
        &self,
        method: Method,
        medium: Medium,
        link: &LinkSpec,
        snapshot: Option<&ScreenSnapshot>,
    ) -> Result<LatencyBreakdown, PipelineError> {
        let mut rng = self.rng();
        let profile = &self.profile;
        let prop = self.propagation_ms(link);
        let breakdown = match (medium, method) {
            (Medium::Voice, Method::Raw) => {
                let bytes = payload_size(profile, StreamKind::RawPcm3s);
                let ser = serialization_ms(bytes, link.uplink_bps);
                LatencyBreakdown::compose(0.0, ser, prop, 0.0, bytes)
            }
            (Medium::Voice, Method::RawCompress) => {
                let bytes = payload_size(profile, StreamKind::Opus3s);
                let encode = if profile.include_baseline_encoders {
                    component_latency(profile, Component::OpusEncode, 1.0, &mut rng)
                } else {
                    0.0
                };
                let ser = serialization_ms(bytes, link.uplink_bps);
                LatencyBreakdown::compose(encode, ser, prop, 0.0, bytes)
            }
            (Medium::Voice, Method::SemaStatic | Method::SemaHybrid) => {
                let tokens = 3 * profile.tokens_per_second as usize;
                let bytes =
                    (HEADER_LEN + payload_bytes(tokens, profile.audio_codebook_size)) as u64;
                let encode = component_latency(profile, Component::AudioTurnEncode, 1.0, &mut rng);
                let ser = serialization_ms(bytes, link.uplink_bps);
                let decode =
                    component_latency(profile, Component::ServerAudioDecode, 1.0, &mut rng);
                LatencyBreakdown::compose(encode, ser, prop, decode, bytes)
            }
            (Medium::Vision, Method::Raw) => {
                let bytes = payload_size(profile, StreamKind::RawPng);
                let ser = serialization_ms(bytes, link.uplink_bps);
                LatencyBreakdown::compose(0.0, ser, prop, 0.0, bytes)
            }
            (Medium::Vision, Method::RawCompress) => {
                let bytes = payload_size(profile, StreamKind::Webp1080p);
                let encode = if profile.include_baseline_encoders {
                    component_latency(profile, Component::WebpEncode, 1.0, &mut rng)
                } else {
                    0.0
                };
                let ser = serialization_ms(bytes, link.uplink_bps);
                LatencyBreakdown::compose(encode, ser, prop, 0.0, bytes)
            }
            (Medium::Vision, Method::SemaStatic) => {
                let snapshot = snapshot.ok_or(PipelineError::MissingSnapshot("sema_static"))?;
                let plan = plan_tiling(snapshot.width, snapshot.height, &profile.tiling);
                let bytes = crate::screen::static_wire_bytes(&plan, &self.registry)? as u64;
                let encode = component_latency(
                    profile,
                    Component::VisualTileEncode,
                    plan.tile_count as f64,
                    &mut rng,
                );
                let ser = serialization_ms(bytes, link.uplink_bps);
                let decode =
                    component_latency(profile, Component::ServerVisualDecode, 1.0, &mut rng);
                LatencyBreakdown::compose(encode, ser, prop, decode, bytes)
            }
            (Medium::Vision, Method::SemaHybrid) => {
                let snapshot = snapshot.ok_or(PipelineError::MissingSnapshot("sema_hybrid"))?;
                let plan = plan_tiling(snapshot.width, snapshot.height, &profile.tiling);
                let ocr = OcrConfig {
                    payload_bytes: profile.ocr_payload_bytes.resolve(&mut rng).round() as usize,
                };
                let hybrid = assemble_hybrid(snapshot, &plan, &self.registry, &ocr)?;
                let text_encode = match snapshot.source {
                    SnapshotSource::AccessibilityTree => {
                        component_latency(profile, Component::AxtreeRead, 1.0, &mut rng)
                    }
                    SnapshotSource::Ocr => {
                        component_latency(profile, Component::OcrEncode, 1.0, &mut rng)
                    }
                };
                let tile_encode = component_latency(
                    profile,
                    Component::VisualTileEncode,
                    plan.tile_count as f64,
                    &mut rng,
                );
                let bytes = hybrid.total_bytes as u64;
                let ser = serialization_ms(bytes, link.uplink_bps);
                let decode =
                    component_latency(profile, Component::ServerVisualDecode, 1.0, &mut rng);
                LatencyBreakdown::compose(text_encode + tile_encode, ser, prop, decode, bytes)
            }
        };
        Ok(breakdown)
    }

    /// One server-to-client voice batch: synthesized speech of the given
    /// duration. For Sema the client runs the vocoder; the baselines vocode
    /// on the server and ship audio.
    pub fn run_downlink_turn(
        &self,
        method: Method,
        link: &LinkSpec,
        batch_ms: f64,
    ) -> LatencyBreakdown {
        let mut rng = self.rng();
        let profile = &self.profile;
        let prop = self.propagation_ms(link);
        let seconds = batch_ms / 1000.0;
        match method {
            Method::Raw => {
                let bytes =
                    (payload_size(profile, StreamKind::RawPcm3s) as f64 * seconds / 3.0) as u64;
                let vocode = component_latency(profile, Component::VocoderDecode, 1.0, &mut rng);
                let ser = serialization_ms(bytes, link.downlink_bps);
                LatencyBreakdown::compose(vocode, ser, prop, 0.0, bytes)
            }
            Method::RawCompress => {
                let bytes =
                    (payload_size(profile, StreamKind::Opus3s) as f64 * seconds / 3.0) as u64;
                let mut encode =
                    component_latency(profile, Component::VocoderDecode, 1.0, &mut rng);
                if profile.include_baseline_encoders {
                    encode += component_latency(profile, Component::OpusEncode, 1.0, &mut rng);
                }
                let ser = serialization_ms(bytes, link.downlink_bps);
                LatencyBreakdown::compose(encode, ser, prop, 0.0, bytes)
            }
            Method::SemaStatic | Method::SemaHybrid => {
                let tokens = (seconds * profile.tokens_per_second as f64).round() as usize;
                let bytes =
                    (HEADER_LEN + payload_bytes(tokens, profile.audio_codebook_size)) as u64;
                let decode = if tokens == 0 {
                    0.0
                } else {
                    component_latency(profile, Component::VocoderDecode, 1.0, &mut rng)
                };
                let ser = serialization_ms(bytes, link.downlink_bps);
                LatencyBreakdown::compose(0.0, ser, prop, decode, bytes)
            }
        }
    }

    /// Uplink bandwidth at which the Sema voice turn stops being faster
    /// than the compressed baseline, found by bisection over
    /// 0.1 .. 100 Mbps. Fails with `NoCrossover` when one side wins across
    /// the whole band.
    pub fn audio_crossover_bps(&self, link_template: &LinkSpec) -> Result<f64, PipelineError> {
        let diff = |bps: f64| -> f64 {
            let link = LinkSpec {
                uplink_bps: bps,
                ..*link_template
            };
            let sema = self
                .run_uplink_turn(Method::SemaStatic, Medium::Voice, &link, None)
                .expect("voice needs no snapshot");
            let baseline = self
                .run_uplink_turn(Method::RawCompress, Medium::Voice, &link, None)
                .expect("voice needs no snapshot");
            sema.total_ms - baseline.total_ms
        };
        let (mut lo, mut hi) = (0.1e6, 100.0e6);
        let (f_lo, f_hi) = (diff(lo), diff(hi));
        if f_lo == 0.0 {
            return Ok(lo);
        }
        if f_hi == 0.0 {
            return Ok(hi);
        }
        if f_lo.signum() == f_hi.signum() {
            return Err(PipelineError::NoCrossover);
        }
        for _ in 0..200 {
            let mid = (lo + hi) / 2.0;
            let f_mid = diff(mid);
            if f_mid == 0.0 {
                return Ok(mid);
            }
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok((lo + hi) / 2.0)
    }

    /// How much slower the baseline still is at a given bandwidth:
    /// `total(baseline) - total(contender)` in milliseconds. Negative when
    /// the baseline has caught up.
    pub fn high_bw_margin(
        &self,
        baseline: Method,
        contender: Method,
        medium: Medium,
        link: &LinkSpec,
        snapshot: Option<&ScreenSnapshot>,
    ) -> Result<f64, PipelineError> {
        let base = self.run_uplink_turn(baseline, medium, link, snapshot)?;
        let other = self.run_uplink_turn(contender, medium, link, snapshot)?;
        Ok(base.total_ms - other.total_ms)
    }
}
