//! Parameterized stage costs and payload sizes.
//!
//! Every compute stage is a `[low, high]` millisecond range with a resolve
//! mode instead of a point estimate, so sweeps can run at the midpoint, at
//! either edge, or with seeded sampling. Payload sizes follow the same
//! convention as the rest of the crate: bytes, with 1 KB = 1000 B, and the
//! token streams are computed from the framing arithmetic rather than
//! configured.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{bits_per_token, payload_bytes};
use crate::screen::{plan_tiling, TilingConfig};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CostError {
    #[error("unknown cost component {0:?}")]
    UnknownComponent(String),
    #[error("unknown payload stream {0:?}")]
    UnknownStream(String),
    #[error("invalid range for {component}: low {low} .. high {high}")]
    InvalidRange {
        component: String,
        low: String,
        high: String,
    },
}

/// How a `[low, high]` range collapses to one number.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResolveMode {
    #[default]
    Midpoint,
    Low,
    High,
    UniformSample,
}

/// A cost stated as a range of milliseconds (or bytes) with its resolve mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostRange {
    pub low: f64,
    pub high: f64,
    #[serde(default)]
    pub mode: ResolveMode,
}

impl CostRange {
    pub fn new(low: f64, high: f64) -> Self {
        CostRange {
            low,
            high,
            mode: ResolveMode::Midpoint,
        }
    }

    /// A degenerate range for stages the source material states as a point.
    pub fn point(value: f64) -> Self {
        Self::new(value, value)
    }

    pub fn with_mode(mut self, mode: ResolveMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn resolve(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.mode {
            ResolveMode::Midpoint => (self.low + self.high) / 2.0,
            ResolveMode::Low => self.low,
            ResolveMode::High => self.high,
            ResolveMode::UniformSample => {
                if self.low == self.high {
                    self.low
                } else {
                    rng.random_range(self.low..self.high)
                }
            }
        }
    }
}

/// Compute stages the pipelines draw on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Component {
    AudioTokenizePerS,
    AudioTurnEncode,
    VocoderDecode,
    ServerAudioDecode,
    VisualTileEncode,
    AxtreeRead,
    OcrEncode,
    ServerVisualDecode,
    ServerReconTotal,
    WebpEncode,
    OpusEncode,
}

impl Component {
    pub const ALL: [Component; 11] = [
        Component::AudioTokenizePerS,
        Component::AudioTurnEncode,
        Component::VocoderDecode,
        Component::ServerAudioDecode,
        Component::VisualTileEncode,
        Component::AxtreeRead,
        Component::OcrEncode,
        Component::ServerVisualDecode,
        Component::ServerReconTotal,
        Component::WebpEncode,
        Component::OpusEncode,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Component::AudioTokenizePerS => "audio_tokenize_per_s",
            Component::AudioTurnEncode => "audio_turn_encode",
            Component::VocoderDecode => "vocoder_decode",
            Component::ServerAudioDecode => "server_audio_decode",
            Component::VisualTileEncode => "visual_tile_encode",
            Component::AxtreeRead => "axtree_read",
            Component::OcrEncode => "ocr_encode",
            Component::ServerVisualDecode => "server_visual_decode",
            Component::ServerReconTotal => "server_recon_total",
            Component::WebpEncode => "webp_encode",
            Component::OpusEncode => "opus_encode",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, CostError> {
        Component::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .ok_or_else(|| CostError::UnknownComponent(name.to_string()))
    }

    /// Per-unit components scale with their quantity (seconds of audio,
    /// tiles of a capture); the rest are flat per invocation.
    pub fn is_per_unit(self) -> bool {
        matches!(
            self,
            Component::AudioTokenizePerS | Component::VisualTileEncode
        )
    }
}

/// Payload streams with a fixed reference size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StreamKind {
    RawPcm3s,
    RawPng,
    Opus3s,
    Webp1080p,
    AudioTokens3s,
    VisualTokens1080p,
    Hybrid1080p,
}

impl StreamKind {
    pub const ALL: [StreamKind; 7] = [
        StreamKind::RawPcm3s,
        StreamKind::RawPng,
        StreamKind::Opus3s,
        StreamKind::Webp1080p,
        StreamKind::AudioTokens3s,
        StreamKind::VisualTokens1080p,
        StreamKind::Hybrid1080p,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StreamKind::RawPcm3s => "raw_pcm_3s",
            StreamKind::RawPng => "raw_png",
            StreamKind::Opus3s => "opus_3s",
            StreamKind::Webp1080p => "webp_1080p",
            StreamKind::AudioTokens3s => "audio_tokens_3s",
            StreamKind::VisualTokens1080p => "visual_tokens_1080p",
            StreamKind::Hybrid1080p => "hybrid_1080p",
        }
    }

    pub fn from_name(name: &str) -> Result<Self, CostError> {
        StreamKind::ALL
            .into_iter()
            .find(|s| s.name() == name)
            .ok_or_else(|| CostError::UnknownStream(name.to_string()))
    }
}

/// Reference sizes for the baseline streams, in bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PayloadTable {
    pub raw_pcm_3s: u64,
    pub raw_png: u64,
    pub opus_3s: u64,
    pub webp_1080p: u64,
    /// Median serialized hybrid update for a 1080p desktop screen.
    pub hybrid_1080p: u64,
}

impl Default for PayloadTable {
    fn default() -> Self {
        PayloadTable {
            raw_pcm_3s: 96_000,
            raw_png: 950_000,
            opus_3s: 12_000,
            webp_1080p: 700_000,
            hybrid_1080p: 4_000,
        }
    }
}

/// The full cost table one simulation run works from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostProfile {
    pub audio_tokenize_per_s: CostRange,
    pub audio_turn_encode: CostRange,
    pub vocoder_decode: CostRange,
    pub server_audio_decode: CostRange,
    pub visual_tile_encode: CostRange,
    pub axtree_read: CostRange,
    pub ocr_encode: CostRange,
    pub server_visual_decode: CostRange,
    pub server_recon_total: CostRange,
    pub webp_encode: CostRange,
    pub opus_encode: CostRange,
    /// Modeled size of an OCR transcript, in bytes.
    pub ocr_payload_bytes: CostRange,
    /// One encoder pass covers all tiles of a capture when set.
    pub batched_tile_encode: bool,
    /// Charge the baselines their own encoder time (WebP, Opus). Off by
    /// default so baseline transfer numbers stay pure serialization.
    pub include_baseline_encoders: bool,
    pub tokens_per_second: u32,
    pub audio_codebook_size: u32,
    pub visual_codebook_size: u32,
    pub tiling: TilingConfig,
    pub payloads: PayloadTable,
}

impl Default for CostProfile {
    fn default() -> Self {
        Self::paper_defaults()
    }
}

impl CostProfile {
    /// The profile every headline figure is reproduced with: desktop-class
    /// encoders and the published reference payload sizes.
    pub fn paper_defaults() -> Self {
        CostProfile {
            audio_tokenize_per_s: CostRange::new(15.0, 60.0),
            audio_turn_encode: CostRange::new(45.0, 180.0),
            vocoder_decode: CostRange::new(5.0, 10.0),
            server_audio_decode: CostRange::point(8.0),
            visual_tile_encode: CostRange::point(40.0),
            axtree_read: CostRange::point(0.0),
            ocr_encode: CostRange::new(20.0, 50.0),
            server_visual_decode: CostRange::point(30.0),
            server_recon_total: CostRange::new(30.0, 35.0),
            webp_encode: CostRange::point(50.0),
            opus_encode: CostRange::point(5.0),
            ocr_payload_bytes: CostRange::new(1_000.0, 3_000.0),
            batched_tile_encode: true,
            include_baseline_encoders: false,
            tokens_per_second: 50,
            audio_codebook_size: 1024,
            visual_codebook_size: 8192,
            tiling: TilingConfig::default(),
            payloads: PayloadTable::default(),
        }
    }

    /// Mobile-class variant: slower, wider tile encode range.
    pub fn mobile() -> Self {
        CostProfile {
            visual_tile_encode: CostRange::new(30.0, 150.0),
            ..Self::paper_defaults()
        }
    }

    pub fn range(&self, component: Component) -> CostRange {
        match component {
            Component::AudioTokenizePerS => self.audio_tokenize_per_s,
            Component::AudioTurnEncode => self.audio_turn_encode,
            Component::VocoderDecode => self.vocoder_decode,
            Component::ServerAudioDecode => self.server_audio_decode,
            Component::VisualTileEncode => self.visual_tile_encode,
            Component::AxtreeRead => self.axtree_read,
            Component::OcrEncode => self.ocr_encode,
            Component::ServerVisualDecode => self.server_visual_decode,
            Component::ServerReconTotal => self.server_recon_total,
            Component::WebpEncode => self.webp_encode,
            Component::OpusEncode => self.opus_encode,
        }
    }

    pub fn validate(&self) -> Result<(), CostError> {
        for component in Component::ALL {
            let r = self.range(component);
            if !(r.low.is_finite() && r.high.is_finite()) || r.low < 0.0 || r.low > r.high {
                return Err(CostError::InvalidRange {
                    component: component.name().to_string(),
                    low: r.low.to_string(),
                    high: r.high.to_string(),
                });
            }
        }
        let ocr = self.ocr_payload_bytes;
        if !(ocr.low.is_finite() && ocr.high.is_finite()) || ocr.low < 0.0 || ocr.low > ocr.high {
            return Err(CostError::InvalidRange {
                component: "ocr_payload_bytes".to_string(),
                low: ocr.low.to_string(),
                high: ocr.high.to_string(),
            });
        }
        Ok(())
    }
}

/// Resolved latency of one stage. Per-unit components multiply by the
/// quantity; a batched tile encode charges a single tile regardless of
/// count. Quantity zero always costs nothing for per-unit components.
pub fn component_latency(
    profile: &CostProfile,
    component: Component,
    quantity: f64,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let unit = profile.range(component).resolve(rng);
    if !component.is_per_unit() {
        return unit;
    }
    if quantity == 0.0 {
        return 0.0;
    }
    if component == Component::VisualTileEncode && profile.batched_tile_encode {
        unit
    } else {
        unit * quantity
    }
}

/// Reference payload size of a stream in bytes. Token streams come from
/// the framing arithmetic; baselines come from the profile's table.
pub fn payload_size(profile: &CostProfile, stream: StreamKind) -> u64 {
    match stream {
        StreamKind::RawPcm3s => profile.payloads.raw_pcm_3s,
        StreamKind::RawPng => profile.payloads.raw_png,
        StreamKind::Opus3s => profile.payloads.opus_3s,
        StreamKind::Webp1080p => profile.payloads.webp_1080p,
        StreamKind::Hybrid1080p => profile.payloads.hybrid_1080p,
        StreamKind::AudioTokens3s => {
            payload_bytes(3 * profile.tokens_per_second as usize, profile.audio_codebook_size)
                as u64
        }
        StreamKind::VisualTokens1080p => {
            let plan = plan_tiling(1920, 1080, &profile.tiling);
            payload_bytes(plan.token_count(), profile.visual_codebook_size) as u64
        }
    }
}

/// Wire bitrate of the steady audio token stream, header overhead excluded.
pub fn audio_token_bits_per_s(profile: &CostProfile) -> u64 {
    profile.tokens_per_second as u64 * bits_per_token(profile.audio_codebook_size) as u64
}
