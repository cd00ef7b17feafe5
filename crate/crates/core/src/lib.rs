//! Simulation suite for Sema, a token framing protocol that ships
//! semantic tokens instead of encoded media.
//!
//! The crate builds up in layers: the wire codec ([`frame`]), screen
//! snapshots and their hybrid encoding ([`screen`], [`corpus`]), the
//! latency cost model ([`cost`]), an in-process WAN link ([`link`]), the
//! downlink playout simulation ([`playout`]), end-to-end turn pipelines
//! ([`pipeline`]), and on top of those the published reference values
//! ([`reference`]), the scenario runner ([`scenario`]), and the
//! self-check report ([`acceptance`]).
//!
//! Everything is deterministic under explicit seeds: reruns of any
//! simulation or scenario reproduce their output bit for bit.

pub mod acceptance;
pub mod corpus;
pub mod cost;
pub mod frame;
pub mod link;
pub mod pipeline;
pub mod playout;
pub mod reference;
pub mod scenario;
pub mod screen;

pub use acceptance::{run_acceptance, AcceptanceConfig, AcceptanceReport, CheckLine};
pub use corpus::{generate_corpus, load_corpus, reference_snapshot, save_corpus, CorpusSpec};
pub use cost::{
    component_latency, payload_size, Component, CostProfile, CostRange, ResolveMode, StreamKind,
};
pub use frame::{
    bits_per_token, decode_frame, encode_frame, payload_bytes, Codebook, CodebookRegistry,
    FrameError, FrameHeader, Modality, Payload, TokenFrame, HEADER_LEN,
};
pub use link::{mbps, serialization_ms, Direction, JitterKind, JitterSpec, Link, LinkSpec};
pub use pipeline::{LatencyBreakdown, Medium, Method, PipelineEnv, PipelineError};
pub use playout::{
    gap_free_threshold, simulate_playout, simulate_trial, PlayoutConfig, PlayoutMode,
    PlayoutSummary, PlayoutTrace,
};
pub use reference::{Dataset, ReferenceRow, REFERENCE_ROWS};
pub use scenario::{
    apply_override, load_profile, load_with_overrides, run_scenario, ConfigError, CsvRow,
    Scenario, ScenarioError, ScenarioKind, ScenarioOutput, Source,
};
pub use screen::{
    encode_compact_text, parse_compact_text, plan_tiling, FlatNode, ScreenError, ScreenSnapshot,
    SnapshotSource, TilingConfig, TilingPlan, UiNode,
};
