//! Fixtures shared by the criterion benches.

use sema_core::{CodebookRegistry, Modality, ScreenSnapshot, TokenFrame};

/// Registry the benches encode against: speech, visual, and TTS codebooks.
pub fn registry() -> CodebookRegistry {
    CodebookRegistry::simulation_defaults()
}

/// A 3 s speech turn: 150 tokens from the 1024-entry codebook.
pub fn audio_turn() -> TokenFrame {
    let tokens = (0..150u32).map(|i| (i * 37 + 11) % 1024).collect();
    TokenFrame::tokens(Modality::AudioTokens, 1, 7, 1_723_000_000_000_000, tokens).unwrap()
}

/// One 1080p screen update: 512 tokens from the 8192-entry codebook.
pub fn visual_update() -> TokenFrame {
    let tokens = (0..512u32).map(|i| (i * 91 + 5) % 8192).collect();
    TokenFrame::tokens(Modality::VisualTokens, 2, 12, 1_723_000_000_250_000, tokens).unwrap()
}

/// The fixed desktop snapshot used across the latency simulations.
pub fn snapshot() -> ScreenSnapshot {
    sema_core::reference_snapshot()
}
