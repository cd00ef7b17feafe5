//! Frozen wire vectors. Each entry pins the exact bytes a frame encodes
//! to, so any packing or header change shows up as a diff against
//! `golden/frames.json` rather than a silent drift.

use serde::Deserialize;

use sema_core::{decode_frame, encode_frame, CodebookRegistry, Modality, TokenFrame, HEADER_LEN};

#[derive(Deserialize)]
struct GoldenFile {
    registry: Vec<RegistryEntry>,
    vectors: Vec<Vector>,
}

#[derive(Deserialize)]
struct RegistryEntry {
    id: u16,
    size: u32,
    description: String,
}

#[derive(Deserialize)]
struct Vector {
    name: String,
    modality: Modality,
    #[serde(default)]
    codebook_id: u16,
    sequence: u32,
    timestamp_us: u64,
    #[serde(default)]
    tokens: Vec<u32>,
    #[serde(default)]
    text: Option<String>,
    hex: String,
}

fn load() -> (CodebookRegistry, Vec<Vector>) {
    let raw = include_str!("golden/frames.json");
    let file: GoldenFile = serde_json::from_str(raw).expect("golden file parses");
    let mut registry = CodebookRegistry::new();
    for entry in &file.registry {
        registry.register(entry.id, entry.size, &entry.description);
    }
    (registry, file.vectors)
}

fn build(vector: &Vector) -> TokenFrame {
    match &vector.text {
        Some(text) => TokenFrame::text(
            vector.modality,
            vector.sequence,
            vector.timestamp_us,
            text.clone(),
        )
        .unwrap(),
        None => TokenFrame::tokens(
            vector.modality,
            vector.codebook_id,
            vector.sequence,
            vector.timestamp_us,
            vector.tokens.clone(),
        )
        .unwrap(),
    }
}

fn unhex(hex: &str) -> Vec<u8> {
    (0..hex.len())
        .step_by(2)
        .map(|i| u8::from_str_radix(&hex[i..i + 2], 16).unwrap())
        .collect()
}

#[test]
fn every_vector_encodes_to_its_frozen_bytes() {
    let (registry, vectors) = load();
    for vector in &vectors {
        let wire = encode_frame(&build(vector), &registry).unwrap();
        let frozen = unhex(&vector.hex);
        assert_eq!(wire, frozen, "wire bytes changed for {}", vector.name);
    }
}

#[test]
fn every_vector_decodes_back_to_its_frame()  {
    let (registry, vectors) = load();
    for vector in &vectors {
        let decoded = decode_frame(&unhex(&vector.hex), &registry).unwrap();
        assert_eq!(decoded, build(vector), "decode drifted for {}", vector.name);
    }
}

#[test]
fn published_turn_sizes_hold() {
    let (_, vectors) = load();
    let size = |name: &str| {
        vectors
            .iter()
            .find(|v| v.name == name)
            .map(|v| v.hex.len() / 2)
            .unwrap()
    };
    assert_eq!(size("audio_turn_3s"), 205);
    assert_eq!(size("visual_1080p"), 849);
    assert_eq!(size("empty_audio"), HEADER_LEN);
}

#[test]
fn audio_turn_header_matches_the_layout_by_hand() {
    let (_, vectors) = load();
    let vector = vectors.iter().find(|v| v.name == "audio_turn_3s").unwrap();
    let wire = unhex(&vector.hex);
    // version 1 in the high nibble, audio modality 0 in the low.
    assert_eq!(wire[0], 0x10);
    assert_eq!(u16::from_be_bytes([wire[1], wire[2]]), 1);
    assert_eq!(u16::from_be_bytes([wire[3], wire[4]]), 150);
    assert_eq!(u32::from_be_bytes([wire[5], wire[6], wire[7], wire[8]]), 7);
    let ts = u64::from_be_bytes(wire[9..17].try_into().unwrap());
    assert_eq!(ts, 1_723_000_000_000_000);
    // First tokens 11, 48, 85 at 10 bits, MSB first.
    assert_eq!(&wire[17..20], &[0x02, 0xc3, 0x01]);
}
