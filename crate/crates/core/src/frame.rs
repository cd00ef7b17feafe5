//! Token frame wire codec.
//!
//! Every transport unit is a single frame: a fixed 17-byte header followed by
//! either a bit-packed run of codebook indices or raw UTF-8 text.
//!
//! ```text
//! 0               1               2               3
//! +-------+-------+---------------+---------------+---------------+
//! |version|modal. |          codebook_id          |     count     |
//! +-------+-------+---------------+---------------+---------------+
//! |     count     |                   sequence                    |
//! +---------------+-----------------------------------------------+
//! |   seq (cont)  |                 timestamp_us                  |
//! +---------------+                                               |
//! |                        timestamp_us (cont)                    |
//! +---------------------------------------------------------------+
//! |                         payload ...                           |
//! ```
//!
//! Byte 0 carries the protocol version in the high nibble and the modality
//! tag in the low nibble. All multi-byte fields are big-endian. `count` is
//! the number of packed indices for token modalities and the payload byte
//! length for text modalities.
//!
//! Token payloads pack each index MSB-first at a fixed width of
//! `ceil(log2(codebook_size))` bits; the final byte is zero-padded. Text
//! payloads are the raw bytes of the string.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Serialized header length in bytes.
pub const HEADER_LEN: usize = 17;

/// Protocol version emitted by this implementation.
pub const PROTOCOL_VERSION: u8 = 1;

/// Payload kind carried by a frame, stored in the low nibble of byte 0.
///
/// Five of the sixteen nibble values are assigned; the rest are reserved and
/// rejected on decode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    AudioTokens = 0,
    VisualTokens = 1,
    StructuredText = 2,
    ActionCommand = 3,
    TtsTokens = 4,
}

impl Modality {
    pub const ALL: [Modality; 5] = [
        Modality::AudioTokens,
        Modality::VisualTokens,
        Modality::StructuredText,
        Modality::ActionCommand,
        Modality::TtsTokens,
    ];

    pub fn from_nibble(nibble: u8) -> Result<Self, FrameError> {
        match nibble {
            0 => Ok(Modality::AudioTokens),
            1 => Ok(Modality::VisualTokens),
            2 => Ok(Modality::StructuredText),
            3 => Ok(Modality::ActionCommand),
            4 => Ok(Modality::TtsTokens),
            other => Err(FrameError::UnknownModality(other)),
        }
    }

    pub fn nibble(self) -> u8 {
        self as u8
    }

    /// True for modalities whose payload is a packed index run rather than text.
    pub fn carries_tokens(self) -> bool {
        matches!(
            self,
            Modality::AudioTokens | Modality::VisualTokens | Modality::TtsTokens
        )
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrameError {
    #[error("unknown modality nibble {0:#x}")]
    UnknownModality(u8),
    #[error("codebook {0} is not registered")]
    UnknownCodebook(u16),
    #[error("token {token} out of range for codebook of size {size}")]
    TokenOutOfRange { token: u32, size: u32 },
    #[error("count {0} exceeds the 16-bit field")]
    CountOverflow(usize),
    #[error("frame truncated: need {needed} bytes, have {got}")]
    Truncated { needed: usize, got: usize },
    #[error("{got} bytes after a {expected}-byte frame")]
    TrailingBytes { expected: usize, got: usize },
    #[error("version {0} does not fit the 4-bit field")]
    VersionOverflow(u8),
    #[error("text payload is not valid UTF-8")]
    InvalidText,
}

/// Fixed-size frame header. See the module docs for the byte layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrameHeader {
    pub version: u8,
    pub modality: Modality,
    pub codebook_id: u16,
    /// Token count for token modalities, payload byte length for text.
    pub count: u16,
    pub sequence: u32,
    pub timestamp_us: u64,
}

impl FrameHeader {
    pub fn to_bytes(&self) -> Result<[u8; HEADER_LEN], FrameError> {
        if self.version > 0xf {
            return Err(FrameError::VersionOverflow(self.version));
        }
        let mut buf = [0u8; HEADER_LEN];
        buf[0] = (self.version << 4) | self.modality.nibble();
        buf[1..3].copy_from_slice(&self.codebook_id.to_be_bytes());
        buf[3..5].copy_from_slice(&self.count.to_be_bytes());
        buf[5..9].copy_from_slice(&self.sequence.to_be_bytes());
        buf[9..17].copy_from_slice(&self.timestamp_us.to_be_bytes());
        Ok(buf)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, FrameError> {
        if bytes.len() < HEADER_LEN {
            return Err(FrameError::Truncated {
                needed: HEADER_LEN,
                got: bytes.len(),
            });
        }
        Ok(FrameHeader {
            version: bytes[0] >> 4,
            modality: Modality::from_nibble(bytes[0] & 0xf)?,
            codebook_id: u16::from_be_bytes([bytes[1], bytes[2]]),
            count: u16::from_be_bytes([bytes[3], bytes[4]]),
            sequence: u32::from_be_bytes([bytes[5], bytes[6], bytes[7], bytes[8]]),
            timestamp_us: u64::from_be_bytes([
                bytes[9], bytes[10], bytes[11], bytes[12], bytes[13], bytes[14], bytes[15],
                bytes[16],
            ]),
        })
    }
}

/// Frame body: packed indices for token modalities, text otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Payload {
    Tokens(Vec<u32>),
    Text(String),
}

impl Payload {
    pub fn len(&self) -> usize {
        match self {
            Payload::Tokens(t) => t.len(),
            Payload::Text(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A decoded frame: header plus payload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenFrame {
    pub header: FrameHeader,
    pub payload: Payload,
}

impl TokenFrame {
    /// Builds a token-modality frame, filling in `count` from the payload.
    pub fn tokens(
        modality: Modality,
        codebook_id: u16,
        sequence: u32,
        timestamp_us: u64,
        tokens: Vec<u32>,
    ) -> Result<Self, FrameError> {
        if tokens.len() > u16::MAX as usize {
            return Err(FrameError::CountOverflow(tokens.len()));
        }
        Ok(TokenFrame {
            header: FrameHeader {
                version: PROTOCOL_VERSION,
                modality,
                codebook_id,
                count: tokens.len() as u16,
                sequence,
                timestamp_us,
            },
            payload: Payload::Tokens(tokens),
        })
    }

    /// Builds a text-modality frame, filling in `count` from the byte length.
    pub fn text(
        modality: Modality,
        sequence: u32,
        timestamp_us: u64,
        text: String,
    ) -> Result<Self, FrameError> {
        if text.len() > u16::MAX as usize {
            return Err(FrameError::CountOverflow(text.len()));
        }
        Ok(TokenFrame {
            header: FrameHeader {
                version: PROTOCOL_VERSION,
                modality,
                codebook_id: 0,
                count: text.len() as u16,
                sequence,
                timestamp_us,
            },
            payload: Payload::Text(text),
        })
    }

    /// Total serialized size: header plus payload bytes.
    pub fn wire_len(&self, registry: &CodebookRegistry) -> Result<usize, FrameError> {
        Ok(HEADER_LEN + self.payload_len(registry)?)
    }

    fn payload_len(&self, registry: &CodebookRegistry) -> Result<usize, FrameError> {
        match &self.payload {
            Payload::Tokens(t) => {
                let size = registry.size_of(self.header.codebook_id)?;
                Ok(payload_bytes(t.len(), size))
            }
            Payload::Text(s) => Ok(s.len()),
        }
    }
}

/// One registered codebook: how many entries it has and what it encodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Codebook {
    pub size: u32,
    pub description: String,
}

/// Maps codebook ids to their sizes so both ends agree on index width.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodebookRegistry {
    entries: BTreeMap<u16, Codebook>,
}

/// Codebook id used for speech tokens in the stock registry.
pub const AUDIO_CODEBOOK: u16 = 1;
/// Codebook id used for visual patch tokens in the stock registry.
pub const VISUAL_CODEBOOK: u16 = 2;
/// Codebook id used for synthesized speech tokens in the stock registry.
pub const TTS_CODEBOOK: u16 = 3;

impl CodebookRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry used throughout the simulations: 1024-entry speech and TTS
    /// codebooks and an 8192-entry visual codebook.
    pub fn simulation_defaults() -> Self {
        let mut reg = Self::new();
        reg.register(AUDIO_CODEBOOK, 1024, "speech tokens, 50/s");
        reg.register(VISUAL_CODEBOOK, 8192, "visual patch tokens, 256/tile");
        reg.register(TTS_CODEBOOK, 1024, "synthesized speech tokens, 50/s");
        reg
    }

    /// Adds or replaces an entry. Sizes below 2 are meaningless and panic.
    pub fn register(&mut self, id: u16, size: u32, description: &str) {
        assert!(size >= 2, "codebook size must be at least 2");
        self.entries.insert(
            id,
            Codebook {
                size,
                description: description.to_string(),
            },
        );
    }

    pub fn get(&self, id: u16) -> Option<&Codebook> {
        self.entries.get(&id)
    }

    pub fn size_of(&self, id: u16) -> Result<u32, FrameError> {
        self.get(id)
            .map(|c| c.size)
            .ok_or(FrameError::UnknownCodebook(id))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&u16, &Codebook)> {
        self.entries.iter()
    }
}

/// Bits needed to address `codebook_size` entries: `ceil(log2(size))`.
pub fn bits_per_token(codebook_size: u32) -> u32 {
    assert!(codebook_size >= 2, "codebook size must be at least 2");
    u32::BITS - (codebook_size - 1).leading_zeros()
}

/// Packed payload size in bytes for `count` indices drawn from a codebook
/// of `codebook_size` entries: `ceil(count * bits_per_token / 8)`.
pub fn payload_bytes(count: usize, codebook_size: u32) -> usize {
    let bits = count * bits_per_token(codebook_size) as usize;
    bits.div_ceil(8)
}

/// Serializes a frame. Token payloads are validated against the registry.
pub fn encode_frame(frame: &TokenFrame, registry: &CodebookRegistry) -> Result<Vec<u8>, FrameError> {
    let header = &frame.header;
    match &frame.payload {
        Payload::Tokens(tokens) => {
            if !header.modality.carries_tokens() {
                // A text modality cannot carry a packed payload.
                return Err(FrameError::UnknownModality(header.modality.nibble()));
            }
            if tokens.len() != header.count as usize {
                return Err(FrameError::CountOverflow(tokens.len()));
            }
            let size = registry.size_of(header.codebook_id)?;
            let bits = bits_per_token(size);
            let mut out = Vec::with_capacity(HEADER_LEN + payload_bytes(tokens.len(), size));
            out.extend_from_slice(&header.to_bytes()?);
            let mut writer = BitWriter::new(&mut out);
            for &token in tokens {
                if token >= size {
                    return Err(FrameError::TokenOutOfRange { token, size });
                }
                writer.write(token, bits);
            }
            writer.finish();
            Ok(out)
        }
        Payload::Text(text) => {
            if header.modality.carries_tokens() {
                return Err(FrameError::UnknownModality(header.modality.nibble()));
            }
            if text.len() != header.count as usize {
                return Err(FrameError::CountOverflow(text.len()));
            }
            let mut out = Vec::with_capacity(HEADER_LEN + text.len());
            out.extend_from_slice(&header.to_bytes()?);
            out.extend_from_slice(text.as_bytes());
            Ok(out)
        }
    }
}

/// Parses one complete frame. The slice must hold exactly the frame: short
/// input fails with `Truncated`, extra bytes fail with `TrailingBytes`.
pub fn decode_frame(bytes: &[u8], registry: &CodebookRegistry) -> Result<TokenFrame, FrameError> {
    let header = FrameHeader::from_bytes(bytes)?;
    let body = &bytes[HEADER_LEN..];
    let (payload, expect) = if header.modality.carries_tokens() {
        let size = registry.size_of(header.codebook_id)?;
        let expect = payload_bytes(header.count as usize, size);
        if body.len() < expect {
            return Err(FrameError::Truncated {
                needed: HEADER_LEN + expect,
                got: bytes.len(),
            });
        }
        let bits = bits_per_token(size);
        let mut reader = BitReader::new(&body[..expect]);
        let mut tokens = Vec::with_capacity(header.count as usize);
        for _ in 0..header.count {
            let token = reader.read(bits);
            if token >= size {
                return Err(FrameError::TokenOutOfRange { token, size });
            }
            tokens.push(token);
        }
        (Payload::Tokens(tokens), expect)
    } else {
        let expect = header.count as usize;
        if body.len() < expect {
            return Err(FrameError::Truncated {
                needed: HEADER_LEN + expect,
                got: bytes.len(),
            });
        }
        let text = std::str::from_utf8(&body[..expect]).map_err(|_| FrameError::InvalidText)?;
        (Payload::Text(text.to_string()), expect)
    };
    if body.len() > expect {
        return Err(FrameError::TrailingBytes {
            expected: HEADER_LEN + expect,
            got: bytes.len() - HEADER_LEN - expect,
        });
    }
    Ok(TokenFrame { header, payload })
}

/// Appends values MSB-first at a fixed bit width, zero-padding the last byte.
struct BitWriter<'a> {
    out: &'a mut Vec<u8>,
    acc: u64,
    acc_bits: u32,
}

impl<'a> BitWriter<'a> {
    fn new(out: &'a mut Vec<u8>) -> Self {
        BitWriter {
            out,
            acc: 0,
            acc_bits: 0,
        }
    }

    fn write(&mut self, value: u32, bits: u32) {
        debug_assert!(bits <= 32 && (bits == 32 || u64::from(value) < (1u64 << bits)));
        self.acc = (self.acc << bits) | u64::from(value);
        self.acc_bits += bits;
        while self.acc_bits >= 8 {
            self.acc_bits -= 8;
            self.out.push((self.acc >> self.acc_bits) as u8);
        }
    }

    fn finish(self) {
        if self.acc_bits > 0 {
            self.out.push((self.acc << (8 - self.acc_bits)) as u8);
        }
    }
}

/// Reads fixed-width values back out of an MSB-first packed buffer.
struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    acc: u64,
    acc_bits: u32,
}

impl<'a> BitReader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        BitReader {
            bytes,
            pos: 0,
            acc: 0,
            acc_bits: 0,
        }
    }

    fn read(&mut self, bits: u32) -> u32 {
        while self.acc_bits < bits {
            let byte = self.bytes.get(self.pos).copied().unwrap_or(0);
            self.pos += 1;
            self.acc = (self.acc << 8) | u64::from(byte);
            self.acc_bits += 8;
        }
        self.acc_bits -= bits;
        let value = (self.acc >> self.acc_bits) & ((1u64 << bits) - 1);
        value as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn registry() -> CodebookRegistry {
        CodebookRegistry::simulation_defaults()
    }

    #[test]
    fn header_is_17_bytes_in_declared_layout() {
        let header = FrameHeader {
            version: 1,
            modality: Modality::AudioTokens,
            codebook_id: 0x0102,
            count: 0x0304,
            sequence: 0x05060708,
            timestamp_us: 0x090a0b0c0d0e0f10,
        };
        let bytes = header.to_bytes().unwrap();
        assert_eq!(bytes.len(), HEADER_LEN);
        assert_eq!(
            bytes,
            [
                0x10, // version 1, modality 0
                0x01, 0x02, // codebook id
                0x03, 0x04, // count
                0x05, 0x06, 0x07, 0x08, // sequence
                0x09, 0x0a, 0x0b, 0x0c, 0x0d, 0x0e, 0x0f, 0x10, // timestamp
            ]
        );
        assert_eq!(FrameHeader::from_bytes(&bytes).unwrap(), header);
    }

    #[test]
    fn bits_per_token_matches_ceil_log2() {
        for (size, bits) in [
            (2u32, 1u32),
            (3, 2),
            (4, 2),
            (5, 3),
            (1000, 10),
            (1024, 10),
            (1025, 11),
            (8192, 13),
            (65536, 16),
        ] {
            assert_eq!(bits_per_token(size), bits, "size {size}");
        }
    }

    #[test]
    fn payload_sizes_for_standard_batches() {
        // 3 s of speech at 50 tokens/s, 10-bit indices.
        assert_eq!(payload_bytes(150, 1024), 188);
        // Two 256-token tiles of 13-bit visual indices.
        assert_eq!(payload_bytes(512, 8192), 832);
        // 1 s of speech.
        assert_eq!(payload_bytes(50, 1024), 63);
        assert_eq!(payload_bytes(0, 1024), 0);
    }

    #[test]
    fn serialized_sizes_include_header() {
        let reg = registry();
        let audio = TokenFrame::tokens(Modality::AudioTokens, AUDIO_CODEBOOK, 0, 0, vec![0; 150])
            .unwrap();
        assert_eq!(encode_frame(&audio, &reg).unwrap().len(), 205);
        assert_eq!(audio.wire_len(&reg).unwrap(), 205);

        let visual =
            TokenFrame::tokens(Modality::VisualTokens, VISUAL_CODEBOOK, 0, 0, vec![0; 512])
                .unwrap();
        assert_eq!(encode_frame(&visual, &reg).unwrap().len(), 849);
    }

    #[test]
    fn packing_is_msb_first_with_zero_pad() {
        let mut reg = CodebookRegistry::new();
        reg.register(7, 1024, "test");
        let frame = TokenFrame::tokens(Modality::AudioTokens, 7, 0, 0, vec![1, 2, 3]).unwrap();
        let bytes = encode_frame(&frame, &reg).unwrap();
        // 0000000001 0000000010 0000000011 -> 00000000 01000000 00100000 00001100
        assert_eq!(&bytes[HEADER_LEN..], &[0x00, 0x40, 0x20, 0x0c]);
    }

    #[test]
    fn round_trip_preserves_tokens_and_header() {
        let reg = registry();
        let frame = TokenFrame::tokens(
            Modality::VisualTokens,
            VISUAL_CODEBOOK,
            42,
            1_700_000_000_000_000,
            vec![0, 1, 4095, 8191, 513],
        )
        .unwrap();
        let bytes = encode_frame(&frame, &reg).unwrap();
        assert_eq!(decode_frame(&bytes, &reg).unwrap(), frame);
    }

    #[test]
    fn round_trip_preserves_text() {
        let reg = registry();
        let frame = TokenFrame::text(
            Modality::StructuredText,
            7,
            123,
            "[e0] window \"Main\" @0,0 1920x1080 []".to_string(),
        )
        .unwrap();
        let bytes = encode_frame(&frame, &reg).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN + frame.payload.len());
        assert_eq!(decode_frame(&bytes, &reg).unwrap(), frame);
    }

    #[test]
    fn zero_count_frame_is_header_only() {
        let reg = registry();
        let frame = TokenFrame::tokens(Modality::TtsTokens, TTS_CODEBOOK, 9, 9, vec![]).unwrap();
        let bytes = encode_frame(&frame, &reg).unwrap();
        assert_eq!(bytes.len(), HEADER_LEN);
        assert_eq!(decode_frame(&bytes, &reg).unwrap(), frame);
    }

    #[test]
    fn exactly_five_modality_nibbles_are_assigned() {
        let defined: Vec<u8> = (0u8..16)
            .filter(|&n| Modality::from_nibble(n).is_ok())
            .collect();
        assert_eq!(defined, vec![0, 1, 2, 3, 4]);
        for nibble in 5u8..16 {
            assert_eq!(
                Modality::from_nibble(nibble),
                Err(FrameError::UnknownModality(nibble))
            );
        }
    }

    #[test]
    fn token_out_of_range_is_rejected_on_encode() {
        let reg = registry();
        let frame =
            TokenFrame::tokens(Modality::AudioTokens, AUDIO_CODEBOOK, 0, 0, vec![1024]).unwrap();
        assert_eq!(
            encode_frame(&frame, &reg),
            Err(FrameError::TokenOutOfRange {
                token: 1024,
                size: 1024
            })
        );
    }

    #[test]
    fn unknown_codebook_is_rejected_both_ways() {
        let reg = registry();
        let frame = TokenFrame::tokens(Modality::AudioTokens, 99, 0, 0, vec![1]).unwrap();
        assert_eq!(encode_frame(&frame, &reg), Err(FrameError::UnknownCodebook(99)));

        let mut other = CodebookRegistry::new();
        other.register(99, 1024, "only here");
        let bytes = encode_frame(&frame, &other).unwrap();
        assert_eq!(decode_frame(&bytes, &reg), Err(FrameError::UnknownCodebook(99)));
    }

    #[test]
    fn truncated_input_is_rejected() {
        let reg = registry();
        let frame =
            TokenFrame::tokens(Modality::AudioTokens, AUDIO_CODEBOOK, 3, 4, vec![5, 6, 7]).unwrap();
        let bytes = encode_frame(&frame, &reg).unwrap();
        for cut in [0, 1, 16, 17, bytes.len() - 1] {
            match decode_frame(&bytes[..cut], &reg) {
                Err(FrameError::Truncated { .. }) => {}
                other => panic!("cut {cut}: expected Truncated, got {other:?}"),
            }
        }
    }

    #[test]
    fn trailing_bytes_are_rejected() {
        let reg = registry();
        let frame =
            TokenFrame::tokens(Modality::AudioTokens, AUDIO_CODEBOOK, 3, 4, vec![5, 6, 7]).unwrap();
        let mut bytes = encode_frame(&frame, &reg).unwrap();
        bytes.push(0xff);
        assert_eq!(
            decode_frame(&bytes, &reg),
            Err(FrameError::TrailingBytes {
                expected: HEADER_LEN + 4,
                got: 1
            })
        );
    }

    #[test]
    fn unknown_modality_nibble_is_rejected_on_decode() {
        let reg = registry();
        let frame =
            TokenFrame::tokens(Modality::AudioTokens, AUDIO_CODEBOOK, 0, 0, vec![]).unwrap();
        let mut bytes = encode_frame(&frame, &reg).unwrap();
        bytes[0] = 0x1f; // version 1, reserved nibble 15
        assert_eq!(decode_frame(&bytes, &reg), Err(FrameError::UnknownModality(15)));
    }

    #[test]
    fn oversized_text_overflows_count() {
        let text = "x".repeat(70_000);
        assert_eq!(
            TokenFrame::text(Modality::StructuredText, 0, 0, text),
            Err(FrameError::CountOverflow(70_000))
        );
    }

    #[test]
    fn adding_eight_tokens_adds_exactly_bits_per_token_bytes() {
        for size in [1024u32, 8192, 97] {
            let bits = bits_per_token(size) as usize;
            for count in [0usize, 1, 7, 150, 511] {
                assert_eq!(payload_bytes(count + 8, size), payload_bytes(count, size) + bits);
            }
        }
    }

    #[test]
    fn token_rate_times_width_gives_wire_bitrate() {
        // 50 tokens/s at 10 bits apiece is a 500 bit/s stream before headers.
        assert_eq!(50 * bits_per_token(1024), 500);
    }
}
