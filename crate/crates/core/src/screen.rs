//! Screen capture representation: element trees, their compact text
//! serialization, tiling of the pixel fallback, and assembly of the hybrid
//! text-plus-tokens payload.
//!
//! The compact text form writes one line per element in pre-order:
//!
//! ```text
//! [e<id>] <role> "<label>" @<x>,<y> <w>x<h> [<action>,...]
//! ```
//!
//! with an optional trailing `[<state>,...]` group when the element carries
//! state flags. Labels escape `"` and `\` with a backslash and newlines as
//! `\n`, so every line is one element and the format survives a round trip
//! through any label text.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{
    CodebookRegistry, FrameError, Modality, TokenFrame, HEADER_LEN, VISUAL_CODEBOOK,
};

/// One element in a captured UI tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UiNode {
    pub id: u32,
    pub role: String,
    #[serde(default)]
    pub label: String,
    pub x: i32,
    pub y: i32,
    pub w: u32,
    pub h: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub actions: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub states: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<UiNode>,
}

impl UiNode {
    /// Number of nodes in this subtree, the root included.
    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(UiNode::node_count).sum::<usize>()
    }
}

/// Where a snapshot's element data came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotSource {
    AccessibilityTree,
    Ocr,
}

/// A captured screen: pixel dimensions plus the element tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScreenSnapshot {
    pub width: u32,
    pub height: u32,
    pub source: SnapshotSource,
    pub root: UiNode,
}

/// A parsed compact-text record. Parsing flattens the tree; nesting is not
/// recovered, matching what the compact form carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatNode {
    pub id: u32,
    pub role: String,
    pub label: String,
    pub x: i32,
    pub y: i32,
    pub w: u32,
    pub h: u32,
    pub actions: Vec<String>,
    pub states: Vec<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScreenError {
    #[error("line {line}: {reason}")]
    MalformedLine { line: usize, reason: String },
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Serializes a tree to compact text, one line per node in pre-order.
/// Every line ends with a newline.
pub fn encode_compact_text(root: &UiNode) -> String {
    let mut out = String::new();
    write_node(root, &mut out);
    out
}

fn write_node(node: &UiNode, out: &mut String) {
    out.push_str("[e");
    out.push_str(&node.id.to_string());
    out.push_str("] ");
    out.push_str(&node.role);
    out.push_str(" \"");
    push_escaped(&node.label, out);
    out.push_str("\" @");
    out.push_str(&node.x.to_string());
    out.push(',');
    out.push_str(&node.y.to_string());
    out.push(' ');
    out.push_str(&node.w.to_string());
    out.push('x');
    out.push_str(&node.h.to_string());
    out.push_str(" [");
    out.push_str(&node.actions.join(","));
    out.push(']');
    if !node.states.is_empty() {
        out.push_str(" [");
        out.push_str(&node.states.join(","));
        out.push(']');
    }
    out.push('\n');
    for child in &node.children {
        write_node(child, out);
    }
}

fn push_escaped(label: &str, out: &mut String) {
    for ch in label.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            other => out.push(other),
        }
    }
}

/// Parses compact text back into flat records, one per line.
pub fn parse_compact_text(text: &str) -> Result<Vec<FlatNode>, ScreenError> {
    let mut nodes = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        nodes.push(parse_line(line).map_err(|reason| ScreenError::MalformedLine {
            line: idx + 1,
            reason,
        })?);
    }
    Ok(nodes)
}

fn parse_line(line: &str) -> Result<FlatNode, String> {
    let rest = line.strip_prefix("[e").ok_or("expected \"[e<id>]\"")?;
    let (id_str, rest) = rest.split_once(']').ok_or("unterminated element id")?;
    let id: u32 = id_str.parse().map_err(|_| format!("bad element id {id_str:?}"))?;
    let rest = rest.strip_prefix(' ').ok_or("expected space after id")?;

    let (role, rest) = rest.split_once(' ').ok_or("expected role token")?;
    if role.is_empty() {
        return Err("empty role".into());
    }

    let rest = rest.strip_prefix('"').ok_or("expected quoted label")?;
    let (label, rest) = take_quoted(rest)?;

    let rest = rest.strip_prefix(" @").ok_or("expected \" @<x>,<y>\"")?;
    let (x_str, rest) = rest.split_once(',').ok_or("expected \",\" in position")?;
    let x: i32 = x_str.parse().map_err(|_| format!("bad x {x_str:?}"))?;
    let (y_str, rest) = rest.split_once(' ').ok_or("expected size after position")?;
    let y: i32 = y_str.parse().map_err(|_| format!("bad y {y_str:?}"))?;

    let (w_str, rest) = rest.split_once('x').ok_or("expected \"<w>x<h>\"")?;
    let w: u32 = w_str.parse().map_err(|_| format!("bad width {w_str:?}"))?;
    let (h_str, rest) = rest.split_once(' ').ok_or("expected actions after size")?;
    let h: u32 = h_str.parse().map_err(|_| format!("bad height {h_str:?}"))?;

    let (actions, rest) = take_bracketed(rest)?;
    let states = match rest {
        "" => Vec::new(),
        r => {
            let r = r.strip_prefix(' ').ok_or("expected space before states")?;
            let (states, tail) = take_bracketed(r)?;
            if !tail.is_empty() {
                return Err(format!("trailing content {tail:?}"));
            }
            states
        }
    };

    Ok(FlatNode {
        id,
        role: role.to_string(),
        label,
        x,
        y,
        w,
        h,
        actions,
        states,
    })
}

/// Reads an escaped label up to its closing quote, returning the unescaped
/// text and the remainder after the quote.
fn take_quoted(s: &str) -> Result<(String, &str), String> {
    let mut label = String::new();
    let mut chars = s.char_indices();
    while let Some((idx, ch)) = chars.next() {
        match ch {
            '"' => return Ok((label, &s[idx + 1..])),
            '\\' => match chars.next() {
                Some((_, '"')) => label.push('"'),
                Some((_, '\\')) => label.push('\\'),
                Some((_, 'n')) => label.push('\n'),
                Some((_, other)) => return Err(format!("bad escape \\{other}")),
                None => return Err("dangling backslash".into()),
            },
            other => label.push(other),
        }
    }
    Err("unterminated label".into())
}

fn take_bracketed(s: &str) -> Result<(Vec<String>, &str), String> {
    let s = s.strip_prefix('[').ok_or("expected \"[\"")?;
    let (body, rest) = s.split_once(']').ok_or("unterminated bracket group")?;
    let items = if body.is_empty() {
        Vec::new()
    } else {
        body.split(',').map(str::to_string).collect()
    };
    Ok((items, rest))
}

/// Flattens a tree in pre-order to the records its compact text encodes.
pub fn flatten(root: &UiNode) -> Vec<FlatNode> {
    let mut out = Vec::with_capacity(root.node_count());
    flatten_into(root, &mut out);
    out
}

fn flatten_into(node: &UiNode, out: &mut Vec<FlatNode>) {
    out.push(FlatNode {
        id: node.id,
        role: node.role.clone(),
        label: node.label.clone(),
        x: node.x,
        y: node.y,
        w: node.w,
        h: node.h,
        actions: node.actions.clone(),
        states: node.states.clone(),
    });
    for child in &node.children {
        flatten_into(child, out);
    }
}

/// Tiling knobs: the patch grid the visual tokenizer works at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TilingConfig {
    pub tile_size: u32,
    pub tokens_per_tile: u32,
}

impl Default for TilingConfig {
    fn default() -> Self {
        TilingConfig {
            tile_size: 1024,
            tokens_per_tile: 256,
        }
    }
}

/// How a capture maps onto tokenizer tiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TilingPlan {
    pub tile_size: u32,
    pub tokens_per_tile: u32,
    /// Resize factor applied before tiling, 1.0 when no downscale is needed.
    pub scale: f64,
    pub tile_count: u32,
}

impl TilingPlan {
    pub fn token_count(&self) -> usize {
        self.tile_count as usize * self.tokens_per_tile as usize
    }
}

/// Plans the tile grid for a capture: the shorter side is resized down to
/// the tile size when it exceeds it, then the longer side is covered with
/// `ceil` tiles.
pub fn plan_tiling(width: u32, height: u32, cfg: &TilingConfig) -> TilingPlan {
    assert!(width > 0 && height > 0, "degenerate capture dimensions");
    let short = width.min(height) as f64;
    let long = width.max(height) as f64;
    let tile = cfg.tile_size as f64;
    let scale = if short > tile { tile / short } else { 1.0 };
    let tile_count = ((scale * long) / tile).ceil() as u32;
    TilingPlan {
        tile_size: cfg.tile_size,
        tokens_per_tile: cfg.tokens_per_tile,
        scale,
        tile_count: tile_count.max(1),
    }
}

/// Knobs for snapshots whose text stream comes from OCR rather than an
/// accessibility tree. OCR output is modeled as an opaque payload of a
/// configured size, not produced by running recognition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcrConfig {
    pub payload_bytes: usize,
}

impl Default for OcrConfig {
    fn default() -> Self {
        OcrConfig {
            payload_bytes: 2000,
        }
    }
}

/// The two frames a hybrid screen update ships: structured text plus visual
/// tokens, with their serialized sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct HybridPayload {
    pub text_frame: TokenFrame,
    pub visual_frame: TokenFrame,
    /// Serialized size of the text frame, header included.
    pub text_wire_bytes: usize,
    /// Serialized size of the visual frame, header included.
    pub visual_wire_bytes: usize,
    /// Serialized size of the whole update.
    pub total_bytes: usize,
}

impl HybridPayload {
    /// Payload bytes with framing overhead excluded.
    pub fn payload_bytes(&self) -> usize {
        self.total_bytes - 2 * HEADER_LEN
    }
}

/// Builds the hybrid update for a snapshot: the element tree as compact
/// text (or a modeled OCR payload) plus one placeholder token per visual
/// patch.
pub fn assemble_hybrid(
    snapshot: &ScreenSnapshot,
    plan: &TilingPlan,
    registry: &CodebookRegistry,
    ocr: &OcrConfig,
) -> Result<HybridPayload, ScreenError> {
    let text = match snapshot.source {
        SnapshotSource::AccessibilityTree => encode_compact_text(&snapshot.root),
        SnapshotSource::Ocr => ocr_placeholder(ocr.payload_bytes),
    };
    let text_frame = TokenFrame::text(Modality::StructuredText, 0, 0, text)?;

    let visual_size = registry.size_of(VISUAL_CODEBOOK)?;
    let tokens: Vec<u32> = (0..plan.token_count())
        .map(|i| i as u32 % visual_size)
        .collect();
    let visual_frame = TokenFrame::tokens(Modality::VisualTokens, VISUAL_CODEBOOK, 0, 0, tokens)?;

    let text_wire_bytes = text_frame.wire_len(registry)?;
    let visual_wire_bytes = visual_frame.wire_len(registry)?;
    Ok(HybridPayload {
        text_frame,
        visual_frame,
        text_wire_bytes,
        visual_wire_bytes,
        total_bytes: text_wire_bytes + visual_wire_bytes,
    })
}

/// Serialized size of a visual-tokens-only update for a capture.
pub fn static_wire_bytes(
    plan: &TilingPlan,
    registry: &CodebookRegistry,
) -> Result<usize, ScreenError> {
    let size = registry.size_of(VISUAL_CODEBOOK)?;
    Ok(HEADER_LEN + crate::frame::payload_bytes(plan.token_count(), size))
}

fn ocr_placeholder(bytes: usize) -> String {
    // Stand-in transcript content; only its length matters to the models.
    let filler = "ocr line transcript text \n";
    let mut out = String::with_capacity(bytes + filler.len());
    while out.len() < bytes {
        out.push_str(filler);
    }
    out.truncate(bytes);
    out
}
