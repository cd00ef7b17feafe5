//! Snapshot corpora: the on-disk format, a seeded synthetic generator, and
//! the fixed reference capture the latency scenarios use.
//!
//! A corpus file is JSON with a format tag:
//!
//! ```json
//! {
//!   "format": "sema-corpus/v1",
//!   "snapshots": [ { "width": 1920, "height": 1080, "source": "...", "root": { ... } } ]
//! }
//! ```
//!
//! Each `root` is a nested element record: `id`, `role`, `label`, `x`, `y`,
//! `w`, `h`, and optional `actions`, `states`, and `children` arrays.

use std::fs;
use std::io;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::screen::{ScreenSnapshot, SnapshotSource, UiNode};

pub const CORPUS_FORMAT: &str = "sema-corpus/v1";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus io: {0}")]
    Io(#[from] io::Error),
    #[error("corpus parse: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported corpus format {0:?}, expected {CORPUS_FORMAT:?}")]
    BadFormat(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct CorpusFile {
    format: String,
    snapshots: Vec<ScreenSnapshot>,
}

pub fn save_corpus(path: &Path, snapshots: &[ScreenSnapshot]) -> Result<(), CorpusError> {
    let file = CorpusFile {
        format: CORPUS_FORMAT.to_string(),
        snapshots: snapshots.to_vec(),
    };
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

pub fn load_corpus(path: &Path) -> Result<Vec<ScreenSnapshot>, CorpusError> {
    let text = fs::read_to_string(path)?;
    let file: CorpusFile = serde_json::from_str(&text)?;
    if file.format != CORPUS_FORMAT {
        return Err(CorpusError::BadFormat(file.format));
    }
    Ok(file.snapshots)
}

/// Parameters for the synthetic desktop-screen generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub count: usize,
    pub seed: u64,
    pub width: u32,
    pub height: u32,
    /// Element count drawn uniformly from this inclusive range.
    pub min_nodes: usize,
    pub max_nodes: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            count: 100,
            seed: 17,
            width: 1920,
            height: 1080,
            min_nodes: 72,
            max_nodes: 92,
        }
    }
}

const NOUNS: [&str; 24] = [
    "Memo", "Task", "Note", "Plan", "Bill", "File", "Form", "Case", "Deal", "Item", "Page", "Post",
    "Draft", "Order", "Issue", "Quote", "Lead", "Brief", "Claim", "Batch", "Audit", "Offer",
    "Trip", "Goal",
];

const BUTTON_LABELS: [&str; 12] = [
    "Save", "Open", "Close", "Export", "Import", "Delete", "Refresh", "Apply", "Cancel", "Send",
    "Print", "Share",
];

const MENU_LABELS: [&str; 6] = ["File", "Edit", "View", "Insert", "Tools", "Help"];

const FIELD_LABELS: [&str; 8] = ["ID", "Name", "Status", "Due", "Owner", "Tags", "Size", "Type"];

const SECTION_LABELS: [&str; 12] = [
    "Inbox", "Sent", "Drafts", "Trash", "Spam", "Today", "Flags", "Notes", "Team", "Local",
    "Saved", "Pins",
];

/// Generates `spec.count` snapshots. The same spec always yields the same
/// corpus, byte for byte.
pub fn generate_corpus(spec: &CorpusSpec) -> Vec<ScreenSnapshot> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.count)
        .map(|_| {
            let nodes = rng.random_range(spec.min_nodes..=spec.max_nodes);
            generate_snapshot(&mut rng, spec.width, spec.height, nodes)
        })
        .collect()
}

/// Generates one desktop-style snapshot with exactly `node_count` elements.
pub fn generate_snapshot(
    rng: &mut ChaCha8Rng,
    width: u32,
    height: u32,
    node_count: usize,
) -> ScreenSnapshot {
    assert!(node_count >= 8, "a desktop window needs its chrome");
    let mut root = UiNode {
        id: 0,
        role: "window".into(),
        label: format!("{} {}", pick(rng, &NOUNS), pick(rng, &["Manager", "Studio", "Desk"])),
        x: 0,
        y: 0,
        w: width,
        h: height,
        actions: vec![],
        states: vec![],
        children: vec![],
    };
    let mut budget = node_count - 1;

    // Fixed chrome first: menubar, toolbar, status bar.
    let menus = 6.min(budget.saturating_sub(4));
    if menus > 0 {
        let mut bar = container("menubar", 0, 0, width, 28);
        for i in 0..menus {
            let label = MENU_LABELS[i % MENU_LABELS.len()];
            bar.children.push(leaf(
                rng,
                "menu",
                label,
                8 + 56 * i as i32,
                0,
                56,
                28,
                &["click"],
            ));
        }
        budget -= 1 + menus;
        root.children.push(bar);
    }

    let buttons = rng.random_range(4..=6).min(budget.saturating_sub(2));
    if buttons > 0 {
        let mut bar = container("toolbar", 0, 28, width, 40);
        for i in 0..buttons {
            let label = pick(rng, &BUTTON_LABELS);
            bar.children.push(leaf(
                rng,
                "button",
                label,
                12 + 92 * i as i32,
                34,
                84,
                30,
                &["click"],
            ));
        }
        budget -= 1 + buttons;
        root.children.push(bar);
    }

    // Sidebar list of navigable items.
    let side_items = rng.random_range(8..=12).min(budget.saturating_sub(2));
    if side_items > 0 {
        let mut list = container("list", 0, 68, 260, height - 96);
        for i in 0..side_items {
            let label = pick(rng, &SECTION_LABELS);
            list.children.push(leaf(
                rng,
                "listitem",
                label,
                12,
                76 + 26 * i as i32,
                236,
                24,
                &["click"],
            ));
        }
        budget -= 1 + side_items;
        root.children.push(list);
    }

    // Status bar pinned at the bottom.
    if budget >= 4 {
        let mut bar = container("statusbar", 0, height as i32 - 28, width, 28);
        for (i, label) in ["Ready", "Synced", "UTF-8"].iter().enumerate() {
            bar.children.push(leaf(
                rng,
                "label",
                label,
                16 + 120 * i as i32,
                height as i32 - 24,
                96,
                20,
                &[],
            ));
        }
        budget -= 4;
        root.children.push(bar);
    }

    // Content panel soaks up the remaining budget with form rows, wrapping
    // into a new column every 26 rows so nothing runs off the bottom.
    if budget > 0 {
        let mut panel = container("panel", 260, 68, width - 260, height - 96);
        budget -= 1;
        let mut slot: usize = 0;
        while budget > 0 {
            let x0 = 284 + 238 * (slot / 26) as i32;
            let y = 84 + 34 * (slot % 26) as i32;
            let kind = rng.random_range(0..20);
            let field = pick(rng, &FIELD_LABELS);
            let node = match kind {
                0..=10 => leaf(rng, "label", field, x0, y, 110, 22, &[]),
                11..=14 => leaf(rng, "textbox", field, x0, y, 220, 26, &["focus"]),
                15 => leaf(rng, "checkbox", field, x0, y, 20, 20, &["click"]),
                16..=17 => {
                    let label = pick(rng, &BUTTON_LABELS);
                    leaf(rng, "button", label, x0, y, 84, 28, &["click"])
                }
                _ => {
                    let label = pick(rng, &NOUNS);
                    leaf(rng, "link", label, x0, y, 180, 22, &["click"])
                }
            };
            panel.children.push(node);
            budget -= 1;
            slot += 1;
        }
        root.children.push(panel);
    }

    assign_preorder_ids(&mut root);
    debug_assert_eq!(root.node_count(), node_count);
    ScreenSnapshot {
        width,
        height,
        source: SnapshotSource::AccessibilityTree,
        root,
    }
}

fn container(role: &str, x: i32, y: i32, w: u32, h: u32) -> UiNode {
    UiNode {
        id: 0,
        role: role.into(),
        label: String::new(),
        x,
        y,
        w,
        h,
        actions: vec![],
        states: vec![],
        children: vec![],
    }
}

#[allow(clippy::too_many_arguments)]
fn leaf(
    rng: &mut ChaCha8Rng,
    role: &str,
    label: &str,
    x: i32,
    y: i32,
    w: u32,
    h: u32,
    actions: &[&str],
) -> UiNode {
    let states = if rng.random_range(0..100) < 4 {
        vec![pick(rng, &["focused", "disabled"]).to_string()]
    } else {
        vec![]
    };
    UiNode {
        id: 0,
        role: role.into(),
        label: label.into(),
        x,
        y,
        w,
        h,
        actions: actions.iter().map(|s| s.to_string()).collect(),
        states,
        children: vec![],
    }
}

fn pick<'a>(rng: &mut ChaCha8Rng, options: &[&'a str]) -> &'a str {
    options[rng.random_range(0..options.len())]
}

fn assign_preorder_ids(root: &mut UiNode) {
    fn walk(node: &mut UiNode, next: &mut u32) {
        node.id = *next;
        *next += 1;
        for child in &mut node.children {
            walk(child, next);
        }
    }
    let mut next = 0;
    walk(root, &mut next);
}

/// The fixed 1080p capture behind the latency anchors: a mail client whose
/// compact text lands near 2.3 KB, in the middle of the corpus band.
pub fn reference_snapshot() -> ScreenSnapshot {
    let mut root = container("window", 0, 0, 1920, 1080);
    root.label = "Mail Inbox".into();

    let mut menubar = container("menubar", 0, 0, 1920, 28);
    for (i, label) in ["File", "Edit", "View", "Message", "Help"].iter().enumerate() {
        menubar.children.push(plain(
            "menu",
            label,
            8 + 64 * i as i32,
            0,
            56,
            28,
            &["click"],
        ));
    }
    root.children.push(menubar);

    let mut toolbar = container("toolbar", 0, 28, 1920, 44);
    for (i, label) in ["Compose", "Reply", "Forward", "Archive", "Delete", "Search"]
        .iter()
        .enumerate()
    {
        toolbar.children.push(plain(
            "button",
            label,
            12 + 104 * i as i32,
            34,
            96,
            32,
            &["click"],
        ));
    }
    root.children.push(toolbar);

    let mut folders = container("list", 0, 72, 240, 980);
    for (i, label) in [
        "Inbox", "Sent", "Drafts", "Archive", "Spam", "Trash", "Receipts", "Travel", "Team",
        "Newsletters",
    ]
    .iter()
    .enumerate()
    {
        folders.children.push(plain(
            "listitem",
            label,
            12,
            80 + 28 * i as i32,
            216,
            24,
            &["click"],
        ));
    }
    root.children.push(folders);

    let mut messages = container("list", 240, 72, 640, 980);
    for (i, label) in [
        "Quarterly report draft",
        "Invoice 2291 due",
        "Standup notes Friday",
        "Flight itinerary update",
        "Design review follow up",
        "Expense policy change",
        "Welcome to the beta",
        "Password expiry notice",
        "Lunch menu this week",
        "Release 1.4 checklist",
        "Customer escalation 88",
        "Office move reminder",
    ]
    .iter()
    .enumerate()
    {
        messages.children.push(plain(
            "listitem",
            label,
            252,
            80 + 30 * i as i32,
            616,
            26,
            &["click"],
        ));
    }
    root.children.push(messages);

    let mut reading = container("panel", 880, 72, 1040, 980);
    reading.children.push(plain("label", "From: accounts", 904, 96, 320, 22, &[]));
    reading.children.push(plain("label", "Subject: Invoice 2291 due", 904, 124, 480, 22, &[]));
    reading.children.push(plain("label", "Date: Fri 09:12", 904, 152, 240, 22, &[]));
    reading.children.push(plain(
        "statictext",
        "Your invoice is attached and due at the end of the month.",
        904,
        196,
        880,
        22,
        &[],
    ));
    reading.children.push(plain("button", "Pay now", 904, 240, 96, 30, &["click"]));
    reading.children.push(plain("button", "Download", 1016, 240, 104, 30, &["click"]));
    root.children.push(reading);

    let mut statusbar = container("statusbar", 0, 1052, 1920, 28);
    for (i, label) in ["Connected", "12 unread", "Synced 09:14"].iter().enumerate() {
        statusbar.children.push(plain(
            "label",
            label,
            16 + 140 * i as i32,
            1056,
            120,
            20,
            &[],
        ));
    }
    root.children.push(statusbar);

    assign_preorder_ids(&mut root);
    ScreenSnapshot {
        width: 1920,
        height: 1080,
        source: SnapshotSource::AccessibilityTree,
        root,
    }
}

fn plain(role: &str, label: &str, x: i32, y: i32, w: u32, h: u32, actions: &[&str]) -> UiNode {
    UiNode {
        id: 0,
        role: role.into(),
        label: label.into(),
        x,
        y,
        w,
        h,
        actions: actions.iter().map(|s| s.to_string()).collect(),
        states: vec![],
        children: vec![],
    }
}
