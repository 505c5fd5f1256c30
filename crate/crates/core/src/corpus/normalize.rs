//! Text normalization behind record identity.
//!
//! `normalize` = NFC, trim, collapse whitespace runs to one space, then
//! simple (one-to-one, locale-free) Unicode case folding.

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

/// Identity of a record for conflict detection and deduplication.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalKey {
    pub norm_query: String,
    pub norm_target: String,
}

impl CanonicalKey {
    pub fn new(query: &str, target: &str) -> Self {
        CanonicalKey {
            norm_query: normalize(query),
            norm_target: normalize(target),
        }
    }

    /// Key whose target is an opaque identifier compared byte-for-byte.
    pub fn with_opaque_target(query: &str, target: &str) -> Self {
        CanonicalKey {
            norm_query: normalize(query),
            norm_target: target.to_string(),
        }
    }
}

pub fn normalize(text: &str) -> String {
    let composed: String = text.nfc().collect();
    let mut collapsed = String::with_capacity(composed.len());
    for word in composed.split_whitespace() {
        if !collapsed.is_empty() {
            collapsed.push(' ');
        }
        collapsed.extend(word.chars().map(simple_fold));
    }
    if collapsed.is_ascii() {
        return collapsed;
    }
    // Folding can expose new canonical compositions.
    collapsed.nfc().collect()
}

/// Simple case folding of a single character.
///
/// Uses the single-character lowercase mapping where one exists, plus the
/// characters whose simple fold differs from their lowercase form.
pub fn simple_fold(c: char) -> char {
    if c.is_ascii() {
        return c.to_ascii_lowercase();
    }
    match c as u32 {
        0x00B5 => return '\u{03BC}',
        0x017F => return 's',
        0x0345 | 0x1FBE => return '\u{03B9}',
        0x03C2 => return '\u{03C3}',
        0x03D0 => return '\u{03B2}',
        0x03D1 => return '\u{03B8}',
        0x03D5 => return '\u{03C6}',
        0x03D6 => return '\u{03C0}',
        0x03F0 => return '\u{03BA}',
        0x03F1 => return '\u{03C1}',
        0x03F5 => return '\u{03B5}',
        0x1E9B => return '\u{1E61}',
        0x1C80 => return '\u{0432}',
        0x1C81 => return '\u{0434}',
        0x1C82 => return '\u{043E}',
        0x1C83 => return '\u{0441}',
        0x1C84 | 0x1C85 => return '\u{0442}',
        0x1C86 => return '\u{044A}',
        0x1C87 => return '\u{0463}',
        0x1C88 => return '\u{A64B}',
        0x1FD3 => return '\u{0390}',
        0x1FE3 => return '\u{03B0}',
        0xFB05 => return '\u{FB06}',
        // Cherokee folds to the uppercase block.
        0x13A0..=0x13F5 => return c,
        cp @ 0x13F8..=0x13FD => return char::from_u32(cp - 8).unwrap_or(c),
        cp @ 0xAB70..=0xABBF => return char::from_u32(cp - 0xAB70 + 0x13A0).unwrap_or(c),
        _ => {}
    }
    let mut lower = c.to_lowercase();
    match (lower.next(), lower.next()) {
        (Some(l), None) => l,
        _ => c,
    }
}
