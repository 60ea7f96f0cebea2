//! Pre-tokenization: segmenting normalized text into word-level units and
//! into sentences.
//!
//! Pre-tokens are the units inside which subword merges are confined;
//! sentences are the barriers that cross-word merges may never span. Both
//! segmentations are lossless: concatenating the produced pieces in order
//! reproduces the input byte for byte.
//!
//! The rule sets below are the normative definitions for this project (see
//! also the README):
//!
//! * `Whitespace` — `\s*\S+|\s+`: every non-whitespace run takes its leading
//!   whitespace run with it; trailing whitespace forms its own unit.
//! * `Gpt2Style` — the published GPT-2 pattern
//!   `'s|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+`.
//!   Letter runs exclude combining marks, so scripts that write vowels as
//!   marks fragment at every mark.
//! * `ScriptAgnostic` —
//!   ` ?[\p{L}\p{M}]+| ?\p{N}{1,3}| ?[^\s\p{L}\p{M}\p{N}]+|\s+(?!\S)|\s+`:
//!   (a) an optional single leading space binds to the unit, (b) maximal runs
//!   of letters plus combining marks (which covers viramas and nuktas) form
//!   one unit regardless of script, (c) digit runs are grouped in blocks of
//!   at most three, (d) each punctuation run is its own unit.
//! * `BoundlessStyle` — a GPT-4-flavored pattern used by the one-stage
//!   training mode:
//!   `'(?i:[sdmt]|ll|ve|re)|[^\r\n\p{L}\p{N}]?\p{L}+|\p{N}{1,3}| ?[^\s\p{L}\p{N}]+[\r\n]*|\s*[\r\n]|\s+(?!\S)|\s+`.

use std::sync::OnceLock;

use fancy_regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pre-tokenization rule set. Segmentation is deterministic given
/// `(text, variant)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PreTokenPattern {
    Whitespace,
    Gpt2Style,
    ScriptAgnostic,
    BoundlessStyle,
}

impl PreTokenPattern {
    pub fn as_str(&self) -> &'static str {
        match self {
            PreTokenPattern::Whitespace => "whitespace",
            PreTokenPattern::Gpt2Style => "gpt2_style",
            PreTokenPattern::ScriptAgnostic => "script_agnostic",
            PreTokenPattern::BoundlessStyle => "boundless_style",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "whitespace" => Ok(PreTokenPattern::Whitespace),
            "gpt2_style" | "gpt2" => Ok(PreTokenPattern::Gpt2Style),
            "script_agnostic" | "script" => Ok(PreTokenPattern::ScriptAgnostic),
            "boundless_style" | "boundless" => Ok(PreTokenPattern::BoundlessStyle),
            other => Err(Error::InvalidConfig(format!(
                "unknown pre-tokenization pattern {other:?} \
                 (expected whitespace, gpt2_style, script_agnostic or boundless_style)"
            ))),
        }
    }

    fn regex(&self) -> &'static Regex {
        static WHITESPACE: OnceLock<Regex> = OnceLock::new();
        static GPT2: OnceLock<Regex> = OnceLock::new();
        static SCRIPT: OnceLock<Regex> = OnceLock::new();
        static BOUNDLESS: OnceLock<Regex> = OnceLock::new();
        let (cell, pattern): (&OnceLock<Regex>, &str) = match self {
            PreTokenPattern::Whitespace => (&WHITESPACE, r"\s*\S+|\s+"),
            PreTokenPattern::Gpt2Style => (
                &GPT2,
                r"'s|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+",
            ),
            PreTokenPattern::ScriptAgnostic => (
                &SCRIPT,
                r" ?[\p{L}\p{M}]+| ?\p{N}{1,3}| ?[^\s\p{L}\p{M}\p{N}]+|\s+(?!\S)|\s+",
            ),
            PreTokenPattern::BoundlessStyle => (
                &BOUNDLESS,
                r"'(?i:[sdmt]|ll|ve|re)|[^\r\n\p{L}\p{N}]?\p{L}+|\p{N}{1,3}| ?[^\s\p{L}\p{N}]+[\r\n]*|\s*[\r\n]|\s+(?!\S)|\s+",
            ),
        };
        cell.get_or_init(|| Regex::new(pattern).expect("pre-tokenization pattern must compile"))
    }
}

impl std::fmt::Display for PreTokenPattern {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One pre-token: a contiguous byte slice of the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreToken<'a> {
    pub text: &'a str,
    pub byte_start: usize,
    pub byte_end: usize,
}

/// Segment normalized text into pre-tokens.
///
/// The output is a lossless partition: slices are contiguous, non-overlapping
/// and cover the whole input. Empty input yields an empty list.
pub fn pretokenize<'a>(text: &'a str, pattern: PreTokenPattern) -> Vec<PreToken<'a>> {
    let mut out = Vec::new();
    let mut cursor = 0usize;
    for m in pattern.regex().find_iter(text) {
        let m = m.expect("pre-tokenization regex cannot fail on valid UTF-8");
        debug_assert_eq!(m.start(), cursor, "pre-tokenization left a gap");
        out.push(PreToken {
            text: m.as_str(),
            byte_start: m.start(),
            byte_end: m.end(),
        });
        cursor = m.end();
    }
    debug_assert_eq!(cursor, text.len(), "pre-tokenization did not cover the input");
    out
}

/// The set of codepoints that terminate a sentence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceDelimiterSet {
    delimiters: Vec<char>,
}

impl SentenceDelimiterSet {
    /// `.`, `!`, `?`, newline, the Devanagari danda and double danda, the
    /// Arabic full stop and question mark (Urdu, Sindhi, Kashmiri), and the
    /// Ol Chiki mucaad and double mucaad (Santali).
    pub const DEFAULT_DELIMITERS: [char; 10] = [
        '.', '!', '?', '\n', '\u{0964}', '\u{0965}', '\u{06D4}', '\u{061F}', '\u{1C7E}',
        '\u{1C7F}',
    ];

    pub fn new(delimiters: impl IntoIterator<Item = char>) -> Result<Self> {
        let mut delimiters: Vec<char> = delimiters.into_iter().collect();
        delimiters.sort_unstable();
        delimiters.dedup();
        if delimiters.is_empty() {
            return Err(Error::InvalidConfig(
                "sentence delimiter set must be non-empty".into(),
            ));
        }
        Ok(Self { delimiters })
    }

    pub fn contains(&self, c: char) -> bool {
        self.delimiters.binary_search(&c).is_ok()
    }

    pub fn chars(&self) -> &[char] {
        &self.delimiters
    }

    /// True when the byte string contains any delimiter codepoint. UTF-8 is
    /// self-synchronizing, so a byte-level needle search is exact.
    pub fn intersects_bytes(&self, bytes: &[u8]) -> bool {
        let mut buf = [0u8; 4];
        self.delimiters.iter().any(|&c| {
            let needle = c.encode_utf8(&mut buf).as_bytes();
            bytes.windows(needle.len()).any(|w| w == needle)
        })
    }

    /// Render as `U+XXXX` codes, the form used in model files and on the CLI.
    pub fn to_codepoint_strings(&self) -> Vec<String> {
        self.delimiters
            .iter()
            .map(|c| format!("U+{:04X}", *c as u32))
            .collect()
    }

    /// Parse a list of `U+XXXX` codes (case-insensitive, `U+` optional).
    pub fn from_codepoint_strings<S: AsRef<str>>(codes: &[S]) -> Result<Self> {
        let mut delims = Vec::with_capacity(codes.len());
        for code in codes {
            let raw = code.as_ref().trim();
            let hex = raw
                .strip_prefix("U+")
                .or_else(|| raw.strip_prefix("u+"))
                .unwrap_or(raw);
            let value = u32::from_str_radix(hex, 16).map_err(|_| {
                Error::InvalidConfig(format!("invalid codepoint {raw:?} (expected U+XXXX)"))
            })?;
            let c = char::from_u32(value).ok_or_else(|| {
                Error::InvalidConfig(format!("U+{value:04X} is not a valid codepoint"))
            })?;
            delims.push(c);
        }
        SentenceDelimiterSet::new(delims)
    }
}

impl Default for SentenceDelimiterSet {
    fn default() -> Self {
        SentenceDelimiterSet::new(Self::DEFAULT_DELIMITERS).expect("default set is non-empty")
    }
}

/// One sentence segment with its byte offsets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence<'a> {
    pub text: &'a str,
    pub byte_start: usize,
    pub byte_end: usize,
}

/// Split text into sentence segments. Each delimiter ends its segment;
/// whitespace after a delimiter begins the next segment. Lossless partition.
pub fn split_sentences<'a>(text: &'a str, delims: &SentenceDelimiterSet) -> Vec<Sentence<'a>> {
    let mut out = Vec::new();
    let mut start = 0usize;
    for (idx, c) in text.char_indices() {
        if delims.contains(c) {
            let end = idx + c.len_utf8();
            out.push(Sentence {
                text: &text[start..end],
                byte_start: start,
                byte_end: end,
            });
            start = end;
        }
    }
    if start < text.len() {
        out.push(Sentence {
            text: &text[start..],
            byte_start: start,
            byte_end: text.len(),
        });
    }
    out
}
