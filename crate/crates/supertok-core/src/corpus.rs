//! Language-tagged corpus ingestion.
//!
//! A corpus manifest is a JSON list of `{lang, path, max_lines}` entries.
//! Files are read as UTF-8, `\r\n` is normalized to `\n` at ingestion, one
//! line becomes one [`EvalLine`]. Empty lines are dropped and tallied.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normalize::{normalize, NormalizationForm};

/// One manifest entry.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub lang: String,
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_lines: Option<usize>,
}

/// A list of corpus files, one language code each.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CorpusManifest {
    pub entries: Vec<ManifestEntry>,
}

impl CorpusManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let data = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let manifest: CorpusManifest = serde_json::from_str(&data)?;
        manifest.validate()?;
        Ok(manifest)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for entry in &self.entries {
            if entry.lang.is_empty() {
                return Err(Error::Corpus("manifest entry has an empty language code".into()));
            }
            if !seen.insert(entry.lang.clone()) {
                return Err(Error::Corpus(format!(
                    "duplicate language {:?} in manifest",
                    entry.lang
                )));
            }
        }
        Ok(())
    }

    /// Resolve relative file paths against the manifest's own directory.
    pub fn resolve_relative_to(&mut self, base: impl AsRef<Path>) {
        let base = base.as_ref();
        for entry in &mut self.entries {
            if entry.path.is_relative() {
                entry.path = base.join(&entry.path);
            }
        }
    }
}

/// One corpus line with its language tag. Text is stored raw (CRLF folded);
/// normalization happens per consumer: each model applies its own recorded
/// form at encode time, and word/byte statistics use the corpus-level form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalLine {
    pub lang: String,
    pub text: String,
}

/// Per-language ingestion statistics, computed under the corpus
/// normalization form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LanguageStats {
    pub lang: String,
    pub bytes: u64,
    pub lines: u64,
    pub words: u64,
    pub skipped_empty: u64,
    pub whitespace_only: u64,
}

impl LanguageStats {
    pub fn avg_words_per_line(&self) -> f64 {
        if self.lines == 0 {
            0.0
        } else {
            self.words as f64 / self.lines as f64
        }
    }
}

/// An ingested corpus: tagged lines plus per-language statistics.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub lines: Vec<EvalLine>,
    pub stats: Vec<LanguageStats>,
    /// Form used for the statistics (and later for metric word/byte counts).
    pub stats_normalization: NormalizationForm,
}

impl Corpus {
    /// Languages in manifest order.
    pub fn languages(&self) -> Vec<String> {
        self.stats.iter().map(|s| s.lang.clone()).collect()
    }

    pub fn lines_for<'a>(&'a self, lang: &'a str) -> impl Iterator<Item = &'a EvalLine> + 'a {
        self.lines.iter().filter(move |l| l.lang == lang)
    }

    /// Build a corpus directly from tagged lines; used by tests and the
    /// ablation driver's data-size sweep.
    pub fn from_lines(
        lines: Vec<EvalLine>,
        stats_normalization: NormalizationForm,
    ) -> Corpus {
        let mut order: Vec<String> = Vec::new();
        for line in &lines {
            if !order.contains(&line.lang) {
                order.push(line.lang.clone());
            }
        }
        let stats = order
            .iter()
            .map(|lang| {
                let mut stats = LanguageStats {
                    lang: lang.clone(),
                    bytes: 0,
                    lines: 0,
                    words: 0,
                    skipped_empty: 0,
                    whitespace_only: 0,
                };
                for line in lines.iter().filter(|l| &l.lang == lang) {
                    accumulate_line(&mut stats, &line.text, stats_normalization);
                }
                stats
            })
            .collect();
        Corpus {
            lines,
            stats,
            stats_normalization,
        }
    }
}

fn accumulate_line(stats: &mut LanguageStats, raw: &str, form: NormalizationForm) {
    let normalized = normalize(raw, form);
    let words = normalized.split_whitespace().count() as u64;
    stats.lines += 1;
    stats.bytes += normalized.len() as u64;
    stats.words += words;
    if words == 0 {
        stats.whitespace_only += 1;
    }
}

/// Load every file named by the manifest.
///
/// Errors name the offending file: unreadable paths, invalid UTF-8 (with the
/// byte offset), and duplicate languages are all rejected.
pub fn load_corpus(manifest: &CorpusManifest, form: NormalizationForm) -> Result<Corpus> {
    manifest.validate()?;
    let mut lines = Vec::new();
    let mut all_stats = Vec::new();
    for entry in &manifest.entries {
        let raw = std::fs::read(&entry.path)
            .map_err(|e| Error::io(entry.path.display().to_string(), e))?;
        let text = String::from_utf8(raw).map_err(|e| {
            Error::Corpus(format!(
                "{}: invalid UTF-8 at byte offset {}",
                entry.path.display(),
                e.utf8_error().valid_up_to()
            ))
        })?;
        let text = text.replace("\r\n", "\n");
        let mut stats = LanguageStats {
            lang: entry.lang.clone(),
            bytes: 0,
            lines: 0,
            words: 0,
            skipped_empty: 0,
            whitespace_only: 0,
        };
        let mut kept = 0usize;
        for line in text.split('\n') {
            if line.is_empty() {
                stats.skipped_empty += 1;
                continue;
            }
            if let Some(max) = entry.max_lines {
                if kept >= max {
                    break;
                }
            }
            accumulate_line(&mut stats, line, form);
            lines.push(EvalLine {
                lang: entry.lang.clone(),
                text: line.to_string(),
            });
            kept += 1;
        }
        all_stats.push(stats);
    }
    Ok(Corpus {
        lines,
        stats: all_stats,
        stats_normalization: form,
    })
}
