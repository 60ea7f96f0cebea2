//! The four intrinsic metrics over tokenized lines.
//!
//! Aggregates are micro-averages: ratios of summed counts over lines, not
//! means of per-line ratios. A macro (mean-of-ratios) fertility variant is
//! provided behind an explicit function for comparison.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Per-line counts feeding the aggregates. `word_count` is the number of
/// Unicode-whitespace-delimited words after normalization; `byte_count` is
/// the UTF-8 byte length of the (normalized) line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LineStats {
    pub token_count: u64,
    pub word_count: u64,
    pub byte_count: u64,
}

/// Token occurrence counts over a corpus encoding.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TokenHistogram {
    counts: HashMap<u32, u64>,
    total: u64,
}

impl TokenHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_ids<'a>(ids: impl IntoIterator<Item = &'a u32>) -> Self {
        let mut hist = Self::new();
        for &id in ids {
            hist.add(id, 1);
        }
        hist
    }

    pub fn add(&mut self, id: u32, count: u64) {
        if count == 0 {
            return;
        }
        *self.counts.entry(id).or_default() += count;
        self.total += count;
    }

    pub fn merge(&mut self, other: &TokenHistogram) {
        for (&id, &count) in &other.counts {
            self.add(id, count);
        }
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Probabilities of the observed tokens (zero-count ids never appear).
    fn probabilities(&self) -> impl Iterator<Item = f64> + '_ {
        let total = self.total as f64;
        self.counts.values().map(move |&c| c as f64 / total)
    }
}

/// Micro-average fertility: total tokens per total words over lines with at
/// least one word. Lines with `word_count == 0` are excluded.
pub fn fertility(stats: &[LineStats]) -> Result<f64> {
    let mut tokens = 0u64;
    let mut words = 0u64;
    for line in stats {
        if line.word_count == 0 {
            continue;
        }
        tokens += line.token_count;
        words += line.word_count;
    }
    if words == 0 {
        return Err(Error::Metric("no words".into()));
    }
    Ok(tokens as f64 / words as f64)
}

/// Macro-average fertility: mean of per-line token/word ratios. Kept for
/// comparison with the micro default.
pub fn fertility_macro(stats: &[LineStats]) -> Result<f64> {
    let mut sum = 0.0;
    let mut lines = 0u64;
    for line in stats {
        if line.word_count == 0 {
            continue;
        }
        sum += line.token_count as f64 / line.word_count as f64;
        lines += 1;
    }
    if lines == 0 {
        return Err(Error::Metric("no words".into()));
    }
    Ok(sum / lines as f64)
}

/// Normalized sequence length: total tokens of the model over total tokens
/// of the base model on the same lines.
pub fn nsl(model_stats: &[LineStats], base_stats: &[LineStats]) -> Result<f64> {
    if model_stats.len() != base_stats.len() {
        return Err(Error::Metric(format!(
            "line sets differ: {} vs {} lines",
            model_stats.len(),
            base_stats.len()
        )));
    }
    let model_total: u64 = model_stats.iter().map(|l| l.token_count).sum();
    let base_total: u64 = base_stats.iter().map(|l| l.token_count).sum();
    if base_total == 0 {
        return Err(Error::Metric("base model produced zero tokens".into()));
    }
    Ok(model_total as f64 / base_total as f64)
}

/// Average raw text bytes per token.
pub fn bytes_per_token(stats: &[LineStats]) -> Result<f64> {
    let bytes: u64 = stats.iter().map(|l| l.byte_count).sum();
    let tokens: u64 = stats.iter().map(|l| l.token_count).sum();
    if tokens == 0 {
        return Err(Error::Metric("zero tokens".into()));
    }
    Ok(bytes as f64 / tokens as f64)
}

/// Rényi entropy of order `alpha` in bits. `alpha == 1` is Shannon entropy;
/// zero-count ids are excluded by construction.
pub fn renyi_entropy(hist: &TokenHistogram, alpha: f64) -> Result<f64> {
    if hist.is_empty() {
        return Err(Error::Metric("empty histogram".into()));
    }
    if alpha.is_nan() || alpha.is_infinite() || alpha <= 0.0 {
        return Err(Error::Metric(format!("alpha {alpha} must be positive")));
    }
    if (alpha - 1.0).abs() < f64::EPSILON {
        let h = -hist
            .probabilities()
            .map(|p| p * p.log2())
            .sum::<f64>();
        // -0.0 from a single-token histogram normalizes to 0.0
        return Ok(h + 0.0);
    }
    let sum: f64 = hist.probabilities().map(|p| p.powf(alpha)).sum();
    Ok(sum.log2() / (1.0 - alpha))
}

/// Rényi efficiency: entropy normalized by `log2(vocab_size)`.
pub fn renyi_efficiency(hist: &TokenHistogram, alpha: f64, vocab_size: u32) -> Result<f64> {
    if vocab_size < 2 {
        return Err(Error::Metric(format!(
            "vocab size {vocab_size} must be at least 2"
        )));
    }
    Ok(renyi_entropy(hist, alpha)? / (vocab_size as f64).log2())
}
