//! Applying a model to text (encode) and inverting it (decode).
//!
//! Encoding normalizes with the model's recorded form, splits into sentences,
//! pre-tokenizes each sentence, seeds every byte as a single-byte token, and
//! then applies merge rules in global rank order. A subword rule only fires
//! where both operands lie inside the same pre-token; a superword rule fires
//! anywhere inside the sentence. Unknown byte sequences simply remain as
//! single-byte fallback tokens, so any input is encodable.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{MergeStage, TokenizerModel};
use crate::normalize::{normalize, NormalizationForm};
use crate::pretokenize::{pretokenize, split_sentences};

/// The result of encoding: token ids plus the byte length of the text they
/// represent (after normalization). Decoding reproduces exactly that many
/// bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSequence {
    pub ids: Vec<u32>,
    pub source_byte_len: usize,
}

/// Options for [`encode_with_options`]. A normalization override that
/// differs from the model's recorded form is refused unless `force` is set,
/// since mixing forms silently corrupts comparisons.
#[derive(Debug, Clone, Default)]
pub struct EncodeOptions {
    pub normalization_override: Option<NormalizationForm>,
    pub force: bool,
}

#[derive(Clone, Copy)]
struct RuleInfo {
    rank: u32,
    result: u32,
    stage: MergeStage,
}

/// Reusable encoder holding the model's pair-lookup table.
pub struct Encoder<'m> {
    model: &'m TokenizerModel,
    rules: HashMap<(u32, u32), RuleInfo>,
}

impl<'m> Encoder<'m> {
    pub fn new(model: &'m TokenizerModel) -> Self {
        let rules = model
            .merges()
            .iter()
            .map(|r| {
                (
                    (r.left, r.right),
                    RuleInfo {
                        rank: r.rank,
                        result: r.result,
                        stage: r.stage,
                    },
                )
            })
            .collect();
        Self { model, rules }
    }

    pub fn model(&self) -> &TokenizerModel {
        self.model
    }

    pub fn encode(&self, text: &str) -> TokenSequence {
        let normalized = normalize(text, self.model.normalization());
        let mut ids = Vec::new();
        for sentence in split_sentences(&normalized, self.model.delims()) {
            self.encode_sentence_into(sentence.text, &mut ids);
        }
        TokenSequence {
            ids,
            source_byte_len: normalized.len(),
        }
    }

    pub fn encode_with_options(&self, text: &str, opts: &EncodeOptions) -> Result<TokenSequence> {
        if let Some(form) = opts.normalization_override {
            if form != self.model.normalization() && !opts.force {
                return Err(Error::InvalidConfig(format!(
                    "normalization override {form} does not match the model's recorded form {} \
                     (pass force to proceed)",
                    self.model.normalization()
                )));
            }
            let normalized = normalize(text, form);
            let mut ids = Vec::new();
            for sentence in split_sentences(&normalized, self.model.delims()) {
                self.encode_sentence_into(sentence.text, &mut ids);
            }
            return Ok(TokenSequence {
                ids,
                source_byte_len: normalized.len(),
            });
        }
        Ok(self.encode(text))
    }

    /// Encode bytes that may not be valid UTF-8. Valid input goes through the
    /// normal pipeline; invalid input falls back to one token per byte.
    pub fn encode_raw(&self, bytes: &[u8]) -> TokenSequence {
        match std::str::from_utf8(bytes) {
            Ok(text) => self.encode(text),
            Err(_) => TokenSequence {
                ids: bytes.iter().map(|&b| b as u32).collect(),
                source_byte_len: bytes.len(),
            },
        }
    }

    /// Encode one pre-split sentence, without normalization or sentence
    /// splitting. The trainer uses this to re-encode the corpus at the
    /// stage-2 transition with exactly the encoder's semantics.
    pub(crate) fn encode_sentence_into(&self, sentence: &str, out: &mut Vec<u32>) {
        // Seed one single-byte token per input byte, tagging each with the
        // index of the pre-token it came from.
        let mut ids: Vec<u32> = Vec::with_capacity(sentence.len());
        let mut pt_lo: Vec<u32> = Vec::with_capacity(sentence.len());
        let mut pt_hi: Vec<u32> = Vec::with_capacity(sentence.len());
        for (pt_index, pt) in pretokenize(sentence, self.model.pattern()).iter().enumerate() {
            for &b in pt.text.as_bytes() {
                ids.push(b as u32);
                pt_lo.push(pt_index as u32);
                pt_hi.push(pt_index as u32);
            }
        }

        loop {
            // Lowest-rank applicable pair anywhere in the sentence, leftmost
            // occurrence on rank ties.
            let mut best: Option<(usize, RuleInfo)> = None;
            for i in 0..ids.len().saturating_sub(1) {
                let Some(info) = self.rules.get(&(ids[i], ids[i + 1])) else {
                    continue;
                };
                let applicable = match info.stage {
                    MergeStage::Superword => true,
                    MergeStage::Subword => {
                        pt_lo[i] == pt_hi[i]
                            && pt_lo[i + 1] == pt_hi[i + 1]
                            && pt_lo[i] == pt_lo[i + 1]
                    }
                };
                if applicable && best.is_none_or(|(_, b)| info.rank < b.rank) {
                    best = Some((i, *info));
                }
            }
            let Some((i, info)) = best else { break };
            ids[i] = info.result;
            ids.remove(i + 1);
            pt_hi[i] = pt_hi[i + 1];
            pt_lo.remove(i + 1);
            pt_hi.remove(i + 1);
        }
        out.extend_from_slice(&ids);
    }
}

/// Encode text with a fresh single-use encoder. Build an [`Encoder`] when
/// encoding many lines against the same model.
pub fn encode(model: &TokenizerModel, text: &str) -> TokenSequence {
    Encoder::new(model).encode(text)
}

pub fn encode_with_options(
    model: &TokenizerModel,
    text: &str,
    opts: &EncodeOptions,
) -> Result<TokenSequence> {
    Encoder::new(model).encode_with_options(text, opts)
}

pub fn encode_raw(model: &TokenizerModel, bytes: &[u8]) -> TokenSequence {
    Encoder::new(model).encode_raw(bytes)
}

/// Decode ids to the raw byte string. Byte fallback can legitimately split
/// codepoints across tokens, so bytes are the ground truth; use
/// [`decode_utf8`] for the strict view.
pub fn decode(model: &TokenizerModel, ids: &[u32]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for (position, &id) in ids.iter().enumerate() {
        let bytes = model.vocab().bytes(id).ok_or(Error::TokenIdOutOfRange {
            id,
            vocab_size: model.vocab_size(),
            position,
        })?;
        out.extend_from_slice(bytes);
    }
    Ok(out)
}

/// Decode and require the result to be valid UTF-8.
pub fn decode_utf8(model: &TokenizerModel, ids: &[u32]) -> Result<String> {
    let bytes = decode(model, ids)?;
    String::from_utf8(bytes).map_err(|e| Error::InvalidUtf8 {
        offset: e.utf8_error().valid_up_to(),
    })
}
