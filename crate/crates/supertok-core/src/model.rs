//! The tokenizer model: vocabulary, ordered merge rules, and the versioned
//! JSON file format.
//!
//! Id layout: ids 0–255 are the single-byte fallback tokens, followed by
//! special tokens, then dummy tokens, then learned tokens in merge-rank
//! order. Dummy tokens map to private-use-area codepoints (U+E000 upward) so
//! they can never occur in real text.

use std::collections::HashMap;
use std::path::Path;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::normalize::NormalizationForm;
use crate::pretokenize::{PreTokenPattern, SentenceDelimiterSet};

/// Current model file format version.
pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Which training phase a merge rule belongs to. Subword rules apply within
/// pre-token boundaries at encode time; superword rules apply anywhere within
/// a sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MergeStage {
    Subword,
    Superword,
}

impl MergeStage {
    pub fn as_str(&self) -> &'static str {
        match self {
            MergeStage::Subword => "subword",
            MergeStage::Superword => "superword",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        match s {
            "subword" => Ok(MergeStage::Subword),
            "superword" => Ok(MergeStage::Superword),
            other => Err(Error::InvalidModel(format!("unknown merge stage {other:?}"))),
        }
    }
}

/// One learned merge: `left` followed by `right` becomes `result`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MergeRule {
    pub left: u32,
    pub right: u32,
    pub result: u32,
    pub rank: u32,
    pub stage: MergeStage,
}

/// Dense id ↔ byte-string table with the fixed layout described above.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    id_to_bytes: Vec<Vec<u8>>,
    bytes_to_id: HashMap<Vec<u8>, u32>,
    n_special: u32,
    n_dummy: u32,
}

impl Vocabulary {
    fn new(special_tokens: &[String], n_dummy: u32) -> Result<Self> {
        let mut id_to_bytes: Vec<Vec<u8>> = (0u8..=255).map(|b| vec![b]).collect();
        let mut bytes_to_id: HashMap<Vec<u8>, u32> =
            id_to_bytes.iter().enumerate().map(|(i, b)| (b.clone(), i as u32)).collect();
        for tok in special_tokens {
            if tok.is_empty() {
                return Err(Error::InvalidConfig("special token must be non-empty".into()));
            }
            let bytes = tok.as_bytes().to_vec();
            let id = id_to_bytes.len() as u32;
            if bytes_to_id.insert(bytes.clone(), id).is_some() {
                return Err(Error::InvalidConfig(format!(
                    "special token {tok:?} collides with an existing token"
                )));
            }
            id_to_bytes.push(bytes);
        }
        if n_dummy > 6400 {
            return Err(Error::InvalidConfig(
                "at most 6400 dummy tokens fit in the private use area".into(),
            ));
        }
        for i in 0..n_dummy {
            let c = char::from_u32(0xE000 + i).expect("PUA codepoint");
            let bytes = c.to_string().into_bytes();
            let id = id_to_bytes.len() as u32;
            if bytes_to_id.insert(bytes.clone(), id).is_some() {
                return Err(Error::InvalidConfig(
                    "dummy token collides with an existing token".into(),
                ));
            }
            id_to_bytes.push(bytes);
        }
        Ok(Self {
            id_to_bytes,
            bytes_to_id,
            n_special: special_tokens.len() as u32,
            n_dummy,
        })
    }

    pub fn bytes(&self, id: u32) -> Option<&[u8]> {
        self.id_to_bytes.get(id as usize).map(|v| v.as_slice())
    }

    pub fn id_of(&self, bytes: &[u8]) -> Option<u32> {
        self.bytes_to_id.get(bytes).copied()
    }

    pub fn contains_bytes(&self, bytes: &[u8]) -> bool {
        self.bytes_to_id.contains_key(bytes)
    }

    /// Total number of tokens.
    pub fn len(&self) -> u32 {
        self.id_to_bytes.len() as u32
    }

    pub fn is_empty(&self) -> bool {
        false // 256 byte tokens are always present
    }

    /// First learned token id: 256 + specials + dummies.
    pub fn learned_start(&self) -> u32 {
        256 + self.n_special + self.n_dummy
    }

    pub fn n_special(&self) -> u32 {
        self.n_special
    }

    pub fn n_dummy(&self) -> u32 {
        self.n_dummy
    }

    pub fn n_learned(&self) -> u32 {
        self.len() - self.learned_start()
    }

    pub fn is_byte(&self, id: u32) -> bool {
        id < 256
    }

    pub fn is_special(&self, id: u32) -> bool {
        (256..256 + self.n_special).contains(&id)
    }

    pub fn is_dummy(&self, id: u32) -> bool {
        (256 + self.n_special..self.learned_start()).contains(&id)
    }

    pub fn is_learned(&self, id: u32) -> bool {
        id >= self.learned_start() && id < self.len()
    }

    /// Learned tokens in id order.
    pub fn iter_learned(&self) -> impl Iterator<Item = (u32, &[u8])> {
        let start = self.learned_start();
        self.id_to_bytes[start as usize..]
            .iter()
            .enumerate()
            .map(move |(i, b)| (start + i as u32, b.as_slice()))
    }

    fn push_learned(&mut self, bytes: Vec<u8>) -> Result<u32> {
        let id = self.id_to_bytes.len() as u32;
        if self.bytes_to_id.insert(bytes.clone(), id).is_some() {
            return Err(Error::InvalidModel(format!(
                "duplicate token byte string {:?}",
                escape_bytes(&bytes)
            )));
        }
        self.id_to_bytes.push(bytes);
        Ok(id)
    }
}

/// Training provenance carried inside the model file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ModelMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requested_vocab_size: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transition_point: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_pair_frequency: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// A self-contained tokenizer: configuration snapshot, vocabulary and the
/// ordered merge list. Serialization roundtrips bit-exactly.
#[derive(Debug, Clone)]
pub struct TokenizerModel {
    normalization: NormalizationForm,
    pattern: PreTokenPattern,
    delims: SentenceDelimiterSet,
    special_tokens: Vec<String>,
    vocab: Vocabulary,
    merges: Vec<MergeRule>,
    metadata: ModelMetadata,
}

impl TokenizerModel {
    pub fn normalization(&self) -> NormalizationForm {
        self.normalization
    }

    pub fn pattern(&self) -> PreTokenPattern {
        self.pattern
    }

    pub fn delims(&self) -> &SentenceDelimiterSet {
        &self.delims
    }

    pub fn special_tokens(&self) -> &[String] {
        &self.special_tokens
    }

    pub fn dummy_token_ids(&self) -> Vec<u32> {
        let first = 256 + self.vocab.n_special();
        (first..self.vocab.learned_start()).collect()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn merges(&self) -> &[MergeRule] {
        &self.merges
    }

    pub fn vocab_size(&self) -> u32 {
        self.vocab.len()
    }

    pub fn metadata(&self) -> &ModelMetadata {
        &self.metadata
    }

    pub fn metadata_mut(&mut self) -> &mut ModelMetadata {
        &mut self.metadata
    }

    /// A copy of this model keeping only the first `k` merge rules.
    pub fn with_merge_prefix(&self, k: usize) -> TokenizerModel {
        let k = k.min(self.merges.len());
        let mut builder = ModelBuilder::new(
            self.normalization,
            self.pattern,
            self.delims.clone(),
            self.special_tokens.clone(),
            self.vocab.n_dummy(),
        )
        .expect("source model layout is valid");
        for rule in &self.merges[..k] {
            builder
                .push_rule(rule.left, rule.right, rule.stage)
                .expect("prefix of a valid merge list is valid");
        }
        builder.finish(self.metadata.clone())
    }

    /// Canonical JSON serialization. Deterministic: the same model always
    /// produces identical bytes.
    pub fn to_json_string(&self) -> String {
        let mut vocab = IndexMap::with_capacity(self.vocab.len() as usize);
        for id in 0..self.vocab.len() {
            let bytes = self.vocab.bytes(id).expect("dense ids");
            vocab.insert(id.to_string(), escape_bytes(bytes));
        }
        let file = ModelFile {
            version: MODEL_FORMAT_VERSION,
            normalization: self.normalization.as_str().to_string(),
            pattern: self.pattern.as_str().to_string(),
            sentence_delims: self.delims.to_codepoint_strings(),
            special_tokens: self.special_tokens.clone(),
            dummy_token_ids: self.dummy_token_ids(),
            vocab,
            merges: self
                .merges
                .iter()
                .map(|r| (r.left, r.right, r.stage.as_str().to_string()))
                .collect(),
            metadata: self.metadata.clone(),
        };
        let mut out = serde_json::to_string_pretty(&file).expect("model serialization");
        out.push('\n');
        out
    }

    /// Parse and validate a model file.
    pub fn from_json_str(data: &str) -> Result<TokenizerModel> {
        let file: ModelFile = serde_json::from_str(data)?;
        if file.version != MODEL_FORMAT_VERSION {
            return Err(Error::InvalidModel(format!(
                "unsupported model format version {} (expected {MODEL_FORMAT_VERSION})",
                file.version
            )));
        }
        let normalization = NormalizationForm::parse(&file.normalization)
            .map_err(|e| Error::InvalidModel(e.to_string()))?;
        let pattern = PreTokenPattern::parse(&file.pattern)
            .map_err(|e| Error::InvalidModel(e.to_string()))?;
        let delims = SentenceDelimiterSet::from_codepoint_strings(&file.sentence_delims)
            .map_err(|e| Error::InvalidModel(e.to_string()))?;
        let n_dummy = file.dummy_token_ids.len() as u32;
        let mut builder = ModelBuilder::new(
            normalization,
            pattern,
            delims,
            file.special_tokens.clone(),
            n_dummy,
        )
        .map_err(|e| Error::InvalidModel(e.to_string()))?;
        let expected_dummy_ids: Vec<u32> = (256 + builder.vocab.n_special()
            ..builder.vocab.learned_start())
            .collect();
        if file.dummy_token_ids != expected_dummy_ids {
            return Err(Error::InvalidModel(
                "dummy_token_ids do not match the fixed id layout".into(),
            ));
        }
        for (left, right, stage) in &file.merges {
            let stage = MergeStage::parse(stage)?;
            builder.push_rule(*left, *right, stage)?;
        }
        let model = builder.finish(file.metadata);

        // The vocab table in the file is redundant with the merge list;
        // require exact agreement so corrupt files cannot load.
        if file.vocab.len() as u32 != model.vocab.len() {
            return Err(Error::InvalidModel(format!(
                "vocab table has {} entries but merges imply {}",
                file.vocab.len(),
                model.vocab.len()
            )));
        }
        for (key, escaped) in &file.vocab {
            let id: u32 = key
                .parse()
                .map_err(|_| Error::InvalidModel(format!("non-numeric vocab id {key:?}")))?;
            let expected = model
                .vocab
                .bytes(id)
                .ok_or_else(|| Error::InvalidModel(format!("vocab id {id} out of range")))?;
            let actual = unescape_bytes(escaped)?;
            if actual != expected {
                return Err(Error::InvalidModel(format!(
                    "vocab entry {id} is {:?} but merges imply {:?}",
                    escaped,
                    escape_bytes(expected)
                )));
            }
        }
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json_string())
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<TokenizerModel> {
        let path = path.as_ref();
        let data = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        TokenizerModel::from_json_str(&data)
    }

    /// SHA-256 of the canonical serialization; binds embedding matrices to
    /// the exact model they were built for.
    pub fn fingerprint(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(self.to_json_string().as_bytes());
        hasher.finalize().into()
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    normalization: String,
    pattern: String,
    sentence_delims: Vec<String>,
    special_tokens: Vec<String>,
    dummy_token_ids: Vec<u32>,
    vocab: IndexMap<String, String>,
    merges: Vec<(u32, u32, String)>,
    metadata: ModelMetadata,
}

/// Incrementally assembles a valid model. All learned tokens enter through
/// [`ModelBuilder::push_rule`], which enforces operand resolvability, the
/// no-duplicate invariant, and the superword delimiter ban.
pub struct ModelBuilder {
    normalization: NormalizationForm,
    pattern: PreTokenPattern,
    delims: SentenceDelimiterSet,
    special_tokens: Vec<String>,
    vocab: Vocabulary,
    merges: Vec<MergeRule>,
}

impl ModelBuilder {
    pub fn new(
        normalization: NormalizationForm,
        pattern: PreTokenPattern,
        delims: SentenceDelimiterSet,
        special_tokens: Vec<String>,
        n_dummy: u32,
    ) -> Result<Self> {
        let vocab = Vocabulary::new(&special_tokens, n_dummy)?;
        Ok(Self {
            normalization,
            pattern,
            delims,
            special_tokens,
            vocab,
            merges: Vec::new(),
        })
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn delims(&self) -> &SentenceDelimiterSet {
        &self.delims
    }

    pub fn merges(&self) -> &[MergeRule] {
        &self.merges
    }

    /// Byte string the rule `(left, right)` would produce.
    pub fn concat_bytes(&self, left: u32, right: u32) -> Option<Vec<u8>> {
        let mut out = self.vocab.bytes(left)?.to_vec();
        out.extend_from_slice(self.vocab.bytes(right)?);
        Some(out)
    }

    /// Append a merge rule, returning the new token id.
    pub fn push_rule(&mut self, left: u32, right: u32, stage: MergeStage) -> Result<u32> {
        let size = self.vocab.len();
        for operand in [left, right] {
            if operand >= size {
                return Err(Error::InvalidModel(format!(
                    "merge rule operand {operand} not yet defined (vocab size {size})"
                )));
            }
        }
        let bytes = self.concat_bytes(left, right).expect("operands checked");
        if stage == MergeStage::Superword && self.delims.intersects_bytes(&bytes) {
            return Err(Error::InvalidModel(format!(
                "superword rule would contain a sentence delimiter: {:?}",
                escape_bytes(&bytes)
            )));
        }
        let rank = self.merges.len() as u32;
        let result = self.vocab.push_learned(bytes)?;
        self.merges.push(MergeRule {
            left,
            right,
            result,
            rank,
            stage,
        });
        Ok(result)
    }

    pub fn finish(self, metadata: ModelMetadata) -> TokenizerModel {
        TokenizerModel {
            normalization: self.normalization,
            pattern: self.pattern,
            delims: self.delims,
            special_tokens: self.special_tokens,
            vocab: self.vocab,
            merges: self.merges,
            metadata,
        }
    }
}

/// Escape a token byte string for the model file: bytes outside printable
/// ASCII, plus the backslash itself, become `\xNN`.
pub fn escape_bytes(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len());
    for &b in bytes {
        if (0x20..=0x7E).contains(&b) && b != b'\\' {
            out.push(b as char);
        } else {
            out.push_str(&format!("\\x{b:02x}"));
        }
    }
    out
}

/// Inverse of [`escape_bytes`].
pub fn unescape_bytes(s: &str) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(s.len());
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if b == b'\\' {
            if bytes.len() < i + 4 {
                return Err(Error::InvalidModel(format!("truncated escape in {s:?}")));
            }
            if bytes[i + 1] != b'x' {
                return Err(Error::InvalidModel(format!("bad escape in {s:?}")));
            }
            let hex = std::str::from_utf8(&bytes[i + 2..i + 4])
                .map_err(|_| Error::InvalidModel(format!("bad escape in {s:?}")))?;
            let value = u8::from_str_radix(hex, 16)
                .map_err(|_| Error::InvalidModel(format!("bad escape in {s:?}")))?;
            out.push(value);
            i += 4;
        } else if b.is_ascii() && (0x20..=0x7E).contains(&b) {
            out.push(b);
            i += 1;
        } else {
            return Err(Error::InvalidModel(format!(
                "unescaped non-printable byte in vocab entry {s:?}"
            )));
        }
    }
    Ok(out)
}
