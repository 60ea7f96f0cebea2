//! Training: learn a [`TokenizerModel`] from a corpus.
//!
//! Two-stage mode first runs standard BPE confined to pre-token boundaries
//! until the vocabulary reaches the transition point `t` (subword learning),
//! then re-encodes the corpus per sentence and continues merging over full
//! sentence-internal token sequences up to `|V|` (superword learning). Pairs
//! whose concatenation would contain a sentence delimiter are never
//! admissible, which is what keeps merges from crossing sentence boundaries.
//!
//! One-stage mode replicates the single-pass setup: boundless pre-tokenization
//! with cross-pre-token pairs admissible from rank 0, still sentence-bounded.
//!
//! Selection is deterministic. The highest-frequency pair wins; frequency
//! ties go to the pair whose concatenated byte string is bytewise smallest,
//! then to the lower left id. A pair whose concatenation equals an existing
//! token's byte string is skipped, keeping the vocabulary bijective.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, HashSet};

use rayon::prelude::*;

use crate::codec::Encoder;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::model::{MergeStage, ModelBuilder, ModelMetadata, TokenizerModel};
use crate::normalize::{normalize, NormalizationForm};
use crate::pretokenize::{pretokenize, split_sentences, PreTokenPattern, SentenceDelimiterSet};

/// Training curriculum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainerMode {
    /// Subword merges to the transition point, then sentence-bounded
    /// superword merges to `|V|`.
    TwoStage,
    /// Single pass with boundless pre-tokenization; cross-pre-token pairs are
    /// admissible from rank 0. Ignores the transition point and always uses
    /// [`PreTokenPattern::BoundlessStyle`].
    OneStage,
}

impl TrainerMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            TrainerMode::TwoStage => "twostage",
            TrainerMode::OneStage => "onestage",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "twostage" | "two-stage" => Ok(TrainerMode::TwoStage),
            "onestage" | "one-stage" => Ok(TrainerMode::OneStage),
            other => Err(Error::InvalidConfig(format!(
                "unknown training mode {other:?} (expected twostage or onestage)"
            ))),
        }
    }
}

/// Transition point: an absolute vocabulary size or a fraction of `|V|`
/// (floored to an integer token count).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransitionPoint {
    Absolute(u32),
    Fraction(f64),
}

/// Full training configuration.
#[derive(Debug, Clone)]
pub struct TrainerConfig {
    pub vocab_size: u32,
    pub transition: TransitionPoint,
    pub normalization: NormalizationForm,
    pub pattern: PreTokenPattern,
    pub delims: SentenceDelimiterSet,
    pub mode: TrainerMode,
    pub min_pair_frequency: u64,
    pub reserved_dummy_tokens: u32,
    pub special_tokens: Vec<String>,
}

impl TrainerConfig {
    pub fn new(vocab_size: u32) -> Self {
        Self {
            vocab_size,
            transition: TransitionPoint::Fraction(0.9),
            normalization: NormalizationForm::Nfkc,
            pattern: PreTokenPattern::ScriptAgnostic,
            delims: SentenceDelimiterSet::default(),
            mode: TrainerMode::TwoStage,
            min_pair_frequency: 2,
            reserved_dummy_tokens: 0,
            special_tokens: Vec::new(),
        }
    }

    /// Ids below this are fixed by the layout: bytes, specials, dummies.
    pub fn layout_minimum(&self) -> u32 {
        256 + self.special_tokens.len() as u32 + self.reserved_dummy_tokens
    }

    /// The transition point as an absolute vocabulary size.
    pub fn resolved_transition(&self) -> Result<u32> {
        match self.transition {
            TransitionPoint::Absolute(t) => Ok(t),
            TransitionPoint::Fraction(f) => {
                if f.is_nan() || f <= 0.0 || f > 1.0 {
                    return Err(Error::InvalidConfig(format!(
                        "transition fraction {f} must be in (0, 1]"
                    )));
                }
                Ok((f * self.vocab_size as f64).floor() as u32)
            }
        }
    }

    /// The pattern actually used in training: one-stage mode always trains
    /// with boundless pre-tokenization.
    pub fn effective_pattern(&self) -> PreTokenPattern {
        match self.mode {
            TrainerMode::TwoStage => self.pattern,
            TrainerMode::OneStage => PreTokenPattern::BoundlessStyle,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab_size <= self.layout_minimum() {
            return Err(Error::InvalidConfig(format!(
                "vocab size {} must exceed 256 + {} special + {} dummy tokens",
                self.vocab_size,
                self.special_tokens.len(),
                self.reserved_dummy_tokens
            )));
        }
        if self.min_pair_frequency == 0 {
            return Err(Error::InvalidConfig(
                "min pair frequency must be at least 1".into(),
            ));
        }
        if self.mode == TrainerMode::TwoStage {
            let t = self.resolved_transition()?;
            if t <= 256 {
                return Err(Error::InvalidConfig(format!(
                    "transition point {t} must exceed 256"
                )));
            }
            if t > self.vocab_size {
                return Err(Error::InvalidConfig(format!(
                    "transition point {t} exceeds vocab size {}",
                    self.vocab_size
                )));
            }
            if t < self.layout_minimum() {
                return Err(Error::InvalidConfig(format!(
                    "transition point {t} is below the id layout minimum {}",
                    self.layout_minimum()
                )));
            }
        }
        Ok(())
    }

    fn builder(&self) -> Result<ModelBuilder> {
        ModelBuilder::new(
            self.normalization,
            self.effective_pattern(),
            self.delims.clone(),
            self.special_tokens.clone(),
            self.reserved_dummy_tokens,
        )
    }

    fn base_metadata(&self) -> Result<ModelMetadata> {
        Ok(ModelMetadata {
            mode: Some(self.mode.as_str().to_string()),
            requested_vocab_size: Some(self.vocab_size),
            transition_point: match self.mode {
                TrainerMode::TwoStage => Some(self.resolved_transition()?),
                TrainerMode::OneStage => None,
            },
            min_pair_frequency: Some(self.min_pair_frequency),
            warnings: Vec::new(),
        })
    }
}

/// Exact multiset counts of pre-token byte strings, ordered by descending
/// count and then bytewise-ascending key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnitCounts {
    entries: Vec<(Vec<u8>, u64)>,
}

impl UnitCounts {
    pub fn iter(&self) -> impl Iterator<Item = (&[u8], u64)> {
        self.entries.iter().map(|(b, c)| (b.as_slice(), *c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn count_of(&self, bytes: &[u8]) -> u64 {
        self.entries
            .iter()
            .find(|(b, _)| b == bytes)
            .map(|(_, c)| *c)
            .unwrap_or(0)
    }
}

/// Count pre-token occurrences over the whole corpus. Text is normalized,
/// split into sentences, and pre-tokenized per sentence, exactly as the
/// encoder sees it.
pub fn count_units(
    corpus: &Corpus,
    pattern: PreTokenPattern,
    form: NormalizationForm,
    delims: &SentenceDelimiterSet,
) -> Result<UnitCounts> {
    let counts: HashMap<Vec<u8>, u64> = corpus
        .lines
        .par_iter()
        .fold(HashMap::new, |mut acc: HashMap<Vec<u8>, u64>, line| {
            let normalized = normalize(&line.text, form);
            for sentence in split_sentences(&normalized, delims) {
                for pt in pretokenize(sentence.text, pattern) {
                    *acc.entry(pt.text.as_bytes().to_vec()).or_default() += 1;
                }
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    if counts.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut entries: Vec<(Vec<u8>, u64)> = counts.into_iter().collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(UnitCounts { entries })
}

// ---------------- merge engine ----------------

type Pair = (u32, u32);

#[derive(Debug, PartialEq, Eq)]
struct Candidate {
    count: u64,
    concat: Vec<u8>,
    left: u32,
    right: u32,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap order: highest count first; ties prefer the bytewise
        // smallest concatenation, then the lowest left id.
        self.count
            .cmp(&other.count)
            .then_with(|| other.concat.cmp(&self.concat))
            .then_with(|| other.left.cmp(&self.left))
            .then_with(|| other.right.cmp(&self.right))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Word {
    ids: Vec<u32>,
    // Pre-token span (lo, hi) of each symbol, for crossing detection.
    pt: Vec<(u32, u32)>,
}

impl Word {
    fn from_bytes(bytes: &[u8]) -> Self {
        Word {
            ids: bytes.iter().map(|&b| b as u32).collect(),
            pt: vec![(0, 0); bytes.len()],
        }
    }

    fn from_ids(ids: Vec<u32>) -> Self {
        let n = ids.len();
        Word {
            ids,
            pt: vec![(0, 0); n],
        }
    }

    /// Replace every adjacent `(left, right)` with `new_id`, returning the
    /// signed pair-count deltas and whether any merged occurrence crossed a
    /// pre-token boundary.
    fn merge_pair(&mut self, left: u32, right: u32, new_id: u32) -> (Vec<(Pair, i64)>, bool) {
        let n = self.ids.len();
        let mut out_ids = Vec::with_capacity(n);
        let mut out_pt = Vec::with_capacity(n);
        let mut deltas: Vec<(Pair, i64)> = Vec::new();
        let mut crossed = false;
        let mut i = 0;
        while i < n {
            if i + 1 < n && self.ids[i] == left && self.ids[i + 1] == right {
                if let Some(&prev) = out_ids.last() {
                    deltas.push(((prev, left), -1));
                    deltas.push(((prev, new_id), 1));
                }
                deltas.push(((left, right), -1));
                if i + 2 < n {
                    let next = self.ids[i + 2];
                    deltas.push(((right, next), -1));
                    deltas.push(((new_id, next), 1));
                }
                // The result spans a pre-token boundary when its combined
                // span covers more than one pre-token; operands that already
                // span count as much as a crossing junction.
                if self.pt[i].0 != self.pt[i + 1].1 {
                    crossed = true;
                }
                out_ids.push(new_id);
                out_pt.push((self.pt[i].0, self.pt[i + 1].1));
                i += 2;
            } else {
                out_ids.push(self.ids[i]);
                out_pt.push(self.pt[i]);
                i += 1;
            }
        }
        self.ids = out_ids;
        self.pt = out_pt;
        (deltas, crossed)
    }
}

struct EngineOutcome {
    emitted: usize,
    stopped_early: bool,
}

struct BpeEngine<'d> {
    words: Vec<Word>,
    counts: Vec<u64>,
    token_bytes: Vec<Vec<u8>>,
    known_bytes: HashSet<Vec<u8>>,
    delims: Option<&'d SentenceDelimiterSet>,
    min_pair_frequency: u64,
    pair_counts: HashMap<Pair, i64>,
    pair_words: HashMap<Pair, BTreeSet<u32>>,
    heap: BinaryHeap<Candidate>,
}

impl<'d> BpeEngine<'d> {
    /// `delims` set means a pair whose concatenation contains a sentence
    /// delimiter is never admissible (stage 2 and one-stage training).
    fn new(
        builder: &ModelBuilder,
        words: Vec<Word>,
        counts: Vec<u64>,
        delims: Option<&'d SentenceDelimiterSet>,
        min_pair_frequency: u64,
    ) -> Self {
        let vocab = builder.vocab();
        let token_bytes: Vec<Vec<u8>> = (0..vocab.len())
            .map(|id| vocab.bytes(id).expect("dense ids").to_vec())
            .collect();
        let known_bytes: HashSet<Vec<u8>> = token_bytes.iter().cloned().collect();

        let (pair_counts, pair_words) = words
            .par_iter()
            .enumerate()
            .fold(
                || (HashMap::new(), HashMap::new()),
                |(mut pc, mut pw): (HashMap<Pair, i64>, HashMap<Pair, BTreeSet<u32>>),
                 (w_idx, word)| {
                    for j in 0..word.ids.len().saturating_sub(1) {
                        let pair = (word.ids[j], word.ids[j + 1]);
                        *pc.entry(pair).or_default() += counts[w_idx] as i64;
                        pw.entry(pair).or_default().insert(w_idx as u32);
                    }
                    (pc, pw)
                },
            )
            .reduce(
                || (HashMap::new(), HashMap::new()),
                |(mut apc, mut apw), (pc, pw)| {
                    for (k, v) in pc {
                        *apc.entry(k).or_default() += v;
                    }
                    for (k, s) in pw {
                        apw.entry(k).or_default().extend(s);
                    }
                    (apc, apw)
                },
            );

        let mut engine = Self {
            words,
            counts,
            token_bytes,
            known_bytes,
            delims,
            min_pair_frequency,
            pair_counts,
            pair_words,
            heap: BinaryHeap::new(),
        };
        let initial: Vec<(Pair, i64)> = engine
            .pair_counts
            .iter()
            .map(|(&p, &c)| (p, c))
            .collect();
        for (pair, count) in initial {
            if count > 0 {
                engine.push_candidate(pair, count as u64);
            }
        }
        engine
    }

    fn concat(&self, pair: Pair) -> Vec<u8> {
        let mut out = self.token_bytes[pair.0 as usize].clone();
        out.extend_from_slice(&self.token_bytes[pair.1 as usize]);
        out
    }

    fn push_candidate(&mut self, pair: Pair, count: u64) {
        let concat = self.concat(pair);
        if let Some(delims) = self.delims {
            if delims.intersects_bytes(&concat) {
                return;
            }
        }
        self.heap.push(Candidate {
            count,
            concat,
            left: pair.0,
            right: pair.1,
        });
    }

    /// Emit up to `max_rules` merges. `emit(left, right, crossed)` must
    /// register the rule and return its new token id.
    fn run(&mut self, max_rules: usize, mut emit: impl FnMut(u32, u32, bool) -> u32) -> EngineOutcome {
        let mut emitted = 0usize;
        while emitted < max_rules {
            let Some(cand) = self.heap.pop() else {
                return EngineOutcome { emitted, stopped_early: true };
            };
            let pair = (cand.left, cand.right);
            let current = *self.pair_counts.get(&pair).unwrap_or(&0);
            if current <= 0 {
                continue;
            }
            if current as u64 != cand.count {
                // Stale count; requeue at its true position.
                self.heap.push(Candidate {
                    count: current as u64,
                    ..cand
                });
                continue;
            }
            if cand.count < self.min_pair_frequency {
                // The heap never understates a live pair, so a fresh top
                // below the threshold means nothing reaches it.
                return EngineOutcome { emitted, stopped_early: true };
            }
            if self.known_bytes.contains(&cand.concat) {
                // Merging would duplicate an existing token's byte string.
                log::debug!(
                    "skipping duplicate-producing pair ({}, {})",
                    cand.left,
                    cand.right
                );
                continue;
            }

            let new_id = self.token_bytes.len() as u32;
            let mut aggregated: BTreeMap<Pair, i64> = BTreeMap::new();
            let mut crossed_any = false;
            let word_indices: Vec<u32> = self
                .pair_words
                .remove(&pair)
                .map(|s| s.into_iter().collect())
                .unwrap_or_default();
            for w_idx in word_indices {
                let count = self.counts[w_idx as usize] as i64;
                let (deltas, crossed) =
                    self.words[w_idx as usize].merge_pair(cand.left, cand.right, new_id);
                if !deltas.is_empty() && crossed {
                    crossed_any = true;
                }
                for (p, d) in deltas {
                    *aggregated.entry(p).or_default() += d * count;
                    if d > 0 {
                        self.pair_words.entry(p).or_default().insert(w_idx);
                    }
                }
            }

            self.known_bytes.insert(cand.concat.clone());
            self.token_bytes.push(cand.concat);
            let assigned = emit(cand.left, cand.right, crossed_any);
            debug_assert_eq!(assigned, new_id, "engine and builder ids diverged");

            for (p, delta) in aggregated {
                let entry = self.pair_counts.entry(p).or_default();
                *entry += delta;
                if delta > 0 && *entry > 0 {
                    let count = *entry as u64;
                    self.push_candidate(p, count);
                }
            }
            emitted += 1;
        }
        EngineOutcome { emitted, stopped_early: false }
    }
}

// ---------------- training entry points ----------------

fn stage1_words(units: &UnitCounts) -> (Vec<Word>, Vec<u64>) {
    let mut words = Vec::with_capacity(units.len());
    let mut counts = Vec::with_capacity(units.len());
    for (bytes, count) in units.iter() {
        words.push(Word::from_bytes(bytes));
        counts.push(count);
    }
    (words, counts)
}

/// Stage 1: greedy highest-frequency merging within pre-token boundaries
/// until the vocabulary reaches the transition point or no pair meets the
/// minimum frequency. All rules are tagged subword.
pub fn train_stage1(config: &TrainerConfig, units: &UnitCounts) -> Result<TokenizerModel> {
    config.validate()?;
    if config.mode != TrainerMode::TwoStage {
        return Err(Error::InvalidConfig(
            "stage-1 training requires two-stage mode".into(),
        ));
    }
    if units.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let t = config.resolved_transition()?;
    let target = (t - config.layout_minimum()) as usize;
    let mut builder = config.builder()?;
    let mut metadata = config.base_metadata()?;

    let (words, counts) = stage1_words(units);
    let mut engine = BpeEngine::new(&builder, words, counts, None, config.min_pair_frequency);
    let outcome = engine.run(target, |left, right, _| {
        builder
            .push_rule(left, right, MergeStage::Subword)
            .expect("engine-validated rule")
    });
    if outcome.stopped_early {
        let size = builder.vocab().len();
        metadata.warnings.push(format!(
            "stage 1 stopped early at {size} tokens (requested transition {t}): \
             no admissible pair meets min frequency {}",
            config.min_pair_frequency
        ));
    }
    log::info!(
        "stage 1: {} subword rules ({} requested)",
        outcome.emitted,
        target
    );
    Ok(builder.finish(metadata))
}

fn sentence_sequences(
    corpus: &Corpus,
    partial: &TokenizerModel,
) -> BTreeMap<Vec<u32>, u64> {
    let encoder = Encoder::new(partial);
    corpus
        .lines
        .par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<Vec<u32>, u64>, line| {
            let normalized = normalize(&line.text, partial.normalization());
            for sentence in split_sentences(&normalized, partial.delims()) {
                let mut seq = Vec::new();
                encoder.encode_sentence_into(sentence.text, &mut seq);
                if seq.len() >= 2 {
                    *acc.entry(seq).or_default() += 1;
                }
            }
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        })
}

/// Stage 2: re-encode the corpus with the stage-1 rules per sentence, then
/// continue merging over full sentence-internal token sequences up to `|V|`.
/// All rules are tagged superword; no rule may contain a sentence delimiter.
pub fn train_stage2(
    partial: &TokenizerModel,
    corpus: &Corpus,
    config: &TrainerConfig,
) -> Result<TokenizerModel> {
    config.validate()?;
    if config.mode != TrainerMode::TwoStage {
        return Err(Error::InvalidConfig(
            "stage-2 training requires two-stage mode".into(),
        ));
    }
    let t = config.resolved_transition()?;
    if partial.vocab_size() > t {
        return Err(Error::InvalidConfig(format!(
            "partial model has {} tokens, beyond the transition point {t}",
            partial.vocab_size()
        )));
    }
    if partial.normalization() != config.normalization
        || partial.pattern() != config.pattern
        || partial.delims() != &config.delims
        || partial.special_tokens() != config.special_tokens.as_slice()
        || partial.vocab().n_dummy() != config.reserved_dummy_tokens
    {
        return Err(Error::InvalidConfig(
            "partial model configuration does not match the trainer config".into(),
        ));
    }

    // Rebuild the builder with the stage-1 rules.
    let mut builder = config.builder()?;
    for rule in partial.merges() {
        builder.push_rule(rule.left, rule.right, rule.stage)?;
    }
    let mut metadata = config.base_metadata()?;
    metadata.warnings = partial.metadata().warnings.clone();

    let target = (config.vocab_size - partial.vocab_size()) as usize;
    if target == 0 {
        return Ok(builder.finish(metadata));
    }

    let sequences = sentence_sequences(corpus, partial);
    let mut words = Vec::with_capacity(sequences.len());
    let mut counts = Vec::with_capacity(sequences.len());
    for (seq, count) in sequences {
        words.push(Word::from_ids(seq));
        counts.push(count);
    }

    let mut engine = BpeEngine::new(
        &builder,
        words,
        counts,
        Some(&config.delims),
        config.min_pair_frequency,
    );
    let outcome = engine.run(target, |left, right, _| {
        builder
            .push_rule(left, right, MergeStage::Superword)
            .expect("engine-validated rule")
    });
    if outcome.stopped_early {
        let size = builder.vocab().len();
        metadata.warnings.push(format!(
            "stage 2 stopped early at {size} tokens (requested vocab size {}): \
             no admissible pair meets min frequency {}",
            config.vocab_size, config.min_pair_frequency
        ));
    }
    log::info!(
        "stage 2: {} superword rules ({} requested)",
        outcome.emitted,
        target
    );
    Ok(builder.finish(metadata))
}

fn train_onestage(config: &TrainerConfig, corpus: &Corpus) -> Result<TokenizerModel> {
    let pattern = PreTokenPattern::BoundlessStyle;
    let sentences: BTreeMap<String, u64> = corpus
        .lines
        .par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<String, u64>, line| {
            let normalized = normalize(&line.text, config.normalization);
            for sentence in split_sentences(&normalized, &config.delims) {
                *acc.entry(sentence.text.to_string()).or_default() += 1;
            }
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });
    if sentences.is_empty() {
        return Err(Error::EmptyCorpus);
    }

    let mut words = Vec::with_capacity(sentences.len());
    let mut counts = Vec::with_capacity(sentences.len());
    for (sentence, count) in sentences {
        let mut ids = Vec::with_capacity(sentence.len());
        let mut pt = Vec::with_capacity(sentence.len());
        for (pt_index, unit) in pretokenize(&sentence, pattern).iter().enumerate() {
            for &b in unit.text.as_bytes() {
                ids.push(b as u32);
                pt.push((pt_index as u32, pt_index as u32));
            }
        }
        words.push(Word { ids, pt });
        counts.push(count);
    }

    let mut builder = config.builder()?;
    let mut metadata = config.base_metadata()?;
    let target = (config.vocab_size - config.layout_minimum()) as usize;
    let mut engine = BpeEngine::new(
        &builder,
        words,
        counts,
        Some(&config.delims),
        config.min_pair_frequency,
    );
    let outcome = engine.run(target, |left, right, crossed| {
        let stage = if crossed {
            MergeStage::Superword
        } else {
            MergeStage::Subword
        };
        builder
            .push_rule(left, right, stage)
            .expect("engine-validated rule")
    });
    if outcome.stopped_early {
        let size = builder.vocab().len();
        metadata.warnings.push(format!(
            "training stopped early at {size} tokens (requested vocab size {}): \
             no admissible pair meets min frequency {}",
            config.vocab_size, config.min_pair_frequency
        ));
    }
    log::info!("one-stage: {} rules ({} requested)", outcome.emitted, target);
    Ok(builder.finish(metadata))
}

/// Train a model per the configured mode.
pub fn train(config: &TrainerConfig, corpus: &Corpus) -> Result<TokenizerModel> {
    config.validate()?;
    match config.mode {
        TrainerMode::TwoStage => {
            let units = count_units(
                corpus,
                config.pattern,
                config.normalization,
                &config.delims,
            )?;
            let partial = train_stage1(config, &units)?;
            train_stage2(&partial, corpus, config)
        }
        TrainerMode::OneStage => train_onestage(config, corpus),
    }
}
