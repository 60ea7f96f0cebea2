//! Vocabulary combination and analysis: rule-stacking merges of separately
//! trained tokenizers, and per-script vocabulary distribution.

use std::collections::BTreeMap;

use unicode_script::{Script, UnicodeScript};

use crate::error::{Error, Result};
use crate::model::{ModelBuilder, ModelMetadata, TokenizerModel};
use crate::pretokenize::pretokenize;

/// Per-model learned-rule budgets for [`merge_tokenizers`].
#[derive(Debug, Clone)]
pub struct VocabBudget {
    budgets: Vec<u32>,
}

impl VocabBudget {
    pub fn new(budgets: Vec<u32>) -> Self {
        Self { budgets }
    }

    pub fn budgets(&self) -> &[u32] {
        &self.budgets
    }
}

/// Combine trained tokenizers by rule stacking.
///
/// All inputs must share the normalization form, pre-tokenization pattern,
/// sentence delimiters and special/dummy layout. The result keeps the shared
/// 256-byte base; each model contributes its first `budget` learned rules,
/// re-ranked by round-robin interleaving of rank position (rule k of every
/// model lands before rule k+1 of any). A rule whose resulting byte string
/// already exists is dropped — first occurrence wins — so the merged
/// vocabulary can be smaller than the sum of budgets.
pub fn merge_tokenizers(
    models: &[&TokenizerModel],
    budget: &VocabBudget,
) -> Result<TokenizerModel> {
    if models.is_empty() {
        return Err(Error::InvalidConfig("no models to merge".into()));
    }
    if models.len() != budget.budgets().len() {
        return Err(Error::InvalidConfig(format!(
            "{} models but {} budgets",
            models.len(),
            budget.budgets().len()
        )));
    }
    let first = models[0];
    for (i, model) in models.iter().enumerate() {
        if model.normalization() != first.normalization() {
            return Err(Error::IncompatibleModels(format!(
                "model {i} uses normalization {}, expected {}",
                model.normalization(),
                first.normalization()
            )));
        }
        if model.pattern() != first.pattern() {
            return Err(Error::IncompatibleModels(format!(
                "model {i} uses pattern {}, expected {}",
                model.pattern(),
                first.pattern()
            )));
        }
        if model.delims() != first.delims() {
            return Err(Error::IncompatibleModels(format!(
                "model {i} uses a different sentence delimiter set"
            )));
        }
        if model.special_tokens() != first.special_tokens()
            || model.vocab().n_dummy() != first.vocab().n_dummy()
        {
            return Err(Error::IncompatibleModels(format!(
                "model {i} uses a different special/dummy token layout"
            )));
        }
        let budget = budget.budgets()[i];
        if u64::from(budget) > u64::from(model.vocab().n_learned()) {
            return Err(Error::InvalidConfig(format!(
                "budget {budget} exceeds model {i}'s {} learned rules",
                model.vocab().n_learned()
            )));
        }
    }

    let mut builder = ModelBuilder::new(
        first.normalization(),
        first.pattern(),
        first.delims().clone(),
        first.special_tokens().to_vec(),
        first.vocab().n_dummy(),
    )?;
    let mut dropped = 0u64;
    let max_budget = budget.budgets().iter().copied().max().unwrap_or(0);
    for k in 0..max_budget {
        for (m, model) in models.iter().enumerate() {
            if k >= budget.budgets()[m] {
                continue;
            }
            let rule = model.merges()[k as usize];
            // Operands resolve by byte string: non-learned ids share the
            // layout, and learned operands have rank < k, so their byte
            // strings are already present (kept or deduplicated).
            let left_bytes = model.vocab().bytes(rule.left).expect("valid source model");
            let right_bytes = model.vocab().bytes(rule.right).expect("valid source model");
            let (Some(left), Some(right)) = (
                builder.vocab().id_of(left_bytes),
                builder.vocab().id_of(right_bytes),
            ) else {
                return Err(Error::IncompatibleModels(format!(
                    "rule {k} of model {m} references an unresolvable operand"
                )));
            };
            let concat = builder.concat_bytes(left, right).expect("operands exist");
            if builder.vocab().contains_bytes(&concat) {
                dropped += 1;
                log::debug!("merge drops duplicate rule {k} of model {m}");
                continue;
            }
            builder.push_rule(left, right, rule.stage)?;
        }
    }
    let mut metadata = ModelMetadata {
        mode: Some("merged".into()),
        ..ModelMetadata::default()
    };
    if dropped > 0 {
        metadata
            .warnings
            .push(format!("dropped {dropped} duplicate rules during merge"));
    }
    Ok(builder.finish(metadata))
}

/// One row of the script distribution table.
#[derive(Debug, Clone, PartialEq)]
pub struct ScriptShare {
    pub script: String,
    pub count: u64,
    pub percentage: f64,
}

fn char_class(c: char, previous: Option<&'static str>) -> &'static str {
    match c.script() {
        // Combining marks carry Inherited; they belong to the preceding
        // base character's script.
        Script::Inherited => previous.unwrap_or("common"),
        Script::Common | Script::Unknown => "common",
        script => script.full_name(),
    }
}

/// Classify each learned token by the majority Unicode script of its decoded
/// text. Whitespace, digits and punctuation count as "common"; undecodable
/// byte strings count as "binary". Rows are ordered by descending count,
/// then name; percentages are over learned tokens.
pub fn script_distribution(model: &TokenizerModel) -> Vec<ScriptShare> {
    let mut totals: BTreeMap<&'static str, u64> = BTreeMap::new();
    let mut learned = 0u64;
    for (_, bytes) in model.vocab().iter_learned() {
        learned += 1;
        let class = match std::str::from_utf8(bytes) {
            Err(_) => "binary",
            Ok(text) => {
                let mut counts: BTreeMap<&'static str, u64> = BTreeMap::new();
                let mut order: Vec<&'static str> = Vec::new();
                let mut previous = None;
                for c in text.chars() {
                    let class = char_class(c, previous);
                    if class != "common" && class != "binary" {
                        previous = Some(class);
                    }
                    if !order.contains(&class) {
                        order.push(class);
                    }
                    *counts.entry(class).or_default() += 1;
                }
                let best = counts.values().copied().max().unwrap_or(0);
                // Majority; ties go to the class appearing earliest.
                order
                    .iter()
                    .copied()
                    .find(|c| counts[c] == best)
                    .unwrap_or("common")
            }
        };
        *totals.entry(class).or_default() += 1;
    }
    let mut rows: Vec<ScriptShare> = totals
        .into_iter()
        .map(|(script, count)| ScriptShare {
            script: script.to_string(),
            count,
            percentage: if learned == 0 {
                0.0
            } else {
                count as f64 / learned as f64 * 100.0
            },
        })
        .collect();
    rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.script.cmp(&b.script)));
    rows
}

/// True when the token's decoded text contains an internal word boundary
/// under the model's pre-tokenization pattern, i.e. it re-segments into more
/// than one unit. Byte strings that are not valid UTF-8 have no identifiable
/// boundary and return false.
pub fn is_multiword(model: &TokenizerModel, id: u32) -> bool {
    let Some(bytes) = model.vocab().bytes(id) else {
        return false;
    };
    let Ok(text) = std::str::from_utf8(bytes) else {
        return false;
    };
    pretokenize(text, model.pattern()).len() > 1
}
