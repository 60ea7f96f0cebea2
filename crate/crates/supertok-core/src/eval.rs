//! Model × language × metric evaluation over a tagged corpus, and report
//! rendering in CSV, JSON, and markdown.
//!
//! Token counts come from encoding each raw line with the model's own
//! recorded normalization form. Word and byte counts are model-independent,
//! computed once per line under the corpus normalization form, so fertility
//! denominators and bytes-per-token numerators are shared across models.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::codec::Encoder;
use crate::corpus::{Corpus, LanguageStats};
use crate::error::{Error, Result};
use crate::metrics::{
    bytes_per_token, fertility, fertility_macro, nsl, renyi_efficiency, renyi_entropy, LineStats,
    TokenHistogram,
};
use crate::model::TokenizerModel;
use crate::normalize::normalize;

/// Evaluation options beyond the model and corpus lists.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Rényi order. The default follows the entropy-based tokenizer
    /// assessment methodology this tooling adopts.
    pub alpha: f64,
    /// Also report the macro (mean-of-ratios) fertility variant.
    pub macro_fertility: bool,
    /// Bold the best value per column in markdown output.
    pub bold_best: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self {
            alpha: 2.5,
            macro_fertility: false,
            bold_best: false,
        }
    }
}

/// Resolved-configuration echo embedded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub models: Vec<String>,
    pub base_model: Option<String>,
    pub alpha: f64,
    pub corpus_normalization: String,
    pub macro_fertility: bool,
    pub bold_best: bool,
}

/// One (language, model) cell. A metric that cannot be computed is `None`
/// with the reason recorded; nothing is silently dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricCell {
    pub language: String,
    pub model: String,
    pub fertility: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fertility_macro: Option<f64>,
    pub nsl: Option<f64>,
    pub bytes_per_token: Option<f64>,
    /// Lines with zero words, excluded from the fertility aggregate.
    pub zero_word_lines: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skip_reason: Option<String>,
}

/// Whole-corpus entropy figures for one model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelEntropy {
    pub model: String,
    pub renyi_entropy: f64,
    pub renyi_efficiency: f64,
}

/// The full evaluation grid plus corpus statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub config: ReportConfig,
    pub corpus: Vec<LanguageStats>,
    pub cells: Vec<MetricCell>,
    pub per_model: Vec<ModelEntropy>,
}

impl MetricsReport {
    pub fn cell(&self, language: &str, model: &str) -> Option<&MetricCell> {
        self.cells
            .iter()
            .find(|c| c.language == language && c.model == model)
    }

    /// Languages in report (sorted) order.
    pub fn languages(&self) -> Vec<String> {
        let mut langs: Vec<String> = self.corpus.iter().map(|s| s.lang.clone()).collect();
        langs.sort();
        langs
    }
}

/// Evaluate the given named models over the corpus.
///
/// `base_model` selects the NSL reference; `None` skips NSL. Metrics are
/// micro-averaged per line at the language level; per-model entropy is
/// computed from encoding the whole evaluation corpus.
pub fn evaluate(
    models: &[(String, &TokenizerModel)],
    corpus: &Corpus,
    base_model: Option<&str>,
    opts: &EvalOptions,
) -> Result<MetricsReport> {
    if models.is_empty() {
        return Err(Error::InvalidConfig("no models to evaluate".into()));
    }
    {
        let mut seen = std::collections::HashSet::new();
        for (name, _) in models {
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate model name {name:?}")));
            }
        }
    }
    if let Some(base) = base_model {
        if !models.iter().any(|(name, _)| name == base) {
            return Err(Error::InvalidConfig(format!(
                "base model {base:?} is not among the evaluated models"
            )));
        }
    }
    if opts.alpha.is_nan() || opts.alpha.is_infinite() || opts.alpha <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "alpha {} must be positive",
            opts.alpha
        )));
    }

    // Model-independent word/byte counts, one pass over the corpus.
    let word_bytes: Vec<(u64, u64)> = corpus
        .lines
        .par_iter()
        .map(|line| {
            let normalized = normalize(&line.text, corpus.stats_normalization);
            (
                normalized.split_whitespace().count() as u64,
                normalized.len() as u64,
            )
        })
        .collect();

    // Per-model token counts and corpus-wide histograms.
    struct ModelRun {
        name: String,
        vocab_size: u32,
        line_stats: Vec<LineStats>,
        histogram: TokenHistogram,
    }
    let runs: Vec<ModelRun> = models
        .iter()
        .map(|(name, model)| {
            let encoder = Encoder::new(model);
            let per_line: Vec<(u64, TokenHistogram)> = corpus
                .lines
                .par_iter()
                .map(|line| {
                    let seq = encoder.encode(&line.text);
                    let hist = TokenHistogram::from_ids(&seq.ids);
                    (seq.ids.len() as u64, hist)
                })
                .collect();
            let mut histogram = TokenHistogram::new();
            let mut line_stats = Vec::with_capacity(per_line.len());
            for (i, (tokens, hist)) in per_line.into_iter().enumerate() {
                histogram.merge(&hist);
                line_stats.push(LineStats {
                    token_count: tokens,
                    word_count: word_bytes[i].0,
                    byte_count: word_bytes[i].1,
                });
            }
            ModelRun {
                name: name.clone(),
                vocab_size: model.vocab_size(),
                line_stats,
                histogram,
            }
        })
        .collect();

    let mut languages: Vec<String> = corpus.stats.iter().map(|s| s.lang.clone()).collect();
    languages.sort();

    let mut cells = Vec::with_capacity(languages.len() * runs.len());
    for language in &languages {
        let line_indices: Vec<usize> = corpus
            .lines
            .iter()
            .enumerate()
            .filter(|(_, l)| &l.lang == language)
            .map(|(i, _)| i)
            .collect();
        let base_stats: Option<Vec<LineStats>> = base_model.map(|base| {
            let run = runs.iter().find(|r| r.name == base).expect("validated");
            line_indices.iter().map(|&i| run.line_stats[i]).collect()
        });
        for run in &runs {
            let stats: Vec<LineStats> =
                line_indices.iter().map(|&i| run.line_stats[i]).collect();
            let zero_word_lines = stats.iter().filter(|s| s.word_count == 0).count() as u64;
            let mut skip_reason = None;
            let mut note_skip = |reason: String| -> Option<f64> {
                skip_reason.get_or_insert(reason);
                None
            };
            let fert = match fertility(&stats) {
                Ok(v) => Some(v),
                Err(e) => note_skip(e.to_string()),
            };
            let fert_macro = if opts.macro_fertility {
                fertility_macro(&stats).ok()
            } else {
                None
            };
            let nsl_value = match &base_stats {
                None => None,
                Some(base) => match nsl(&stats, base) {
                    Ok(v) => Some(v),
                    Err(e) => note_skip(e.to_string()),
                },
            };
            let bpt = match bytes_per_token(&stats) {
                Ok(v) => Some(v),
                Err(e) => note_skip(e.to_string()),
            };
            cells.push(MetricCell {
                language: language.clone(),
                model: run.name.clone(),
                fertility: fert,
                fertility_macro: fert_macro,
                nsl: nsl_value,
                bytes_per_token: bpt,
                zero_word_lines,
                skip_reason,
            });
        }
    }

    let per_model = runs
        .iter()
        .map(|run| {
            let entropy = renyi_entropy(&run.histogram, opts.alpha)?;
            let efficiency = renyi_efficiency(&run.histogram, opts.alpha, run.vocab_size)?;
            Ok(ModelEntropy {
                model: run.name.clone(),
                renyi_entropy: entropy,
                renyi_efficiency: efficiency,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut corpus_stats = corpus.stats.clone();
    corpus_stats.sort_by(|a, b| a.lang.cmp(&b.lang));

    Ok(MetricsReport {
        config: ReportConfig {
            models: models.iter().map(|(n, _)| n.clone()).collect(),
            base_model: base_model.map(str::to_string),
            alpha: opts.alpha,
            corpus_normalization: corpus.stats_normalization.as_str().to_string(),
            macro_fertility: opts.macro_fertility,
            bold_best: opts.bold_best,
        },
        corpus: corpus_stats,
        cells,
        per_model,
    })
}

/// Output format for [`render_report`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    Markdown,
}

impl ReportFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::InvalidConfig(format!(
                "unknown report format {other:?} (expected csv, json or markdown)"
            ))),
        }
    }
}

/// Render a report. JSON keeps full precision and roundtrips exactly; CSV
/// and markdown print values with 4 decimal places.
pub fn render_report(report: &MetricsReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_string_pretty(report)?;
            out.push('\n');
            Ok(out)
        }
        ReportFormat::Csv => Ok(render_csv(report)),
        ReportFormat::Markdown => Ok(render_markdown(report)),
    }
}

fn render_csv(report: &MetricsReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# models={} base={} alpha={} corpus_normalization={}\n",
        report.config.models.join("|"),
        report.config.base_model.as_deref().unwrap_or("none"),
        report.config.alpha,
        report.config.corpus_normalization,
    ));
    out.push_str("language,model,metric,value\n");
    for stats in &report.corpus {
        out.push_str(&format!("{},-,bytes,{}\n", stats.lang, stats.bytes));
        out.push_str(&format!("{},-,lines,{}\n", stats.lang, stats.lines));
        out.push_str(&format!(
            "{},-,avg_words_per_line,{:.4}\n",
            stats.lang,
            stats.avg_words_per_line()
        ));
    }
    for cell in &report.cells {
        let mut row = |metric: &str, value: Option<f64>| {
            if let Some(v) = value {
                out.push_str(&format!("{},{},{},{:.4}\n", cell.language, cell.model, metric, v));
            } else {
                let reason = cell.skip_reason.as_deref().unwrap_or("skipped");
                out.push_str(&format!(
                    "{},{},{},skipped: {}\n",
                    cell.language, cell.model, metric, reason
                ));
            }
        };
        row("fertility", cell.fertility);
        if report.config.macro_fertility {
            row("fertility_macro", cell.fertility_macro);
        }
        if report.config.base_model.is_some() {
            row("nsl", cell.nsl);
        }
        row("bytes_per_token", cell.bytes_per_token);
    }
    for entry in &report.per_model {
        out.push_str(&format!(
            "all,{},renyi_entropy,{:.4}\n",
            entry.model, entry.renyi_entropy
        ));
        out.push_str(&format!(
            "all,{},renyi_efficiency,{:.4}\n",
            entry.model, entry.renyi_efficiency
        ));
    }
    out
}

fn render_markdown(report: &MetricsReport) -> String {
    let languages = report.languages();
    let bold = report.config.bold_best;
    let mut out = String::new();
    out.push_str("# Tokenizer evaluation\n\n");
    out.push_str(&format!(
        "Models: {}. Base: {}. alpha = {}. Corpus normalization: {}.\n\n",
        report.config.models.join(", "),
        report.config.base_model.as_deref().unwrap_or("none"),
        report.config.alpha,
        report.config.corpus_normalization,
    ));

    // Corpus statistics, languages as columns.
    out.push_str("## Corpus\n\n");
    out.push_str(&format!("| | {} |\n", languages.join(" | ")));
    out.push_str(&format!("|---|{}\n", "---|".repeat(languages.len())));
    type StatGetter = fn(&LanguageStats) -> String;
    let corpus_rows: [(&str, StatGetter); 3] = [
        ("Bytes", |s| s.bytes.to_string()),
        ("Lines", |s| s.lines.to_string()),
        ("Avg W/Line", |s| format!("{:.4}", s.avg_words_per_line())),
    ];
    for (label, value) in corpus_rows {
        let cells: Vec<String> = languages
            .iter()
            .map(|lang| {
                report
                    .corpus
                    .iter()
                    .find(|s| &s.lang == lang)
                    .map(value)
                    .unwrap_or_else(|| "-".into())
            })
            .collect();
        out.push_str(&format!("| {} | {} |\n", label, cells.join(" | ")));
    }
    out.push('\n');

    // One table per metric: models as rows, languages as columns.
    type MetricGetter = Box<dyn Fn(&MetricCell) -> Option<f64>>;
    let metric_tables: Vec<(&str, bool, MetricGetter)> = {
        let mut tables: Vec<(&str, bool, MetricGetter)> = vec![(
            "Fertility (lower is better)",
            true,
            Box::new(|c: &MetricCell| c.fertility),
        )];
        if report.config.macro_fertility {
            tables.push((
                "Fertility, macro variant (lower is better)",
                true,
                Box::new(|c: &MetricCell| c.fertility_macro),
            ));
        }
        if report.config.base_model.is_some() {
            tables.push(("NSL (lower is better)", true, Box::new(|c: &MetricCell| c.nsl)));
        }
        tables.push((
            "Bytes per token (higher is better)",
            false,
            Box::new(|c: &MetricCell| c.bytes_per_token),
        ));
        tables
    };

    for (title, lower_is_better, getter) in &metric_tables {
        out.push_str(&format!("## {title}\n\n"));
        out.push_str(&format!("| Tokenizer | {} |\n", languages.join(" | ")));
        out.push_str(&format!("|---|{}\n", "---|".repeat(languages.len())));
        // Best value per language column for optional bolding.
        let best: Vec<Option<f64>> = languages
            .iter()
            .map(|lang| {
                let values = report
                    .cells
                    .iter()
                    .filter(|c| &c.language == lang)
                    .filter_map(getter.as_ref());
                if *lower_is_better {
                    values.min_by(f64::total_cmp)
                } else {
                    values.max_by(f64::total_cmp)
                }
            })
            .collect();
        for model in &report.config.models {
            let cells: Vec<String> = languages
                .iter()
                .zip(&best)
                .map(|(lang, best)| {
                    let value = report.cell(lang, model).and_then(getter.as_ref());
                    match value {
                        None => "-".into(),
                        Some(v) => {
                            if bold && Some(v) == *best {
                                format!("**{v:.4}**")
                            } else {
                                format!("{v:.4}")
                            }
                        }
                    }
                })
                .collect();
            out.push_str(&format!("| {} | {} |\n", model, cells.join(" | ")));
        }
        out.push('\n');
    }

    // Entropy table: models as columns.
    out.push_str("## Renyi entropy and efficiency\n\n");
    let model_names: Vec<&str> =
        report.per_model.iter().map(|e| e.model.as_str()).collect();
    out.push_str(&format!("| | {} |\n", model_names.join(" | ")));
    out.push_str(&format!("|---|{}\n", "---|".repeat(model_names.len())));
    let best_entropy = report
        .per_model
        .iter()
        .map(|e| e.renyi_entropy)
        .min_by(f64::total_cmp);
    let best_eff = report
        .per_model
        .iter()
        .map(|e| e.renyi_efficiency)
        .max_by(f64::total_cmp);
    let fmt_cell = |v: f64, best: Option<f64>| {
        if bold && Some(v) == best {
            format!("**{v:.4}**")
        } else {
            format!("{v:.4}")
        }
    };
    out.push_str(&format!(
        "| Entropy | {} |\n",
        report
            .per_model
            .iter()
            .map(|e| fmt_cell(e.renyi_entropy, best_entropy))
            .collect::<Vec<_>>()
            .join(" | ")
    ));
    out.push_str(&format!(
        "| Efficiency | {} |\n",
        report
            .per_model
            .iter()
            .map(|e| fmt_cell(e.renyi_efficiency, best_eff))
            .collect::<Vec<_>>()
            .join(" | ")
    ));
    out
}
