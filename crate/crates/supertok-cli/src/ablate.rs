//! Ablation driver: sweep one training axis, evaluate every point on the
//! evaluation manifest, and emit one consolidated fertility table shaped
//! like a per-language ablation table.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;
use supertok_core::corpus::Corpus;
use supertok_core::eval::{evaluate, EvalOptions};
use supertok_core::normalize::NormalizationForm;
use supertok_core::trainer::{train, TrainerConfig};

use crate::args::AblateArgs;
use crate::commands::build_trainer_config;
use crate::util::{emit, load_manifest_corpus, parse_config_file, parse_transition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Transition,
    Vocab,
    Data,
    Norm,
}

impl Axis {
    fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "transition" => Ok(Axis::Transition),
            "vocab" | "vocab-size" => Ok(Axis::Vocab),
            "data" | "data-size" => Ok(Axis::Data),
            "norm" | "normalization" => Ok(Axis::Norm),
            other => bail!("unknown ablation axis {other:?} (expected transition, vocab, data or norm)"),
        }
    }

    fn label(&self) -> &'static str {
        match self {
            Axis::Transition => "transition",
            Axis::Vocab => "vocab size",
            Axis::Data => "data size",
            Axis::Norm => "normalization",
        }
    }
}

struct SweepPoint {
    label: String,
    config: TrainerConfig,
    /// Per-language line-prefix fraction for the data axis.
    data_fraction: Option<f64>,
}

fn sweep_points(axis: Axis, values: &[String], base: &TrainerConfig) -> Result<Vec<SweepPoint>> {
    values
        .iter()
        .map(|value| {
            let mut config = base.clone();
            let mut data_fraction = None;
            match axis {
                Axis::Transition => {
                    config.transition = parse_transition(value)?;
                }
                Axis::Vocab => {
                    config.vocab_size = value
                        .parse()
                        .map_err(|_| anyhow!("invalid vocab size {value:?}"))?;
                }
                Axis::Data => {
                    let fraction = parse_fraction(value)?;
                    data_fraction = Some(fraction);
                }
                Axis::Norm => {
                    config.normalization = NormalizationForm::parse(value)?;
                }
            }
            Ok(SweepPoint {
                label: value.clone(),
                config,
                data_fraction,
            })
        })
        .collect()
}

fn parse_fraction(s: &str) -> Result<f64> {
    let value = if let Some(percent) = s.strip_suffix('%') {
        percent.trim().parse::<f64>().map(|v| v / 100.0)
    } else {
        s.trim().parse::<f64>()
    }
    .map_err(|_| anyhow!("invalid data fraction {s:?}"))?;
    if !(value > 0.0 && value <= 1.0) {
        bail!("data fraction {s:?} must be in (0, 1]");
    }
    Ok(value)
}

/// Keep the first `fraction` of each language's lines, preserving the mix.
fn corpus_prefix(corpus: &Corpus, fraction: f64) -> Corpus {
    let mut budgets: BTreeMap<String, u64> = BTreeMap::new();
    for stats in &corpus.stats {
        let keep = ((stats.lines as f64) * fraction).floor().max(1.0) as u64;
        budgets.insert(stats.lang.clone(), keep);
    }
    let mut taken: BTreeMap<String, u64> = BTreeMap::new();
    let lines = corpus
        .lines
        .iter()
        .filter(|line| {
            let t = taken.entry(line.lang.clone()).or_default();
            if *t < budgets[&line.lang] {
                *t += 1;
                true
            } else {
                false
            }
        })
        .cloned()
        .collect();
    Corpus::from_lines(lines, corpus.stats_normalization)
}

struct PointOutcome {
    label: String,
    result: std::result::Result<BTreeMap<String, f64>, String>,
}

pub fn run_ablate(mut args: AblateArgs) -> Result<()> {
    if let Some(config_path) = args.train.config.clone() {
        for (key, value) in parse_config_file(&config_path)? {
            match key.as_str() {
                "corpus" => args.train.corpus = PathBuf::from(value),
                "eval-manifest" => args.eval_manifest = PathBuf::from(value),
                "axis" => args.axis = value,
                "values" => args.values = value,
                "vocab-size" => args.train.vocab_size = value.parse().context("vocab-size")?,
                "transition" => args.train.transition = value,
                "mode" => args.train.mode = value,
                "pattern" => args.train.pattern = value,
                "norm" => args.train.norm = value,
                "min-pair-freq" => {
                    args.train.min_pair_freq = value.parse().context("min-pair-freq")?
                }
                "alpha" => args.alpha = value.parse().context("alpha")?,
                "jobs" => args.jobs = value.parse().context("jobs")?,
                "format" => args.format = value,
                "out" => args.train.out = Some(PathBuf::from(value)),
                other => bail!("unknown config key {other:?} in {}", config_path.display()),
            }
        }
    }

    let axis = Axis::parse(&args.axis)?;
    let base_config = build_trainer_config(&args.train)?;
    let values: Vec<String> = args
        .values
        .split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect();
    if values.is_empty() {
        bail!("--values is empty");
    }
    let points = sweep_points(axis, &values, &base_config)?;

    let train_corpus = load_manifest_corpus(&args.train.corpus, base_config.normalization)?;
    let eval_corpus = load_manifest_corpus(&args.eval_manifest, base_config.normalization)?;
    let eval_opts = EvalOptions {
        alpha: args.alpha,
        ..EvalOptions::default()
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs)
        .build()
        .context("building sweep thread pool")?;
    let outcomes: Vec<PointOutcome> = pool.install(|| {
        points
            .par_iter()
            .map(|point| {
                let result = run_point(point, &train_corpus, &eval_corpus, &eval_opts);
                PointOutcome {
                    label: point.label.clone(),
                    result: result.map_err(|e| format!("{e:#}")),
                }
            })
            .collect()
    });

    for outcome in &outcomes {
        if let Err(e) = &outcome.result {
            log::warn!("sweep point {} failed: {e}", outcome.label);
        }
    }

    let mut languages: Vec<String> = eval_corpus.stats.iter().map(|s| s.lang.clone()).collect();
    languages.sort();
    let header = format!(
        "axis={} values={} vocab-size={} transition={} mode={} pattern={} norm={} min-pair-freq={} alpha={} corpus={} eval-manifest={}",
        axis.label(),
        values.join("|"),
        base_config.vocab_size,
        args.train.transition,
        base_config.mode.as_str(),
        base_config.pattern,
        base_config.normalization,
        base_config.min_pair_frequency,
        args.alpha,
        args.train.corpus.display(),
        args.eval_manifest.display(),
    );
    let content = match args.format.as_str() {
        "markdown" | "md" => render_markdown(axis, &header, &languages, &outcomes),
        "csv" => render_csv(axis, &header, &languages, &outcomes),
        "json" => render_json(axis, &header, &languages, &outcomes)?,
        other => bail!("unknown format {other:?} (expected markdown, csv or json)"),
    };
    emit(args.train.out.as_deref(), &content)
}

fn run_point(
    point: &SweepPoint,
    train_corpus: &Corpus,
    eval_corpus: &Corpus,
    eval_opts: &EvalOptions,
) -> Result<BTreeMap<String, f64>> {
    let corpus_slice;
    let train_corpus = match point.data_fraction {
        Some(fraction) => {
            corpus_slice = corpus_prefix(train_corpus, fraction);
            &corpus_slice
        }
        None => train_corpus,
    };
    let model = train(&point.config, train_corpus)?;
    let named = vec![("model".to_string(), &model)];
    let report = evaluate(&named, eval_corpus, None, eval_opts)?;
    let mut row = BTreeMap::new();
    for cell in &report.cells {
        if let Some(fertility) = cell.fertility {
            row.insert(cell.language.clone(), fertility);
        }
    }
    Ok(row)
}

fn render_markdown(
    axis: Axis,
    header: &str,
    languages: &[String],
    outcomes: &[PointOutcome],
) -> String {
    let mut out = format!("# Ablation: {}\n\nConfig: {header}\n\n", axis.label());
    out.push_str(&format!("| {} | {} |\n", axis.label(), languages.join(" | ")));
    out.push_str(&format!("|---|{}\n", "---|".repeat(languages.len())));
    for outcome in outcomes {
        match &outcome.result {
            Ok(row) => {
                let cells: Vec<String> = languages
                    .iter()
                    .map(|lang| {
                        row.get(lang)
                            .map(|v| format!("{v:.4}"))
                            .unwrap_or_else(|| "-".into())
                    })
                    .collect();
                out.push_str(&format!("| {} | {} |\n", outcome.label, cells.join(" | ")));
            }
            Err(e) => {
                out.push_str(&format!(
                    "| {} | error: {} |\n",
                    outcome.label,
                    e.replace('|', "/")
                ));
            }
        }
    }
    out
}

fn render_csv(axis: Axis, header: &str, languages: &[String], outcomes: &[PointOutcome]) -> String {
    let mut out = format!("# {header}\n{},language,fertility\n", axis.label().replace(' ', "_"));
    for outcome in outcomes {
        match &outcome.result {
            Ok(row) => {
                for lang in languages {
                    if let Some(v) = row.get(lang) {
                        out.push_str(&format!("{},{},{:.4}\n", outcome.label, lang, v));
                    }
                }
            }
            Err(e) => {
                out.push_str(&format!("{},error,\"{}\"\n", outcome.label, e.replace('"', "'")));
            }
        }
    }
    out
}

fn render_json(
    axis: Axis,
    header: &str,
    languages: &[String],
    outcomes: &[PointOutcome],
) -> Result<String> {
    let rows: Vec<serde_json::Value> = outcomes
        .iter()
        .map(|outcome| match &outcome.result {
            Ok(row) => serde_json::json!({
                "value": outcome.label,
                "fertility": row,
            }),
            Err(e) => serde_json::json!({
                "value": outcome.label,
                "error": e,
            }),
        })
        .collect();
    let value = serde_json::json!({
        "axis": axis.label(),
        "config": header,
        "languages": languages,
        "rows": rows,
    });
    Ok(format!("{}\n", serde_json::to_string_pretty(&value)?))
}
