//! Subcommand implementations.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use supertok_core::codec::{decode, EncodeOptions, Encoder};
use supertok_core::embedding::{
    classify_scan, glitch_scan, retok_init, EmbeddingMatrix, GlitchScanOptions,
};
use supertok_core::error::Error as CoreError;
use supertok_core::eval::{evaluate, render_report, EvalOptions, ReportFormat};
use supertok_core::model::escape_bytes;
use supertok_core::normalize::NormalizationForm;
use supertok_core::pretokenize::{PreTokenPattern, SentenceDelimiterSet};
use supertok_core::trainer::{train, TrainerConfig, TrainerMode};
use supertok_core::vocab_ops::{merge_tokenizers, script_distribution, VocabBudget};
use supertok_core::TokenizerModel;

use crate::args::{EncodeArgs, EvalArgs, GlitchArgs, MergeArgs, RetokInitArgs, TrainArgs, VocabStatsArgs};
use crate::util::{
    emit, load_manifest_corpus, model_names, parse_config_file, parse_model_budget,
    parse_transition, write_atomic,
};

pub fn run_train(mut args: TrainArgs) -> Result<()> {
    if let Some(config_path) = args.config.clone() {
        apply_train_config_file(&mut args, &config_path)?;
    }
    let out = args
        .out
        .clone()
        .ok_or_else(|| anyhow!("--out is required (set it via flag or config file)"))?;
    let config = build_trainer_config(&args)?;
    config.validate().map_err(config_err)?;
    log::info!(
        "train: mode={} vocab={} transition={:?} pattern={} norm={} corpus={}",
        config.mode.as_str(),
        config.vocab_size,
        config.transition,
        config.pattern,
        config.normalization,
        args.corpus.display(),
    );
    let corpus = load_manifest_corpus(&args.corpus, config.normalization)?;
    let model = train(&config, &corpus)?;
    for warning in &model.metadata().warnings {
        log::warn!("{warning}");
    }
    write_atomic(&out, model.to_json_string().as_bytes())
}

fn apply_train_config_file(args: &mut TrainArgs, path: &Path) -> Result<()> {
    for (key, value) in parse_config_file(path)? {
        match key.as_str() {
            "corpus" => args.corpus = PathBuf::from(value),
            "vocab-size" => args.vocab_size = value.parse().context("vocab-size")?,
            "transition" => args.transition = value,
            "mode" => args.mode = value,
            "pattern" => args.pattern = value,
            "norm" => args.norm = value,
            "min-pair-freq" => args.min_pair_freq = value.parse().context("min-pair-freq")?,
            "dummy-tokens" => args.dummy_tokens = value.parse().context("dummy-tokens")?,
            "special-tokens" => {
                args.special_token = value.split(',').map(str::to_string).collect()
            }
            "sentence-delims" => args.sentence_delims = Some(value),
            "out" => args.out = Some(PathBuf::from(value)),
            other => bail!("unknown config key {other:?} in {}", path.display()),
        }
    }
    Ok(())
}

pub fn build_trainer_config(args: &TrainArgs) -> Result<TrainerConfig> {
    let mut config = TrainerConfig::new(args.vocab_size);
    config.transition = parse_transition(&args.transition)?;
    config.mode = TrainerMode::parse(&args.mode).map_err(config_err)?;
    config.pattern = PreTokenPattern::parse(&args.pattern).map_err(config_err)?;
    config.normalization = NormalizationForm::parse(&args.norm).map_err(config_err)?;
    config.min_pair_frequency = args.min_pair_freq;
    config.reserved_dummy_tokens = args.dummy_tokens;
    config.special_tokens = args.special_token.clone();
    if let Some(delims) = &args.sentence_delims {
        let codes: Vec<&str> = delims.split(',').collect();
        config.delims = SentenceDelimiterSet::from_codepoint_strings(&codes).map_err(config_err)?;
    }
    Ok(config)
}

fn config_err(e: CoreError) -> anyhow::Error {
    anyhow::Error::new(e)
}

pub fn run_encode(args: EncodeArgs) -> Result<()> {
    let model = TokenizerModel::load(&args.model)?;
    let encoder = Encoder::new(&model);
    let opts = EncodeOptions {
        normalization_override: match &args.norm_override {
            Some(form) => Some(NormalizationForm::parse(form).map_err(config_err)?),
            None => None,
        },
        force: args.force,
    };
    let stdin = std::io::stdin().lock();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for line in stdin.lines() {
        let line = line.context("reading stdin")?;
        let seq = encoder.encode_with_options(&line, &opts)?;
        let rendered: Vec<String> = if args.pieces {
            seq.ids
                .iter()
                .map(|&id| escape_piece(model.vocab().bytes(id).expect("encoder ids valid")))
                .collect()
        } else {
            seq.ids.iter().map(u32::to_string).collect()
        };
        writeln!(out, "{}", rendered.join(" "))?;
    }
    Ok(())
}

/// Piece rendering escapes spaces as well, keeping pieces unambiguous in
/// space-separated output.
fn escape_piece(bytes: &[u8]) -> String {
    escape_bytes(bytes).replace(' ', "\\x20")
}

pub fn run_decode(args: crate::args::DecodeArgs) -> Result<()> {
    let model = TokenizerModel::load(&args.model)?;
    let stdin = std::io::stdin().lock();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    for line in stdin.lines() {
        let line = line.context("reading stdin")?;
        let ids: Vec<u32> = line
            .split_whitespace()
            .map(|tok| tok.parse::<u32>().map_err(|_| anyhow!("invalid token id {tok:?}")))
            .collect::<Result<_>>()?;
        let bytes = decode(&model, &ids)?;
        out.write_all(&bytes)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn run_merge(args: MergeArgs) -> Result<()> {
    let mut models = Vec::new();
    let mut budgets = Vec::new();
    for spec in &args.model {
        let (path, budget) = parse_model_budget(spec)?;
        let model = TokenizerModel::load(&path)?;
        models.push(model);
        budgets.push(budget);
    }
    let refs: Vec<&TokenizerModel> = models.iter().collect();
    let merged = merge_tokenizers(&refs, &VocabBudget::new(budgets))?;
    for warning in &merged.metadata().warnings {
        log::warn!("{warning}");
    }
    write_atomic(&args.out, merged.to_json_string().as_bytes())
}

pub fn run_vocab_stats(args: VocabStatsArgs) -> Result<()> {
    let model = TokenizerModel::load(&args.model)?;
    let rows = script_distribution(&model);
    let content = match args.format.as_str() {
        "csv" => {
            let mut out = format!(
                "# model={} learned_tokens={}\nscript,count,percentage\n",
                args.model.display(),
                model.vocab().n_learned()
            );
            for row in &rows {
                out.push_str(&format!("{},{},{:.4}\n", row.script, row.count, row.percentage));
            }
            out
        }
        "json" => {
            let value = serde_json::json!({
                "model": args.model.display().to_string(),
                "learned_tokens": model.vocab().n_learned(),
                "scripts": rows.iter().map(|r| {
                    serde_json::json!({
                        "script": r.script,
                        "count": r.count,
                        "percentage": r.percentage,
                    })
                }).collect::<Vec<_>>(),
            });
            format!("{}\n", serde_json::to_string_pretty(&value)?)
        }
        other => bail!("unknown format {other:?} (expected csv or json)"),
    };
    emit(args.out.as_deref(), &content)
}

pub fn run_eval(args: EvalArgs) -> Result<()> {
    let format = ReportFormat::parse(&args.format).map_err(config_err)?;
    let corpus_norm = NormalizationForm::parse(&args.corpus_norm).map_err(config_err)?;
    let corpus = load_manifest_corpus(&args.manifest, corpus_norm)?;

    let models: Vec<TokenizerModel> = args
        .model
        .iter()
        .map(TokenizerModel::load)
        .collect::<supertok_core::Result<_>>()?;
    let names = model_names(&args.model);
    let named: Vec<(String, &TokenizerModel)> = names
        .iter()
        .cloned()
        .zip(models.iter())
        .collect();

    let base_name: Option<String> = match args.base.as_deref() {
        None | Some("none") => None,
        Some(base_path) => {
            let canonical = PathBuf::from(base_path);
            let index = args
                .model
                .iter()
                .position(|p| p == &canonical)
                .ok_or_else(|| {
                    anyhow!("base model {base_path:?} is not among the --model arguments")
                })?;
            Some(names[index].clone())
        }
    };

    let opts = EvalOptions {
        alpha: args.alpha,
        macro_fertility: args.macro_fertility,
        bold_best: args.bold,
    };
    let report = evaluate(&named, &corpus, base_name.as_deref(), &opts)?;
    let rendered = render_report(&report, format)?;
    emit(args.out.as_deref(), &rendered)
}

pub fn run_retok_init(args: RetokInitArgs) -> Result<()> {
    let old_model = TokenizerModel::load(&args.old_model)?;
    let new_model = TokenizerModel::load(&args.new_model)?;
    let old_emb = EmbeddingMatrix::read_from(&args.old_emb)?;
    let out = retok_init(&old_model, &old_emb, &new_model)?;
    write_atomic(&args.out, &out.to_bytes())
}

pub fn run_glitch(args: GlitchArgs) -> Result<()> {
    let model = TokenizerModel::load(&args.model)?;
    let emb = EmbeddingMatrix::read_from(&args.emb)?;
    let dummy_ids: Vec<u32> = match &args.dummies {
        Some(list) => list
            .split(',')
            .map(|s| s.trim().parse::<u32>().map_err(|_| anyhow!("invalid dummy id {s:?}")))
            .collect::<Result<_>>()?,
        None => {
            let ids = model.dummy_token_ids();
            if ids.is_empty() {
                bail!("the model reserves no dummy tokens; pass --dummies explicitly");
            }
            ids
        }
    };
    let mut excluded = Vec::new();
    if !args.include_bytes {
        excluded.extend(0u32..256);
    }
    if !args.include_special {
        excluded.extend((0..model.vocab().n_special()).map(|i| 256 + i));
    }
    let opts = GlitchScanOptions {
        k: args.k,
        include_dummies: args.include_dummies,
        excluded_ids: excluded,
    };
    let result = glitch_scan(&emb, &dummy_ids, &opts)?;
    let threshold = args
        .high_id_threshold
        .unwrap_or_else(|| (model.vocab_size() as f64 * 0.9).floor() as u32);
    let counts = classify_scan(&model, &result.hits, threshold);

    let content = match args.format.as_str() {
        "csv" => {
            let mut out = format!(
                "# model={} k={} dummies={} high_id_threshold={} multiword={} high_id={}\n",
                args.model.display(),
                args.k,
                dummy_ids.iter().map(u32::to_string).collect::<Vec<_>>().join("|"),
                threshold,
                counts.multiword,
                counts.high_id,
            );
            out.push_str("rank,id,token,distance\n");
            for (rank, hit) in result.hits.iter().enumerate() {
                let token = model
                    .vocab()
                    .bytes(hit.id)
                    .map(escape_piece)
                    .unwrap_or_else(|| "?".into());
                out.push_str(&format!("{},{},{},{:.6}\n", rank + 1, hit.id, token, hit.distance));
            }
            out
        }
        "json" => {
            let value = serde_json::json!({
                "model": args.model.display().to_string(),
                "k": args.k,
                "dummies": dummy_ids,
                "high_id_threshold": threshold,
                "multiword": counts.multiword,
                "high_id": counts.high_id,
                "excluded_zero_norm": result.excluded_zero_norm,
                "hits": result.hits.iter().map(|h| serde_json::json!({
                    "id": h.id,
                    "token": model.vocab().bytes(h.id).map(escape_piece),
                    "distance": h.distance,
                })).collect::<Vec<_>>(),
            });
            format!("{}\n", serde_json::to_string_pretty(&value)?)
        }
        other => bail!("unknown format {other:?} (expected csv or json)"),
    };
    emit(args.out.as_deref(), &content)
}
