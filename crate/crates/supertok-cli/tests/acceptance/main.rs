//! Acceptance suite: one test per criterion, each printing a PASS line
//! (visible with `--nocapture`). Run with
//! `cargo test -p supertok-cli --test acceptance`.


use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use supertok_core::codec::{decode, Encoder};
use supertok_core::corpus::{Corpus, EvalLine};
use supertok_core::embedding::{
    classify_scan, glitch_scan, retok_init, EmbeddingMatrix, GlitchScanOptions,
};
use supertok_core::eval::{evaluate, EvalOptions};
use supertok_core::metrics::{self, LineStats, TokenHistogram};
use supertok_core::model::MergeStage;
use supertok_core::normalize::{normalize, NormalizationForm};
use supertok_core::pretokenize::{split_sentences, PreTokenPattern, SentenceDelimiterSet};
use supertok_core::trainer::{
    count_units, train, train_stage1, TrainerConfig, TrainerMode, TransitionPoint,
};
use supertok_core::vocab_ops::{merge_tokenizers, VocabBudget};
use supertok_core::TokenizerModel;

// ---------------- helpers ----------------

fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../supertok-core/fixtures")
        .join(name)
}

fn fixture_lines(name: &str) -> Vec<String> {
    std::fs::read_to_string(fixture_path(name))
        .unwrap()
        .lines()
        .filter(|l| !l.is_empty())
        .map(str::to_string)
        .collect()
}

fn corpus_of(lines: &[String], lang: &str) -> Corpus {
    Corpus::from_lines(
        lines
            .iter()
            .map(|l| EvalLine {
                lang: lang.into(),
                text: l.clone(),
            })
            .collect(),
        NormalizationForm::Nfkc,
    )
}

fn fertility_on(model: &TokenizerModel, corpus: &Corpus) -> f64 {
    let encoder = Encoder::new(model);
    let mut tokens = 0u64;
    let mut words = 0u64;
    for line in &corpus.lines {
        let w = normalize(&line.text, corpus.stats_normalization)
            .split_whitespace()
            .count() as u64;
        if w > 0 {
            tokens += encoder.encode(&line.text).ids.len() as u64;
            words += w;
        }
    }
    tokens as f64 / words as f64
}

fn total_tokens(model: &TokenizerModel, corpus: &Corpus) -> u64 {
    let encoder = Encoder::new(model);
    corpus
        .lines
        .iter()
        .map(|l| encoder.encode(&l.text).ids.len() as u64)
        .sum()
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_supertok"))
}

fn write_manifest(dir: &Path, name: &str, entries: &[(&str, &Path)]) -> PathBuf {
    let body: Vec<String> = entries
        .iter()
        .map(|(lang, path)| {
            format!(
                "{{\"lang\": \"{lang}\", \"path\": \"{}\"}}",
                path.display().to_string().replace('\\', "/")
            )
        })
        .collect();
    let path = dir.join(name);
    std::fs::write(&path, format!("[{}]", body.join(","))).unwrap();
    path
}

/// Mixed-script sampling pools for the randomized suites.
fn script_pools() -> Vec<Vec<char>> {
    let range = |lo: u32, hi: u32| -> Vec<char> {
        (lo..=hi).filter_map(char::from_u32).collect()
    };
    vec![
        ('a'..='z')
            .chain('A'..='Z')
            .chain("0123456789 .,!?'-".chars())
            .collect(),
        range(0x0901, 0x094D), // Devanagari letters + matras + virama
        range(0x0981, 0x09CD), // Bengali
        range(0x0B85, 0x0BCD), // Tamil
        range(0x1F600, 0x1F64F), // emoji
        range(0x0300, 0x0318), // combining diacritics
        vec![' ', '\u{0964}', '.', '!', '\n', '\t'],
    ]
}

fn random_string(rng: &mut ChaCha8Rng, pools: &[Vec<char>], max_len: usize) -> String {
    let n_pools = 1 + rng.gen_range(0..3);
    let chosen: Vec<&Vec<char>> = (0..n_pools)
        .map(|_| &pools[rng.gen_range(0..pools.len())])
        .collect();
    let len = rng.gen_range(0..max_len);
    (0..len)
        .map(|_| {
            let pool = chosen[rng.gen_range(0..chosen.len())];
            pool[rng.gen_range(0..pool.len())]
        })
        .collect()
}

fn seeded_embeddings(rows: u32, dim: u32, fingerprint: [u8; 32], seed: u64) -> EmbeddingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f32> = (0..rows as usize * dim as usize)
        .map(|_| rng.gen_range(-1.0f32..1.0))
        .collect();
    EmbeddingMatrix::new(rows, dim, values, fingerprint).unwrap()
}

// ---------------- criteria ----------------

/// Criterion 1: on >= 10 small corpora, the trainer's full merge list equals
/// the naive quadratic reference exactly, in under 5 seconds total.
#[test]
fn criterion_01_bpe_oracle_equivalence() {
    let hindi = fixture_lines("devanagari.txt");
    let bengali = fixture_lines("bengali.txt");
    let tamil = fixture_lines("tamil.txt");
    let lines = |items: &[&str]| -> Vec<String> { items.iter().map(|s| s.to_string()).collect() };

    struct Case {
        name: &'static str,
        lines: Vec<String>,
        configure: fn(&mut TrainerConfig),
    }
    let cases = vec![
        Case {
            name: "english morphology",
            lines: lines(&["low low lower lowest", "newer newest wider widest", "low lower"]),
            configure: |c| {
                c.pattern = PreTokenPattern::Whitespace;
                c.vocab_size = 276;
                c.transition = TransitionPoint::Absolute(276);
                c.min_pair_frequency = 1;
            },
        },
        Case {
            name: "collocations two-stage",
            lines: lines(&[
                "in the end. in the end. by the sea.",
                "in the end we sailed by the sea.",
                "by the sea, in the end.",
            ]),
            configure: |c| {
                c.pattern = PreTokenPattern::Gpt2Style;
                c.vocab_size = 290;
                c.transition = TransitionPoint::Fraction(0.93);
                c.min_pair_frequency = 1;
            },
        },
        Case {
            name: "devanagari",
            lines: hindi[..8].to_vec(),
            configure: |c| {
                c.pattern = PreTokenPattern::ScriptAgnostic;
                c.vocab_size = 300;
                c.transition = TransitionPoint::Fraction(0.9);
            },
        },
        Case {
            name: "bengali",
            lines: bengali[..6].to_vec(),
            configure: |c| {
                c.pattern = PreTokenPattern::ScriptAgnostic;
                c.vocab_size = 290;
                c.transition = TransitionPoint::Absolute(280);
                c.min_pair_frequency = 1;
            },
        },
        Case {
            name: "tamil nfc",
            lines: tamil[..6].to_vec(),
            configure: |c| {
                c.pattern = PreTokenPattern::ScriptAgnostic;
                c.normalization = NormalizationForm::Nfc;
                c.vocab_size = 285;
                c.transition = TransitionPoint::Absolute(270);
            },
        },
        Case {
            name: "digits and punctuation",
            lines: lines(&["a1234b c99 x-y-z! (v2.0)", "a1234b c99 once more (v2.0)!"]),
            configure: |c| {
                c.pattern = PreTokenPattern::ScriptAgnostic;
                c.vocab_size = 272;
                c.transition = TransitionPoint::Absolute(268);
                c.min_pair_frequency = 1;
            },
        },
        Case {
            name: "emoji and accents",
            lines: lines(&["caf\u{00e9} \u{2615} na\u{00ef}ve \u{1F600} touch\u{00e9}", "caf\u{00e9} na\u{00ef}ve \u{1F600}"]),
            configure: |c| {
                c.pattern = PreTokenPattern::Gpt2Style;
                c.normalization = NormalizationForm::Nfd;
                c.vocab_size = 280;
                c.transition = TransitionPoint::Fraction(0.95);
                c.min_pair_frequency = 1;
            },
        },
        Case {
            name: "whitespace variety",
            lines: lines(&["a  b\t\tc   d", "a  b\tc  d", "  indent  twice  "]),
            configure: |c| {
                c.pattern = PreTokenPattern::Whitespace;
                c.vocab_size = 270;
                c.transition = TransitionPoint::Absolute(265);
                c.min_pair_frequency = 1;
            },
        },
        Case {
            name: "repeated unit",
            lines: lines(&["ababab ababab ababab", "ababab"]),
            configure: |c| {
                c.pattern = PreTokenPattern::Whitespace;
                c.vocab_size = 266;
                c.transition = TransitionPoint::Absolute(262);
            },
        },
        Case {
            name: "contractions with specials",
            lines: lines(&["I'm you're we'll it's", "I'm you're we'll", "it's I'm"]),
            configure: |c| {
                c.pattern = PreTokenPattern::Gpt2Style;
                c.vocab_size = 280;
                c.transition = TransitionPoint::Absolute(270);
                c.min_pair_frequency = 1;
                c.special_tokens = vec!["<pad>".into(), "<eos>".into()];
                c.reserved_dummy_tokens = 2;
            },
        },
        Case {
            name: "one-stage english",
            lines: lines(&["to be or not to be", "to be or not to be", "not to be or to be"]),
            configure: |c| {
                c.mode = TrainerMode::OneStage;
                c.vocab_size = 280;
                c.min_pair_frequency = 1;
            },
        },
        Case {
            name: "one-stage sentences",
            lines: lines(&["Hi there. Bye now. Hi there.", "Hi there. Bye now."]),
            configure: |c| {
                c.mode = TrainerMode::OneStage;
                c.vocab_size = 290;
            },
        },
    ];
    assert!(cases.len() >= 10);

    let start = Instant::now();
    for case in &cases {
        let bytes: usize = case.lines.iter().map(|l| l.len() + 1).sum();
        assert!(bytes <= 1024, "{}: corpus too large ({bytes} bytes)", case.name);
        let mut config = TrainerConfig::new(0);
        config.normalization = NormalizationForm::Identity;
        (case.configure)(&mut config);
        if config.vocab_size == 0 {
            config.vocab_size = 280;
        }
        let corpus = corpus_of(&case.lines, "eng");
        let model = train(&config, &corpus).unwrap_or_else(|e| panic!("{}: {e}", case.name));
        let expected = naive::naive_train(&config, &case.lines);
        let actual: Vec<naive::NaiveRule> = model
            .merges()
            .iter()
            .map(|r| naive::NaiveRule {
                left: r.left,
                right: r.right,
                stage: r.stage,
            })
            .collect();
        assert_eq!(
            actual, expected,
            "{}: trainer and naive reference disagree",
            case.name
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 5.0,
        "oracle equivalence took {elapsed:?}, budget is 5 s"
    );
    println!(
        "PASS criterion 01: BPE oracle equivalence on {} corpora in {elapsed:?}",
        cases.len()
    );
}

fn roundtrip_model() -> TokenizerModel {
    let mut lines = fixture_lines("english_collocations.txt");
    lines.extend(fixture_lines("devanagari.txt"));
    lines.extend(fixture_lines("bengali.txt"));
    lines.extend(fixture_lines("tamil.txt"));
    let corpus = Corpus::from_lines(
        lines
            .into_iter()
            .map(|text| EvalLine { lang: "mix".into(), text })
            .collect(),
        NormalizationForm::Identity,
    );
    let mut config = TrainerConfig::new(480);
    config.normalization = NormalizationForm::Identity;
    config.pattern = PreTokenPattern::ScriptAgnostic;
    config.transition = TransitionPoint::Fraction(0.9);
    train(&config, &corpus).unwrap()
}

/// Criterion 2: decode(encode(s)) == s for 10,000 randomized mixed-script
/// strings, zero failures.
#[test]
fn criterion_02_roundtrip_random_utf8() {
    let model = roundtrip_model();
    let encoder = Encoder::new(&model);
    let pools = script_pools();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5317);
    let mut failures = 0usize;
    for _ in 0..10_000 {
        let text = random_string(&mut rng, &pools, 80);
        let seq = encoder.encode(&text);
        let bytes = decode(&model, &seq.ids).unwrap();
        if bytes != text.as_bytes() {
            failures += 1;
        }
    }
    assert_eq!(failures, 0, "{failures} roundtrip failures out of 10000");
    println!("PASS criterion 02: 10000 random mixed-script roundtrips, zero failures");
}

/// Criterion 3: two-stage training at t = 90% of |V| strictly beats the
/// pure-subword model at equal |V| on the collocation fixture, in total
/// tokens and in fertility.
#[test]
fn criterion_03_stage2_compression_gain() {
    let english = corpus_of(&fixture_lines("english_collocations.txt"), "eng");
    let mut two = TrainerConfig::new(400);
    two.transition = TransitionPoint::Fraction(0.9);
    let mut subword_only = two.clone();
    subword_only.transition = TransitionPoint::Fraction(1.0);

    let m_two = train(&two, &english).unwrap();
    let m_sub = train(&subword_only, &english).unwrap();
    assert!(m_two.merges().iter().any(|r| r.stage == MergeStage::Superword));
    assert!(m_sub.merges().iter().all(|r| r.stage == MergeStage::Subword));

    let (tokens_two, tokens_sub) = (total_tokens(&m_two, &english), total_tokens(&m_sub, &english));
    assert!(
        tokens_two < tokens_sub,
        "two-stage {tokens_two} tokens vs subword-only {tokens_sub}"
    );
    let (fert_two, fert_sub) = (fertility_on(&m_two, &english), fertility_on(&m_sub, &english));
    assert!(
        fert_two < fert_sub,
        "two-stage fertility {fert_two} vs subword-only {fert_sub}"
    );
    println!(
        "PASS criterion 03: stage-2 gain (tokens {tokens_two} < {tokens_sub}, \
         fertility {fert_two:.4} < {fert_sub:.4})"
    );
}

/// Criterion 4: no superword token contains a delimiter, and no emitted
/// token spans a sentence boundary on 1,000 random multi-sentence lines.
#[test]
fn criterion_04_sentence_boundary_safety() {
    let model = roundtrip_model();
    let delims = model.delims().clone();

    // Exhaustive vocabulary scan.
    for rule in model.merges() {
        if rule.stage == MergeStage::Superword {
            let bytes = model.vocab().bytes(rule.result).unwrap();
            assert!(
                !delims.intersects_bytes(bytes),
                "superword token {} contains a sentence delimiter",
                rule.result
            );
        }
    }

    // Random multi-sentence lines assembled from fixture fragments.
    let fragments: Vec<String> = fixture_lines("english_collocations.txt")
        .into_iter()
        .chain(fixture_lines("devanagari.txt"))
        .map(|l| l.trim_end_matches(['.', '\u{0964}']).to_string())
        .collect();
    let enders = ['.', '!', '?', '\u{0964}'];
    let encoder = Encoder::new(&model);
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0DA);
    for _ in 0..1_000 {
        let n = rng.gen_range(2..=5);
        let mut line = String::new();
        for i in 0..n {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&fragments[rng.gen_range(0..fragments.len())]);
            line.push(enders[rng.gen_range(0..enders.len())]);
        }
        // Identity normalization: token offsets map directly onto the line.
        let seq = encoder.encode(&line);
        let boundaries: Vec<(usize, usize)> = split_sentences(&line, &delims)
            .iter()
            .map(|s| (s.byte_start, s.byte_end))
            .collect();
        let mut offset = 0usize;
        for &id in &seq.ids {
            let len = model.vocab().bytes(id).unwrap().len();
            let inside_one = boundaries
                .iter()
                .any(|&(start, end)| offset >= start && offset + len <= end);
            assert!(
                inside_one,
                "token {id} at bytes {offset}..{} spans a sentence boundary in {line:?}",
                offset + len
            );
            offset += len;
        }
        assert_eq!(offset, line.len());
    }
    println!("PASS criterion 04: sentence-boundary safety (vocab scan + 1000 random lines)");
}

/// Criterion 5: on the Devanagari fixture, stage-1 training with GPT-2
/// pre-tokenization yields fertility at least 1.5x the script-agnostic
/// rule's at the same budget.
#[test]
fn criterion_05_pretokenization_direction() {
    let hindi = corpus_of(&fixture_lines("devanagari.txt"), "hi");
    let mut config_script = TrainerConfig::new(650);
    config_script.transition = TransitionPoint::Fraction(1.0);
    config_script.pattern = PreTokenPattern::ScriptAgnostic;
    config_script.min_pair_frequency = 1;
    let mut config_gpt2 = config_script.clone();
    config_gpt2.pattern = PreTokenPattern::Gpt2Style;

    let units_script = count_units(
        &hindi,
        config_script.pattern,
        config_script.normalization,
        &config_script.delims,
    )
    .unwrap();
    let units_gpt2 = count_units(
        &hindi,
        config_gpt2.pattern,
        config_gpt2.normalization,
        &config_gpt2.delims,
    )
    .unwrap();
    let m_script = train_stage1(&config_script, &units_script).unwrap();
    let m_gpt2 = train_stage1(&config_gpt2, &units_gpt2).unwrap();

    let fert_script = fertility_on(&m_script, &hindi);
    let fert_gpt2 = fertility_on(&m_gpt2, &hindi);
    let ratio = fert_gpt2 / fert_script;
    assert!(
        ratio >= 1.5,
        "gpt2 {fert_gpt2:.4} / script-agnostic {fert_script:.4} = {ratio:.3} < 1.5"
    );
    println!(
        "PASS criterion 05: pre-tokenization direction \
         (gpt2 {fert_gpt2:.4} vs script-agnostic {fert_script:.4}, ratio {ratio:.2})"
    );
}

/// Criterion 6: rule-stacking two monolingual tokenizers is no better than
/// unified training on the concatenated corpus, on the mixed evaluation set.
#[test]
fn criterion_06_merged_vs_unified() {
    let english = corpus_of(&fixture_lines("english_collocations.txt"), "eng");
    let hindi = corpus_of(&fixture_lines("hindi_mixed.txt"), "hi");
    let mixed = Corpus::from_lines(
        english.lines.iter().chain(hindi.lines.iter()).cloned().collect(),
        NormalizationForm::Nfkc,
    );

    let budget = 120u32;
    let mut mono = TrainerConfig::new(256 + budget);
    mono.transition = TransitionPoint::Fraction(0.9);
    let m_eng = train(&mono, &english).unwrap();
    let m_hi = train(&mono, &hindi).unwrap();
    assert_eq!(m_eng.vocab().n_learned(), budget);
    assert_eq!(m_hi.vocab().n_learned(), budget);
    let merged = merge_tokenizers(
        &[&m_eng, &m_hi],
        &VocabBudget::new(vec![budget, budget]),
    )
    .unwrap();

    let mut unified = TrainerConfig::new(256 + 2 * budget);
    unified.transition = TransitionPoint::Fraction(0.9);
    let m_unified = train(&unified, &mixed).unwrap();

    let fert_merged = fertility_on(&merged, &mixed);
    let fert_unified = fertility_on(&m_unified, &mixed);
    assert!(
        fert_merged >= fert_unified,
        "merged {fert_merged:.4} < unified {fert_unified:.4}"
    );
    println!(
        "PASS criterion 06: merged {fert_merged:.4} >= unified {fert_unified:.4} on the mixed set"
    );
}

/// Criterion 7: metric identities.
#[test]
fn criterion_07_metric_identities() {
    // nsl(m, m) == 1.0 exactly, for every language cell.
    let model = roundtrip_model();
    let corpus = Corpus::from_lines(
        fixture_lines("english_collocations.txt")
            .into_iter()
            .map(|text| EvalLine { lang: "eng".into(), text })
            .chain(
                fixture_lines("devanagari.txt")
                    .into_iter()
                    .map(|text| EvalLine { lang: "hi".into(), text }),
            )
            .collect(),
        NormalizationForm::Nfkc,
    );
    let models = vec![("m".to_string(), &model)];
    let report = evaluate(&models, &corpus, Some("m"), &EvalOptions::default()).unwrap();
    for cell in &report.cells {
        assert_eq!(cell.nsl, Some(1.0), "nsl(m, m) must be exactly 1.0");
    }

    // bytes_per_token of a byte-fallback-only model == 1.0 exactly.
    let byte_model = supertok_core::model::ModelBuilder::new(
        NormalizationForm::Nfkc,
        PreTokenPattern::Whitespace,
        SentenceDelimiterSet::default(),
        vec![],
        0,
    )
    .unwrap()
    .finish(supertok_core::model::ModelMetadata::default());
    let ascii_corpus = corpus_of(
        &["plain ascii lines only".to_string(), "more plain text".to_string()],
        "eng",
    );
    let models = vec![("bytes".to_string(), &byte_model)];
    let report = evaluate(&models, &ascii_corpus, None, &EvalOptions::default()).unwrap();
    assert_eq!(report.cells[0].bytes_per_token, Some(1.0));

    // Renyi entropy of uniform-over-8 is 3 bits across alpha values.
    let mut uniform = TokenHistogram::new();
    for id in 0..8 {
        uniform.add(id, 7);
    }
    for alpha in [0.5, 1.0, 2.0, 2.5] {
        let h = metrics::renyi_entropy(&uniform, alpha).unwrap();
        assert!((h - 3.0).abs() < 1e-12, "alpha {alpha}: {h}");
    }

    // H_alpha nonincreasing in alpha over 1,000 random histograms.
    let mut rng = ChaCha8Rng::seed_from_u64(0xA1FA);
    let alphas = [0.25, 0.5, 1.0, 1.001, 1.5, 2.0, 2.5, 4.0];
    for _ in 0..1_000 {
        let mut hist = TokenHistogram::new();
        let distinct = rng.gen_range(1..40u32);
        for id in 0..distinct {
            hist.add(id, rng.gen_range(1..300u64));
        }
        let values: Vec<f64> = alphas
            .iter()
            .map(|&a| metrics::renyi_entropy(&hist, a).unwrap())
            .collect();
        for pair in values.windows(2) {
            assert!(pair[0] >= pair[1] - 1e-9, "{values:?}");
        }
        // H_{1.001} within 1e-3 bits of Shannon.
        let shannon = values[2];
        let near = values[3];
        assert!((shannon - near).abs() < 1e-3, "{shannon} vs {near}");
    }
    println!("PASS criterion 07: metric identities");
}

/// Criterion 8: the normalization ablation table is reproduced bit-for-bit
/// (hence to 4 decimal places) across repeated runs.
#[test]
fn criterion_08_normalization_ablation_determinism() {
    let dir = tempfile_dir();
    let train_manifest = write_manifest(
        &dir,
        "train.json",
        &[("hi", &fixture_path("devanagari.txt"))],
    );
    let eval_manifest = write_manifest(
        &dir,
        "eval.json",
        &[
            ("eng", &fixture_path("english_collocations.txt")),
            ("hi", &fixture_path("devanagari.txt")),
        ],
    );
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = dir.join(format!("norm_ablation_{run}.md"));
        let status = bin()
            .args([
                "ablate",
                "--corpus",
                train_manifest.to_str().unwrap(),
                "--eval-manifest",
                eval_manifest.to_str().unwrap(),
                "--axis",
                "norm",
                "--values",
                "nfc,nfd,nfkc",
                "--vocab-size",
                "400",
                "--transition",
                "90%",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read_to_string(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "ablation runs differ");
    for form in ["nfc", "nfd", "nfkc"] {
        assert!(outputs[0].contains(&format!("| {form} |")), "{}", outputs[0]);
    }
    // 4-decimal cells present
    let four_dp = outputs[0]
        .lines()
        .filter(|l| l.starts_with("| nf"))
        .all(|l| l.split('|').filter(|c| c.contains('.')).all(|c| {
            let v = c.trim();
            v.split('.').nth(1).map(|frac| frac.len() == 4).unwrap_or(false)
        }));
    assert!(four_dp, "expected 4-decimal cells:\n{}", outputs[0]);
    println!("PASS criterion 08: normalization ablation table deterministic across runs");
}

fn tempfile_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!(
        "supertok-acceptance-{}-{:?}",
        std::process::id(),
        std::thread::current().id()
    ));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Criterion 9: vocabulary-swap initialization matches an independent oracle
/// bit-for-bit; shared tokens are bit-copied.
#[test]
fn criterion_09_retok_initialization() {
    let old_corpus = corpus_of(&fixture_lines("english_collocations.txt"), "eng");
    let mut old_config = TrainerConfig::new(380);
    old_config.transition = TransitionPoint::Fraction(0.9);
    let old_model = train(&old_config, &old_corpus).unwrap();

    let mut new_lines = fixture_lines("devanagari.txt");
    new_lines.extend(fixture_lines("english_collocations.txt").into_iter().take(20));
    let new_corpus = corpus_of(&new_lines, "mix");
    let mut new_config = TrainerConfig::new(330);
    new_config.transition = TransitionPoint::Fraction(0.9);
    let new_model = train(&new_config, &new_corpus).unwrap();
    assert!(new_model.vocab().n_learned() >= 50, "fixture needs >= 50 swapped tokens");

    let dim = 8u32;
    let old_emb = seeded_embeddings(old_model.vocab_size(), dim, old_model.fingerprint(), 0xEE);
    let out = retok_init(&old_model, &old_emb, &new_model).unwrap();
    assert_eq!(out.rows(), new_model.vocab_size());
    assert_eq!(out.fingerprint(), &new_model.fingerprint());

    // Independent recomputation: copy when the byte string exists in the old
    // vocabulary, otherwise mean (f64, ascending id order) of the old-codec
    // decomposition.
    let encoder = Encoder::new(&old_model);
    let mut shared = 0u32;
    for id in 0..new_model.vocab_size() {
        let bytes = new_model.vocab().bytes(id).unwrap();
        let got = out.row(id).unwrap();
        if let Some(old_id) = old_model.vocab().id_of(bytes) {
            shared += 1;
            let expect = old_emb.row(old_id).unwrap();
            assert!(
                got.iter().zip(expect).all(|(a, b)| a.to_bits() == b.to_bits()),
                "shared token {id} was not bit-copied"
            );
        } else {
            let mut pieces = encoder.encode_raw(bytes).ids;
            if pieces.is_empty() {
                pieces = bytes.iter().map(|&b| u32::from(b)).collect();
            }
            pieces.sort_unstable();
            let mut acc = vec![0f64; dim as usize];
            for &piece in &pieces {
                for (a, &v) in acc.iter_mut().zip(old_emb.row(piece).unwrap()) {
                    *a += f64::from(v);
                }
            }
            let k = pieces.len() as f64;
            for (j, a) in acc.into_iter().enumerate() {
                let expect = (a / k) as f32;
                assert_eq!(
                    got[j].to_bits(),
                    expect.to_bits(),
                    "token {id} dim {j}: oracle deviates"
                );
            }
        }
    }
    assert!(shared >= 256, "byte tokens are always shared");
    println!(
        "PASS criterion 09: vocabulary-swap init exact on {} rows ({} shared)",
        out.rows(),
        shared
    );
}

/// Criterion 10: the scan equals exhaustive search on a random matrix;
/// planted rows rank first at distance zero; multiword counts are monotone
/// in K.
#[test]
fn criterion_10_glitch_scan() {
    // Exhaustive equality on a 100 x 8 random matrix.
    let mut emb = seeded_embeddings(100, 8, [9u8; 32], 0x61);
    let dummy_ids = [96u32, 97];
    let dummy_row: Vec<f32> = emb.row(96).unwrap().to_vec();
    emb.set_row(97, &dummy_row).unwrap();
    for planted in [5u32, 23, 71] {
        emb.set_row(planted, &dummy_row).unwrap();
    }
    let k = 98;
    let result = glitch_scan(
        &emb,
        &dummy_ids,
        &GlitchScanOptions { k, ..Default::default() },
    )
    .unwrap();

    // Independent exhaustive computation.
    let reference: Vec<f64> = {
        let a = emb.row(96).unwrap();
        let b = emb.row(97).unwrap();
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (f64::from(x) + f64::from(y)) / 2.0)
            .collect()
    };
    let dot = |u: &[f64], v: &[f64]| -> f64 { u.iter().zip(v).map(|(a, b)| a * b).sum() };
    let mut expected: Vec<(u32, f64)> = (0..100u32)
        .filter(|id| !dummy_ids.contains(id))
        .map(|id| {
            let row: Vec<f64> = emb.row(id).unwrap().iter().map(|&v| {
                // match the implementation's f32 centroid exactly
                f64::from(v)
            }).collect();
            let reference_f32: Vec<f64> = reference.iter().map(|&v| f64::from(v as f32)).collect();
            let d = 1.0 - dot(&row, &reference_f32)
                / (dot(&row, &row) * dot(&reference_f32, &reference_f32)).sqrt();
            (id, d)
        })
        .collect();
    expected.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
    expected.truncate(k);

    assert_eq!(result.hits.len(), expected.len());
    for (hit, (id, distance)) in result.hits.iter().zip(&expected) {
        assert_eq!(hit.id, *id);
        assert_eq!(hit.distance.to_bits(), distance.to_bits());
    }

    // Planted rows first, at exactly zero.
    let top: Vec<u32> = result.hits[..3].iter().map(|h| h.id).collect();
    assert_eq!(top, vec![5, 23, 71]);
    for hit in &result.hits[..3] {
        assert_eq!(hit.distance, 0.0);
    }

    // Multiword counts monotone over K in {10, 50, 100} on a trained model.
    let model = roundtrip_model();
    let emb = seeded_embeddings(model.vocab_size(), 8, model.fingerprint(), 0x71C);
    let dummies = [300u32, 301];
    let mut last = None;
    for k in [10usize, 50, 100] {
        let scan = glitch_scan(
            &emb,
            &dummies,
            &GlitchScanOptions {
                k,
                include_dummies: false,
                excluded_ids: (0u32..256).collect(),
            },
        )
        .unwrap();
        let counts = classify_scan(&model, &scan.hits, (model.vocab_size() as f64 * 0.9) as u32);
        if let Some((prev_multi, prev_high)) = last {
            assert!(counts.multiword >= prev_multi, "multiword count not monotone");
            assert!(counts.high_id >= prev_high, "high-id count not monotone");
        }
        last = Some((counts.multiword, counts.high_id));
    }
    println!("PASS criterion 10: glitch scan equals exhaustive search; counts monotone in K");
}

/// Criterion 11: train, eval and ablate produce bit-identical files across
/// two consecutive runs.
#[test]
fn criterion_11_cli_determinism() {
    let dir = tempfile_dir();
    let train_manifest = write_manifest(
        &dir,
        "train2.json",
        &[
            ("eng", &fixture_path("english_collocations.txt")),
            ("hi", &fixture_path("devanagari.txt")),
        ],
    );

    // train twice
    let mut model_bytes = Vec::new();
    for run in 0..2 {
        let out = dir.join(format!("det_model_{run}.json"));
        let status = bin()
            .args([
                "train",
                "--corpus",
                train_manifest.to_str().unwrap(),
                "--vocab-size",
                "420",
                "--transition",
                "90%",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        model_bytes.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(model_bytes[0], model_bytes[1], "train output differs across runs");

    // eval twice (JSON keeps full precision)
    let model_path = dir.join("det_model_0.json");
    let mut eval_bytes = Vec::new();
    for run in 0..2 {
        let out = dir.join(format!("det_report_{run}.json"));
        let status = bin()
            .args([
                "eval",
                "--manifest",
                train_manifest.to_str().unwrap(),
                "--model",
                model_path.to_str().unwrap(),
                "--base",
                model_path.to_str().unwrap(),
                "--format",
                "json",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        eval_bytes.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(eval_bytes[0], eval_bytes[1], "eval output differs across runs");

    // ablate twice, in parallel mode
    let mut ablate_bytes = Vec::new();
    for run in 0..2 {
        let out = dir.join(format!("det_ablation_{run}.md"));
        let status = bin()
            .args([
                "ablate",
                "--corpus",
                train_manifest.to_str().unwrap(),
                "--eval-manifest",
                train_manifest.to_str().unwrap(),
                "--axis",
                "transition",
                "--values",
                "80%,90%,100%",
                "--vocab-size",
                "380",
                "--jobs",
                "3",
                "--out",
                out.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        ablate_bytes.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(ablate_bytes[0], ablate_bytes[1], "ablate output differs across runs");
    println!("PASS criterion 11: train/eval/ablate bit-identical across consecutive runs");
}
