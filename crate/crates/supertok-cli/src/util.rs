//! Shared CLI plumbing: atomic writes, config files, flag parsing helpers.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use supertok_core::corpus::{load_corpus, Corpus, CorpusManifest};
use supertok_core::normalize::NormalizationForm;
use supertok_core::trainer::TransitionPoint;

/// Write a file atomically: temp file in the same directory, then rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)
        .with_context(|| format!("writing {}", path.display()))?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

/// Emit to stdout, or atomically to `--out` when given.
pub fn emit(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, content.as_bytes()),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Parse a transition point: `90%` and `0.9` are fractions of the vocabulary
/// size, a plain integer is an absolute token count.
pub fn parse_transition(s: &str) -> Result<TransitionPoint> {
    let s = s.trim();
    if let Some(percent) = s.strip_suffix('%') {
        let value: f64 = percent
            .trim()
            .parse()
            .map_err(|_| anyhow!("invalid transition percentage {s:?}"))?;
        return Ok(TransitionPoint::Fraction(value / 100.0));
    }
    if s.contains('.') {
        let value: f64 = s.parse().map_err(|_| anyhow!("invalid transition fraction {s:?}"))?;
        return Ok(TransitionPoint::Fraction(value));
    }
    let value: u32 = s.parse().map_err(|_| anyhow!("invalid transition point {s:?}"))?;
    Ok(TransitionPoint::Absolute(value))
}

/// Parse `path:budget` for the merge subcommand (split on the last colon).
pub fn parse_model_budget(s: &str) -> Result<(PathBuf, u32)> {
    let (path, budget) = s
        .rsplit_once(':')
        .ok_or_else(|| anyhow!("expected PATH:BUDGET, got {s:?}"))?;
    let budget: u32 = budget
        .parse()
        .map_err(|_| anyhow!("invalid budget in {s:?} (expected PATH:BUDGET)"))?;
    Ok((PathBuf::from(path), budget))
}

/// Load a corpus manifest and its files, resolving relative paths against
/// the manifest's directory.
pub fn load_manifest_corpus(path: &Path, form: NormalizationForm) -> Result<Corpus> {
    let mut manifest = CorpusManifest::load(path)
        .with_context(|| format!("loading manifest {}", path.display()))?;
    if let Some(dir) = path.parent() {
        manifest.resolve_relative_to(dir);
    }
    let corpus = load_corpus(&manifest, form)?;
    if corpus.lines.is_empty() {
        bail!("manifest {} yielded an empty corpus", path.display());
    }
    Ok(corpus)
}

/// A `key=value` config file mirroring the long flag names. `#` starts a
/// comment. Values from the file override flags.
pub fn parse_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let data = std::fs::read_to_string(path)
        .with_context(|| format!("reading config file {}", path.display()))?;
    let mut entries = Vec::new();
    for (lineno, raw) in data.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            anyhow!(
                "{}:{}: expected key=value, got {raw:?}",
                path.display(),
                lineno + 1
            )
        })?;
        entries.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(entries)
}

/// Model name for reports: the file stem, or the whole path on collision.
pub fn model_names(paths: &[PathBuf]) -> Vec<String> {
    let stems: Vec<String> = paths
        .iter()
        .map(|p| {
            p.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string())
        })
        .collect();
    let unique: std::collections::HashSet<&String> = stems.iter().collect();
    if unique.len() == stems.len() {
        stems
    } else {
        paths.iter().map(|p| p.display().to_string()).collect()
    }
}
