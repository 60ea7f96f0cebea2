//! Vocabulary-swap embedding initialization and undertrained-token scanning.
//!
//! An embedding matrix is bound to its model by a fingerprint (SHA-256 of
//! the model file), so a matrix can never silently be used with the wrong
//! vocabulary. The on-disk format is a fixed header — rows (u32 LE),
//! dim (u32 LE), fingerprint (32 bytes) — followed by row-major 32-bit
//! little-endian floats.

use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;

use crate::codec::Encoder;
use crate::error::{Error, Result};
use crate::model::TokenizerModel;
use crate::vocab_ops::is_multiword;

/// A `rows x dim` matrix of f32 values keyed by token id.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    rows: u32,
    dim: u32,
    values: Vec<f32>,
    fingerprint: [u8; 32],
}

impl EmbeddingMatrix {
    pub fn new(rows: u32, dim: u32, values: Vec<f32>, fingerprint: [u8; 32]) -> Result<Self> {
        if values.len() != rows as usize * dim as usize {
            return Err(Error::Embedding(format!(
                "value buffer holds {} floats, expected {rows} x {dim}",
                values.len()
            )));
        }
        if dim == 0 {
            return Err(Error::Embedding("embedding dimension must be positive".into()));
        }
        Ok(Self {
            rows,
            dim,
            values,
            fingerprint,
        })
    }

    pub fn zeros(rows: u32, dim: u32, fingerprint: [u8; 32]) -> Self {
        Self {
            rows,
            dim,
            values: vec![0.0; rows as usize * dim as usize],
            fingerprint,
        }
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn fingerprint(&self) -> &[u8; 32] {
        &self.fingerprint
    }

    pub fn row(&self, id: u32) -> Option<&[f32]> {
        if id < self.rows {
            let start = id as usize * self.dim as usize;
            Some(&self.values[start..start + self.dim as usize])
        } else {
            None
        }
    }

    pub fn set_row(&mut self, id: u32, row: &[f32]) -> Result<()> {
        if id >= self.rows {
            return Err(Error::Embedding(format!("row {id} out of range ({})", self.rows)));
        }
        if row.len() != self.dim as usize {
            return Err(Error::Embedding(format!(
                "row has {} values, expected {}",
                row.len(),
                self.dim
            )));
        }
        let start = id as usize * self.dim as usize;
        self.values[start..start + self.dim as usize].copy_from_slice(row);
        Ok(())
    }

    /// First row containing a non-finite value, if any.
    pub fn first_non_finite_row(&self) -> Option<u32> {
        (0..self.rows).find(|&id| self.row(id).unwrap().iter().any(|v| !v.is_finite()))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(40 + self.values.len() * 4);
        buf.extend_from_slice(&self.rows.to_le_bytes());
        buf.extend_from_slice(&self.dim.to_le_bytes());
        buf.extend_from_slice(&self.fingerprint);
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        if data.len() < 40 {
            return Err(Error::Embedding(
                "file too short for the embedding header".into(),
            ));
        }
        let rows = u32::from_le_bytes(data[0..4].try_into().unwrap());
        let dim = u32::from_le_bytes(data[4..8].try_into().unwrap());
        let mut fingerprint = [0u8; 32];
        fingerprint.copy_from_slice(&data[8..40]);
        let expected = 40 + rows as usize * dim as usize * 4;
        if data.len() != expected {
            return Err(Error::Embedding(format!(
                "{} bytes on disk, header implies {expected}",
                data.len()
            )));
        }
        let values = data[40..]
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect();
        EmbeddingMatrix::new(rows, dim, values, fingerprint)
    }

    pub fn write_to(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_bytes())
            .map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn read_from(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let data = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Self::from_bytes(&data).map_err(|e| {
            Error::Embedding(format!("{}: {e}", path.display()))
        })
    }
}

/// Initialize embeddings for `new_model` from `old_model`'s matrix.
///
/// Tokens whose byte strings exist in both vocabularies copy their row
/// bit-exactly. Every other token is encoded with the old model's codec into
/// `(t_1..t_k)` and receives the arithmetic mean of those rows: the ids are
/// summed in ascending id order in f64 and divided by `k`, so the result is
/// reproducible to the last ulp.
pub fn retok_init(
    old_model: &TokenizerModel,
    old_embeddings: &EmbeddingMatrix,
    new_model: &TokenizerModel,
) -> Result<EmbeddingMatrix> {
    if old_embeddings.fingerprint() != &old_model.fingerprint() {
        return Err(Error::Embedding(
            "embedding fingerprint does not match the old model".into(),
        ));
    }
    if old_embeddings.rows() != old_model.vocab_size() {
        return Err(Error::Embedding(format!(
            "embedding matrix has {} rows but the old model has {} tokens",
            old_embeddings.rows(),
            old_model.vocab_size()
        )));
    }
    if old_model.normalization() != new_model.normalization() {
        return Err(Error::IncompatibleModels(format!(
            "models use different normalization forms ({} vs {})",
            old_model.normalization(),
            new_model.normalization()
        )));
    }
    if let Some(id) = old_embeddings.first_non_finite_row() {
        return Err(Error::Embedding(format!(
            "non-finite value in embedding row for token id {id}"
        )));
    }

    let dim = old_embeddings.dim() as usize;
    let encoder = Encoder::new(old_model);
    let mut out = EmbeddingMatrix::zeros(
        new_model.vocab_size(),
        old_embeddings.dim(),
        new_model.fingerprint(),
    );
    for id in 0..new_model.vocab_size() {
        let bytes = new_model.vocab().bytes(id).expect("dense ids");
        if let Some(old_id) = old_model.vocab().id_of(bytes) {
            out.set_row(id, old_embeddings.row(old_id).expect("checked rows"))?;
            continue;
        }
        let mut pieces = encoder.encode_raw(bytes).ids;
        if pieces.is_empty() {
            // Normalization can erase characters (e.g. NFKC drops soft
            // hyphens); fall back to the raw byte decomposition.
            pieces = bytes.iter().map(|&b| u32::from(b)).collect();
        }
        pieces.sort_unstable();
        let mut acc = vec![0f64; dim];
        for &piece in &pieces {
            let row = old_embeddings.row(piece).expect("codec ids are in range");
            for (a, &v) in acc.iter_mut().zip(row) {
                *a += f64::from(v);
            }
        }
        let k = pieces.len() as f64;
        let row: Vec<f32> = acc.into_iter().map(|a| (a / k) as f32).collect();
        out.set_row(id, &row)?;
    }
    Ok(out)
}

/// Options for [`glitch_scan`]. Byte and special token ids are typically
/// passed in `excluded_ids`; dummy rows are excluded unless
/// `include_dummies` is set.
#[derive(Debug, Clone, Default)]
pub struct GlitchScanOptions {
    pub k: usize,
    pub include_dummies: bool,
    pub excluded_ids: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlitchHit {
    pub id: u32,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GlitchScanResult {
    /// The `k` candidates nearest the dummy centroid, ascending by cosine
    /// distance, ties broken by lower id.
    pub hits: Vec<GlitchHit>,
    /// Zero-norm rows that had to be dropped from the candidate set.
    pub excluded_zero_norm: Vec<u32>,
}

fn dot(u: &[f32], v: &[f32]) -> f64 {
    u.iter().zip(v).map(|(&a, &b)| f64::from(a) * f64::from(b)).sum()
}

/// Cosine distance `1 - u.v / sqrt((u.u)(v.v))`. The single square root
/// keeps the distance of bitwise-identical vectors at exactly zero.
fn cosine_distance(u: &[f32], v: &[f32]) -> f64 {
    1.0 - dot(u, v) / (dot(u, u) * dot(v, v)).sqrt()
}

/// Rank candidate tokens by cosine distance to the mean of the dummy rows.
pub fn glitch_scan(
    embeddings: &EmbeddingMatrix,
    dummy_ids: &[u32],
    opts: &GlitchScanOptions,
) -> Result<GlitchScanResult> {
    if dummy_ids.is_empty() {
        return Err(Error::InvalidConfig("no dummy token ids supplied".into()));
    }
    let dummies: BTreeSet<u32> = dummy_ids.iter().copied().collect();
    for &id in &dummies {
        if id >= embeddings.rows() {
            return Err(Error::InvalidConfig(format!(
                "dummy id {id} out of range ({} rows)",
                embeddings.rows()
            )));
        }
    }
    let excluded: BTreeSet<u32> = opts.excluded_ids.iter().copied().collect();
    let candidates: Vec<u32> = (0..embeddings.rows())
        .filter(|id| (opts.include_dummies || !dummies.contains(id)) && !excluded.contains(id))
        .collect();
    if opts.k > candidates.len() {
        return Err(Error::InvalidConfig(format!(
            "k = {} exceeds the {} candidate rows",
            opts.k,
            candidates.len()
        )));
    }

    // Mean of the dummy rows, summed in ascending id order.
    let dim = embeddings.dim() as usize;
    let mut reference = vec![0f64; dim];
    for &id in &dummies {
        let row = embeddings.row(id).expect("checked range");
        for (a, &v) in reference.iter_mut().zip(row) {
            *a += f64::from(v);
        }
    }
    let m = dummies.len() as f64;
    let reference: Vec<f32> = reference.into_iter().map(|a| (a / m) as f32).collect();
    if dot(&reference, &reference) == 0.0 {
        return Err(Error::Embedding(
            "dummy centroid has zero norm; cosine distances are undefined".into(),
        ));
    }

    let mut excluded_zero_norm = Vec::new();
    let mut hits: Vec<GlitchHit> = candidates
        .par_iter()
        .map(|&id| {
            let row = embeddings.row(id).expect("candidate in range");
            if dot(row, row) == 0.0 {
                None
            } else {
                Some(GlitchHit {
                    id,
                    distance: cosine_distance(row, &reference),
                })
            }
        })
        .collect::<Vec<Option<GlitchHit>>>()
        .into_iter()
        .zip(&candidates)
        .filter_map(|(hit, &id)| {
            if hit.is_none() {
                excluded_zero_norm.push(id);
                log::warn!("glitch scan: dropping zero-norm row {id}");
            }
            hit
        })
        .collect();
    hits.sort_by(|a, b| a.distance.total_cmp(&b.distance).then_with(|| a.id.cmp(&b.id)));
    hits.truncate(opts.k);
    Ok(GlitchScanResult {
        hits,
        excluded_zero_norm,
    })
}

/// Counts over a scan result: tokens whose text spans a word boundary under
/// the model's pre-tokenization pattern, and tokens with ids above the
/// threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanClassification {
    pub multiword: u64,
    pub high_id: u64,
}

pub fn classify_scan(
    model: &TokenizerModel,
    hits: &[GlitchHit],
    high_id_threshold: u32,
) -> ScanClassification {
    let mut multiword = 0u64;
    let mut high_id = 0u64;
    for hit in hits {
        if is_multiword(model, hit.id) {
            multiword += 1;
        }
        if hit.id > high_id_threshold {
            high_id += 1;
        }
    }
    ScanClassification { multiword, high_id }
}
