//! Training, evaluation and analysis tooling for two-stage subword/superword
//! byte-fallback BPE tokenizers.
//!
//! The crate is organized around [`model::TokenizerModel`], a self-contained
//! unit of training, serialization and evaluation:
//!
//! * [`normalize`] / [`pretokenize`] — deterministic text preparation shared
//!   by the trainer, the codec and the metrics.
//! * [`trainer`] — two-stage (subword then sentence-bounded superword) and
//!   one-stage BPE training.
//! * [`codec`] — encode/decode with UTF-8 byte fallback.
//! * [`vocab_ops`] — rule-stacking vocabulary merges and script analysis.
//! * [`metrics`] / [`eval`] — fertility, NSL, bytes-per-token and Rényi
//!   entropy over language-tagged corpora, with report rendering.
//! * [`embedding`] — vocabulary-swap embedding initialization and
//!   glitch-token scanning.

pub mod codec;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod metrics;
pub mod model;
pub mod normalize;
pub mod pretokenize;
pub mod trainer;
pub mod vocab_ops;

pub use error::{Error, Result};
pub use model::TokenizerModel;
