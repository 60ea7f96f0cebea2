//! Unicode normalization applied to all text before pre-tokenization.
//!
//! The same form is applied at corpus ingestion and at encode time; a model
//! records the form it was trained with so evaluation cannot silently mix
//! differently normalized text.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};
use unicode_normalization::{is_nfc, is_nfd, is_nfkc, UnicodeNormalization};

use crate::error::{Error, Result};

/// Unicode normalization form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationForm {
    /// Canonical composition.
    Nfc,
    /// Canonical decomposition.
    Nfd,
    /// Compatibility composition. The default: it folds visually identical
    /// characters (fullwidth forms, presentation variants) onto one encoding.
    #[default]
    Nfkc,
    /// No normalization; input bytes pass through unchanged.
    Identity,
}

impl NormalizationForm {
    pub fn as_str(&self) -> &'static str {
        match self {
            NormalizationForm::Nfc => "nfc",
            NormalizationForm::Nfd => "nfd",
            NormalizationForm::Nfkc => "nfkc",
            NormalizationForm::Identity => "identity",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nfc" => Ok(NormalizationForm::Nfc),
            "nfd" => Ok(NormalizationForm::Nfd),
            "nfkc" => Ok(NormalizationForm::Nfkc),
            "identity" | "none" => Ok(NormalizationForm::Identity),
            other => Err(Error::InvalidConfig(format!(
                "unknown normalization form {other:?} (expected nfc, nfd, nfkc or identity)"
            ))),
        }
    }
}

impl std::fmt::Display for NormalizationForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Normalize `text` to the requested form.
///
/// Borrows the input when it is already in the requested form, which is the
/// common case when re-normalizing at encode time.
pub fn normalize<'a>(text: &'a str, form: NormalizationForm) -> Cow<'a, str> {
    match form {
        NormalizationForm::Identity => Cow::Borrowed(text),
        NormalizationForm::Nfc => {
            if is_nfc(text) {
                Cow::Borrowed(text)
            } else {
                Cow::Owned(text.nfc().collect())
            }
        }
        NormalizationForm::Nfd => {
            if is_nfd(text) {
                Cow::Borrowed(text)
            } else {
                Cow::Owned(text.nfd().collect())
            }
        }
        NormalizationForm::Nfkc => {
            if is_nfkc(text) {
                Cow::Borrowed(text)
            } else {
                Cow::Owned(text.nfkc().collect())
            }
        }
    }
}

/// Normalize raw bytes, validating UTF-8 first.
///
/// Invalid input reports the byte offset of the first bad byte.
pub fn normalize_bytes(bytes: &[u8], form: NormalizationForm) -> Result<String> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::InvalidUtf8 {
        offset: e.valid_up_to(),
    })?;
    Ok(normalize(text, form).into_owned())
}
