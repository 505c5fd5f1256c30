//! Translation backends.
//!
//! Remote translators implement `POST /translate`:
//! request `{"source_lang", "target_lang", "texts": [...]}`,
//! response `{"texts": [...]}` of equal length. Any status other than 200 is
//! a batch failure.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::corpus::LanguageTag;

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum TranslateError {
    #[error("translator request failed: {0}")]
    Request(String),
    #[error("translator returned status {0}")]
    Status(u16),
    #[error("translator returned {found} texts for {expected} inputs")]
    LengthMismatch { expected: usize, found: usize },
}

/// Translates a batch of texts; the output has the same length and order.
pub trait Translator: Send + Sync {
    fn translate(
        &self,
        texts: &[String],
        source: LanguageTag,
        target: LanguageTag,
    ) -> Result<Vec<String>, TranslateError>;
}

/// Deterministic stand-in: prefixes each text with `[<target>] `.
#[derive(Debug, Clone, Copy, Default)]
pub struct PrefixTranslator;

impl Translator for PrefixTranslator {
    fn translate(
        &self,
        texts: &[String],
        _source: LanguageTag,
        target: LanguageTag,
    ) -> Result<Vec<String>, TranslateError> {
        Ok(texts.iter().map(|t| format!("[{target}] {t}")).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslateRequest {
    pub source_lang: LanguageTag,
    pub target_lang: LanguageTag,
    pub texts: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslateResponse {
    pub texts: Vec<String>,
}

/// Client for a remote `/translate` service.
#[derive(Debug, Clone)]
pub struct HttpTranslator {
    url: String,
    agent: ureq::Agent,
}

impl HttpTranslator {
    /// `base_url` is the service root, e.g. `http://127.0.0.1:8080`.
    pub fn new(base_url: &str, timeout: Duration) -> Self {
        HttpTranslator {
            url: format!("{}/translate", base_url.trim_end_matches('/')),
            agent: ureq::AgentBuilder::new().timeout(timeout).build(),
        }
    }
}

impl Translator for HttpTranslator {
    fn translate(
        &self,
        texts: &[String],
        source: LanguageTag,
        target: LanguageTag,
    ) -> Result<Vec<String>, TranslateError> {
        let request = TranslateRequest {
            source_lang: source,
            target_lang: target,
            texts: texts.to_vec(),
        };
        let response = match self.agent.post(&self.url).send_json(&request) {
            Ok(r) => r,
            Err(ureq::Error::Status(code, _)) => return Err(TranslateError::Status(code)),
            Err(e) => return Err(TranslateError::Request(e.to_string())),
        };
        if response.status() != 200 {
            return Err(TranslateError::Status(response.status()));
        }
        let body: TranslateResponse = response
            .into_json()
            .map_err(|e| TranslateError::Request(format!("malformed response: {e}")))?;
        if body.texts.len() != texts.len() {
            return Err(TranslateError::LengthMismatch {
                expected: texts.len(),
                found: body.texts.len(),
            });
        }
        Ok(body.texts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefix_stub() {
        let out = PrefixTranslator
            .translate(
                &["wireless headphones".into()],
                LanguageTag::En,
                LanguageTag::De,
            )
            .unwrap();
        assert_eq!(out, ["[de] wireless headphones"]);
    }

    #[test]
    fn wire_shapes() {
        let req = TranslateRequest {
            source_lang: LanguageTag::En,
            target_lang: LanguageTag::Pl,
            texts: vec!["a".into(), "b".into()],
        };
        assert_eq!(
            serde_json::to_string(&req).unwrap(),
            r#"{"source_lang":"en","target_lang":"pl","texts":["a","b"]}"#
        );
        let resp: TranslateResponse = serde_json::from_str(r#"{"texts":["x"]}"#).unwrap();
        assert_eq!(resp.texts, ["x"]);
    }
}
