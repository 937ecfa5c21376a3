//! Rationale generation: abstractive summaries of the evidence alone.
//!
//! The claim never reaches this module; every entry point takes evidence
//! text only.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::BackendFailure;
use crate::corpus::ClaimRecord;
use crate::text;

pub const DEFAULT_MIN_TOKENS: usize = 75;
pub const DEFAULT_MAX_TOKENS: usize = 120;
pub const DEFAULT_BACKEND_MAX_INPUT: usize = 1024;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RationaleError {
    #[error("evidence is empty")]
    EmptyEvidence,
    #[error(transparent)]
    Backend(#[from] BackendFailure),
    #[error("invalid summary config: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SummaryConfig {
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub backend_max_input: usize,
}

impl Default for SummaryConfig {
    fn default() -> Self {
        SummaryConfig {
            min_tokens: DEFAULT_MIN_TOKENS,
            max_tokens: DEFAULT_MAX_TOKENS,
            backend_max_input: DEFAULT_BACKEND_MAX_INPUT,
        }
    }
}

impl SummaryConfig {
    pub fn validate(&self) -> Result<(), RationaleError> {
        if self.min_tokens == 0 || self.min_tokens > self.max_tokens {
            return Err(RationaleError::InvalidConfig(format!(
                "need 0 < min_tokens ({}) <= max_tokens ({})",
                self.min_tokens, self.max_tokens
            )));
        }
        if self.backend_max_input < self.max_tokens {
            return Err(RationaleError::InvalidConfig(format!(
                "backend_max_input ({}) is below max_tokens ({})",
                self.backend_max_input, self.max_tokens
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rationale {
    pub record_id: String,
    pub text: String,
    pub token_length: usize,
    pub backend_id: String,
}

/// An abstractive summarizer. Decoding must be deterministic: the same
/// input always yields the same summary.
pub trait SummarizationBackend {
    fn id(&self) -> &str;

    /// Whether outputs are guaranteed to respect the requested bounds.
    fn honors_bounds(&self) -> bool;

    fn max_input_tokens(&self) -> usize;

    /// Length in the backend's own token unit.
    fn count_tokens(&self, text: &str) -> usize {
        text::whitespace_tokens(text).len()
    }

    /// Keep the first `max_tokens` tokens.
    fn truncate(&self, text: &str, max_tokens: usize) -> String {
        text::whitespace_tokens(text)[..max_tokens].join(" ")
    }

    fn summarize(&self, evidence: &str, min_tokens: usize, max_tokens: usize) -> Result<String, BackendFailure>;
}

/// Lead-sentence summarizer: whole leading sentences until the minimum is
/// reached, then a hard cut at the maximum.
///
/// Evidence shorter than `min_tokens` comes back unchanged. Otherwise the
/// output is the leading whitespace tokens rejoined with single spaces.
pub fn stub_summarize(evidence: &str, config: &SummaryConfig) -> String {
    let tokens = text::whitespace_tokens(evidence);
    if tokens.len() < config.min_tokens {
        return evidence.to_string();
    }
    // Sentence boundaries always fall on whitespace, so sentence lengths
    // index straight into the evidence token stream.
    let mut take = 0;
    for sentence in text::split_sentences(evidence) {
        if take >= config.min_tokens {
            break;
        }
        take += text::whitespace_tokens(&sentence).len();
    }
    tokens[..take.min(config.max_tokens)].join(" ")
}

/// The deterministic summarizer used for tests and desk-scale runs.
#[derive(Debug, Clone)]
pub struct LeadSentenceSummarizer {
    id: String,
    max_input: usize,
}

impl LeadSentenceSummarizer {
    pub const ID: &'static str = "stub-lead";

    pub fn new(max_input: usize) -> Self {
        LeadSentenceSummarizer { id: Self::ID.to_string(), max_input }
    }
}

impl Default for LeadSentenceSummarizer {
    fn default() -> Self {
        Self::new(DEFAULT_BACKEND_MAX_INPUT)
    }
}

impl SummarizationBackend for LeadSentenceSummarizer {
    fn id(&self) -> &str {
        &self.id
    }

    fn honors_bounds(&self) -> bool {
        true
    }

    fn max_input_tokens(&self) -> usize {
        self.max_input
    }

    fn summarize(&self, evidence: &str, min_tokens: usize, max_tokens: usize) -> Result<String, BackendFailure> {
        let cfg = SummaryConfig { min_tokens, max_tokens, backend_max_input: self.max_input };
        Ok(stub_summarize(evidence, &cfg))
    }
}

/// Summarize one record's evidence into a rationale.
pub fn generate_rationale(
    record_id: &str,
    evidence: &str,
    backend: &dyn SummarizationBackend,
    config: &SummaryConfig,
) -> Result<Rationale, RationaleError> {
    config.validate()?;
    if evidence.trim().is_empty() {
        return Err(RationaleError::EmptyEvidence);
    }
    let limit = config.backend_max_input.min(backend.max_input_tokens());
    let input_len = backend.count_tokens(evidence);
    let input = if input_len > limit {
        log::warn!("record {record_id}: evidence has {input_len} tokens, truncating tail to {limit}");
        backend.truncate(evidence, limit)
    } else {
        evidence.to_string()
    };
    let input_len = input_len.min(limit);

    let text = if input_len < config.min_tokens {
        input
    } else {
        backend.summarize(&input, config.min_tokens, config.max_tokens)?
    };
    let token_length = backend.count_tokens(&text);
    if backend.honors_bounds()
        && input_len >= config.min_tokens
        && !(config.min_tokens..=config.max_tokens).contains(&token_length)
    {
        return Err(BackendFailure::new(
            backend.id(),
            format!(
                "summary of {token_length} tokens outside [{}, {}]",
                config.min_tokens, config.max_tokens
            ),
        )
        .into());
    }
    Ok(Rationale { record_id: record_id.to_string(), text, token_length, backend_id: backend.id().to_string() })
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BatchRationales {
    pub rationales: BTreeMap<String, Rationale>,
    pub failures: Vec<(String, RationaleError)>,
}

/// Generate a rationale per record. Failures are collected per id; the
/// batch always runs to the end.
pub fn batch_generate(
    records: &[ClaimRecord],
    backend: &dyn SummarizationBackend,
    config: &SummaryConfig,
) -> BatchRationales {
    let mut out = BatchRationales::default();
    for r in records {
        match generate_rationale(&r.id, &r.evidence, backend, config) {
            Ok(rat) => {
                out.rationales.insert(r.id.clone(), rat);
            }
            Err(e) => {
                log::error!("rationale for {} failed: {e}", r.id);
                out.failures.push((r.id.clone(), e));
            }
        }
    }
    out
}
