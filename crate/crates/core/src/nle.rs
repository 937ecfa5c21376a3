//! Template assembly of the natural-language explanation. No text is
//! generated here; the output is a fixed frame around the verdict and the
//! rationale.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::VerdictLabel;
use crate::rationale::Rationale;
use crate::verdict::VerdictPrediction;

pub const NLE_PREFIX: &str = "The evidence ";
pub const NLE_CONNECTIVE: &str = " the claim because ";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NleError {
    #[error("prediction is for `{prediction}` but rationale is for `{rationale}`")]
    RecordMismatch { prediction: String, rationale: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NleText {
    pub record_id: String,
    pub text: String,
    pub verdict_word: String,
    pub rationale_text: String,
}

pub fn verdict_word(label: VerdictLabel) -> &'static str {
    match label {
        VerdictLabel::Supports => "supports",
        VerdictLabel::Refutes => "refutes",
    }
}

pub fn compose_nle(prediction: &VerdictPrediction, rationale: &Rationale) -> Result<NleText, NleError> {
    if prediction.record_id != rationale.record_id {
        return Err(NleError::RecordMismatch {
            prediction: prediction.record_id.clone(),
            rationale: rationale.record_id.clone(),
        });
    }
    let word = verdict_word(prediction.label);
    Ok(NleText {
        record_id: prediction.record_id.clone(),
        text: format!("{NLE_PREFIX}{word}{NLE_CONNECTIVE}{}", rationale.text),
        verdict_word: word.to_string(),
        rationale_text: rationale.text.clone(),
    })
}

/// Inverse of the template: `(verdict_word, rationale_text)`.
pub fn parse_nle(text: &str) -> Option<(String, String)> {
    let rest = text.strip_prefix(NLE_PREFIX)?;
    let (word, rationale) = rest.split_once(NLE_CONNECTIVE)?;
    matches!(word, "supports" | "refutes").then(|| (word.to_string(), rationale.to_string()))
}
