//! Verdict classification as a two-choice question-answer prompt over the
//! rationale, plus the fine-tuning driver for text-to-text backends.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::BackendFailure;
use crate::corpus::{ClaimRecord, VerdictLabel};
use crate::digest::sha256_hex;
use crate::evaluation;
use crate::rationale::Rationale;
use crate::text;

/// Fixed head of every prompt. Choice order never changes.
pub const COPA_PREFIX: &str = "copa choice1: Supports choice2: Refutes premise: ";
pub const COPA_QUESTION: &str = " question: ";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerdictError {
    #[error("prompt input `{0}` is empty")]
    EmptyInput(&'static str),
    #[error("generation `{0}` is not a verdict")]
    UndecodableGeneration(String),
    #[error("no rationale for record `{0}`")]
    MissingRationale(String),
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Backend(#[from] BackendFailure),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopaPrompt {
    pub text: String,
    pub claim: String,
    pub rationale_text: String,
    pub choice1: String,
    pub choice2: String,
}

impl CopaPrompt {
    pub fn digest(&self) -> String {
        sha256_hex(&self.text)
    }
}

/// Render the question-answer prompt with the rationale as premise and the
/// claim as question. Both parts are trimmed at the ends; inner text,
/// newlines included, is kept verbatim.
pub fn build_copa_prompt(claim: &str, rationale_text: &str) -> Result<CopaPrompt, VerdictError> {
    let claim = claim.trim();
    let rationale_text = rationale_text.trim();
    if claim.is_empty() {
        return Err(VerdictError::EmptyInput("claim"));
    }
    if rationale_text.is_empty() {
        return Err(VerdictError::EmptyInput("rationale"));
    }
    let text = format!("{COPA_PREFIX}{rationale_text}{COPA_QUESTION}{claim}");
    Ok(CopaPrompt {
        text,
        claim: claim.to_string(),
        rationale_text: rationale_text.to_string(),
        choice1: VerdictLabel::Supports.as_str().to_string(),
        choice2: VerdictLabel::Refutes.as_str().to_string(),
    })
}

/// Recover `(claim, rationale)` from a rendered prompt. Only exact for
/// parts that do not themselves contain the `" question: "` marker.
pub fn parse_copa_prompt(text: &str) -> Option<(String, String)> {
    let rest = text.strip_prefix(COPA_PREFIX)?;
    let (rationale, claim) = rest.split_once(COPA_QUESTION)?;
    Some((claim.to_string(), rationale.to_string()))
}

/// Closed-set decode of a generation into a label.
pub fn decode_verdict(raw: &str) -> Result<VerdictLabel, VerdictError> {
    match raw.trim().to_lowercase().as_str() {
        "supports" | "choice1" => Ok(VerdictLabel::Supports),
        "refutes" | "choice2" => Ok(VerdictLabel::Refutes),
        _ => Err(VerdictError::UndecodableGeneration(raw.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictPrediction {
    pub record_id: String,
    pub label: VerdictLabel,
    pub raw_generation: String,
    pub prompt_hash: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingPair {
    pub input: String,
    pub target: String,
}

/// Optimization settings. The optimizer is AdamW with cross-entropy over
/// output tokens and a constant learning rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub eval_every_steps: usize,
    pub weight_decay: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            batch_size: 8,
            learning_rate: 2e-5,
            epochs: 20,
            eval_every_steps: 350,
            weight_decay: 0.01,
            seed: 42,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), VerdictError> {
        if self.batch_size == 0 || self.eval_every_steps == 0 {
            return Err(VerdictError::InvalidConfig("batch_size and eval_every_steps must be positive".into()));
        }
        let lr_ok = self.learning_rate.is_finite() && self.learning_rate > 0.0;
        let wd_ok = self.weight_decay.is_finite() && self.weight_decay >= 0.0;
        if !lr_ok || !wd_ok {
            return Err(VerdictError::InvalidConfig("learning_rate must be positive, weight_decay non-negative".into()));
        }
        Ok(())
    }
}

/// A text-to-text model. `generate` must be deterministic for a fixed state.
pub trait Text2TextBackend {
    fn id(&self) -> &str;

    fn generate(&self, prompt: &str) -> Result<String, BackendFailure>;

    /// One optimizer update on a batch. Returns the batch's mean
    /// cross-entropy over target tokens before the update.
    fn train_step(&mut self, batch: &[TrainingPair], config: &TrainConfig) -> Result<f64, BackendFailure>;
}

pub fn classify(
    claim: &str,
    rationale: &Rationale,
    backend: &dyn Text2TextBackend,
) -> Result<VerdictPrediction, VerdictError> {
    let prompt = build_copa_prompt(claim, &rationale.text)?;
    let raw = backend.generate(&prompt.text)?;
    let label = decode_verdict(&raw)?;
    Ok(VerdictPrediction {
        record_id: rationale.record_id.clone(),
        label,
        raw_generation: raw,
        prompt_hash: prompt.digest(),
    })
}

pub fn make_training_pairs(
    records: &[ClaimRecord],
    rationales: &BTreeMap<String, Rationale>,
) -> Result<Vec<TrainingPair>, VerdictError> {
    records
        .iter()
        .map(|r| {
            let rat = rationales.get(&r.id).ok_or_else(|| VerdictError::MissingRationale(r.id.clone()))?;
            let prompt = build_copa_prompt(&r.claim, &rat.text)?;
            Ok(TrainingPair { input: prompt.text, target: r.verdict.as_str().to_string() })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLogEntry {
    pub step: usize,
    pub epoch: usize,
    /// Mean training loss over the steps since the previous entry.
    pub loss: f64,
    pub validation_macro_f1: Option<f64>,
    pub is_final: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub optimizer: String,
    pub loss_function: String,
    pub lr_schedule: String,
    pub config: TrainConfig,
    pub total_steps: usize,
    pub entries: Vec<TrainLogEntry>,
    /// Step of the kept checkpoint (best validation macro-F1).
    pub best_step: Option<usize>,
    pub best_macro_f1: Option<f64>,
    pub last_macro_f1: Option<f64>,
}

impl TrainLog {
    fn new(config: &TrainConfig) -> Self {
        TrainLog {
            optimizer: "adamw".into(),
            loss_function: "cross-entropy".into(),
            lr_schedule: "constant".into(),
            config: *config,
            total_steps: 0,
            entries: Vec::new(),
            best_step: None,
            best_macro_f1: None,
            last_macro_f1: None,
        }
    }
}

/// Macro-F1 of a backend on labelled pairs. Generations that do not decode
/// count as the wrong label.
pub fn validation_macro_f1(backend: &dyn Text2TextBackend, pairs: &[TrainingPair]) -> Result<Option<f64>, VerdictError> {
    if pairs.is_empty() {
        return Ok(None);
    }
    let mut preds = Vec::with_capacity(pairs.len());
    let mut golds = Vec::with_capacity(pairs.len());
    for p in pairs {
        let gold = decode_verdict(&p.target)?;
        let raw = backend.generate(&p.input)?;
        let pred = decode_verdict(&raw).unwrap_or_else(|_| {
            log::warn!("undecodable validation generation `{raw}`");
            gold.other()
        });
        preds.push(pred);
        golds.push(gold);
    }
    Ok(evaluation::macro_f1(&preds, &golds).ok())
}

#[derive(Default)]
struct PendingLoss {
    sum: f64,
    steps: usize,
}

type Best<B> = Option<(f64, usize, B)>;

fn checkpoint<B: Text2TextBackend + Clone>(
    backend: &B,
    validation: &[TrainingPair],
    (step, epoch): (usize, usize),
    pending: &mut PendingLoss,
    is_final: bool,
    log: &mut TrainLog,
    best: &mut Best<B>,
) -> Result<(), VerdictError> {
    let f1 = validation_macro_f1(backend, validation)?;
    let loss = if pending.steps > 0 { pending.sum / pending.steps as f64 } else { 0.0 };
    *pending = PendingLoss::default();
    log.entries.push(TrainLogEntry { step, epoch, loss, validation_macro_f1: f1, is_final });
    if let Some(f1) = f1 {
        if best.as_ref().is_none_or(|(b, _, _)| f1 > *b) {
            *best = Some((f1, step, backend.clone()));
        }
    }
    Ok(())
}

/// Fine-tune `backend` on `train` for `config.epochs` epochs.
///
/// Validation runs every `eval_every_steps` optimizer steps and once more
/// after the last step. The returned backend is the checkpoint with the
/// best validation macro-F1 (the final state when there is no validation
/// set); the log records both best and last scores.
pub fn fine_tune<B>(
    train: &[TrainingPair],
    validation: &[TrainingPair],
    config: &TrainConfig,
    mut backend: B,
) -> Result<(B, TrainLog), VerdictError>
where
    B: Text2TextBackend + Clone,
{
    config.validate()?;
    if train.is_empty() {
        return Err(VerdictError::EmptyTrainingSet);
    }
    let mut log = TrainLog::new(config);
    if config.epochs == 0 {
        return Ok((backend, log));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut best: Best<B> = None;
    let mut step = 0usize;
    let mut pending = PendingLoss::default();

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<TrainingPair> = chunk.iter().map(|&i| train[i].clone()).collect();
            pending.sum += backend.train_step(&batch, config)?;
            pending.steps += 1;
            step += 1;
            if step.is_multiple_of(config.eval_every_steps) {
                checkpoint(&backend, validation, (step, epoch), &mut pending, false, &mut log, &mut best)?;
            }
        }
    }
    checkpoint(&backend, validation, (step, config.epochs), &mut pending, true, &mut log, &mut best)?;

    log.total_steps = step;
    log.last_macro_f1 = log.entries.last().and_then(|e| e.validation_macro_f1);
    match best {
        Some((f1, best_step, state)) => {
            log.best_macro_f1 = Some(f1);
            log.best_step = Some(best_step);
            Ok((state, log))
        }
        None => Ok((backend, log)),
    }
}

/// Programmable fixture backend: prompt digest to fixed output.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureBackend {
    pub outputs: BTreeMap<String, String>,
}

impl FixtureBackend {
    pub const ID: &'static str = "stub-fixture";

    pub fn program(&mut self, prompt: &str, output: impl Into<String>) {
        self.outputs.insert(sha256_hex(prompt), output.into());
    }
}

impl Text2TextBackend for FixtureBackend {
    fn id(&self) -> &str {
        Self::ID
    }

    fn generate(&self, prompt: &str) -> Result<String, BackendFailure> {
        self.outputs
            .get(&sha256_hex(prompt))
            .cloned()
            .ok_or_else(|| BackendFailure::new(Self::ID, "prompt not programmed"))
    }

    fn train_step(&mut self, _: &[TrainingPair], _: &TrainConfig) -> Result<f64, BackendFailure> {
        Err(BackendFailure::new(Self::ID, "fixture backend cannot be trained"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct MemoryEntry {
    digest: String,
    tokens: BTreeSet<String>,
    target: String,
}

/// Trainable stub that memorizes training pairs.
///
/// Seen prompts return their target exactly; unseen prompts get the target
/// of the most token-similar (Jaccard) memorized prompt, ties going to the
/// earliest memorized entry.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemorizingBackend {
    memory: Vec<MemoryEntry>,
}

impl MemorizingBackend {
    pub const ID: &'static str = "stub-memorizing";

    /// Probability assigned to a memorized target; unseen prompts get 1/2.
    const MEMORIZED_P: f64 = 0.99;

    pub fn len(&self) -> usize {
        self.memory.len()
    }

    pub fn is_empty(&self) -> bool {
        self.memory.is_empty()
    }

    fn tokens(prompt: &str) -> BTreeSet<String> {
        let body = prompt.strip_prefix(COPA_PREFIX).unwrap_or(prompt);
        text::stat_tokens(body).into_iter().map(|t| t.to_lowercase()).collect()
    }

    fn lookup(&self, digest: &str) -> Option<&MemoryEntry> {
        self.memory.iter().find(|m| m.digest == digest)
    }
}

impl Text2TextBackend for MemorizingBackend {
    fn id(&self) -> &str {
        Self::ID
    }

    fn generate(&self, prompt: &str) -> Result<String, BackendFailure> {
        if let Some(m) = self.lookup(&sha256_hex(prompt)) {
            return Ok(m.target.clone());
        }
        let query = Self::tokens(prompt);
        let mut best: Option<(f64, &MemoryEntry)> = None;
        for m in &self.memory {
            let inter = m.tokens.intersection(&query).count() as f64;
            let union = m.tokens.union(&query).count() as f64;
            let sim = if union == 0.0 { 0.0 } else { inter / union };
            if best.is_none_or(|(b, _)| sim > b) {
                best = Some((sim, m));
            }
        }
        best.map(|(_, m)| m.target.clone())
            .ok_or_else(|| BackendFailure::new(Self::ID, "backend has not been trained"))
    }

    fn train_step(&mut self, batch: &[TrainingPair], _: &TrainConfig) -> Result<f64, BackendFailure> {
        let mut loss = 0.0;
        for pair in batch {
            let digest = sha256_hex(&pair.input);
            let p = match self.lookup(&digest) {
                Some(m) if m.target == pair.target => Self::MEMORIZED_P,
                Some(_) => 1.0 - Self::MEMORIZED_P,
                None => 0.5,
            };
            loss -= p.ln();
            match self.memory.iter_mut().find(|m| m.digest == digest) {
                Some(m) => m.target = pair.target.clone(),
                None => self.memory.push(MemoryEntry {
                    digest,
                    tokens: Self::tokens(&pair.input),
                    target: pair.target.clone(),
                }),
            }
        }
        Ok(loss / batch.len().max(1) as f64)
    }
}
