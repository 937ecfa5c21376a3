//! Stage-wise orchestration with persisted, provenance-stamped artifacts.
//!
//! Every store line and every JSON artifact carries the hash of the
//! configuration that produced it. Loading an upstream artifact stamped
//! with a different hash is an error, so stages from different runs never
//! mix.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::BackendFailure;
use crate::corpus::{self, ClaimRecord, CorpusError, CorpusFormat, CorpusSplits, CorpusStats, SourceBlocklist, SplitManifest, SplitName, VerdictLabel};
use crate::digest::{json_digest, sha256_hex};
use crate::evaluation::{self, AnnotationSummary, EvalError, EvalReport, NliBackend, NliReport, NliVerdict};
use crate::explain::{self, ExplainError, Granularity, HighlightDoc, Method};
use crate::nle::{self, NleError, NleText};
use crate::rationale::{self, LeadSentenceSummarizer, Rationale, RationaleError, SummarizationBackend, SummaryConfig};
use crate::text;
use crate::verdict::{self, MemorizingBackend, Text2TextBackend, TrainConfig, TrainLog, VerdictError, VerdictPrediction};

/// Reference corpus sizes used for the ingest comparison table.
pub const REFERENCE_TOTAL: usize = 4006;
pub const REFERENCE_SUPPORTS: usize = 2013;
pub const REFERENCE_REFUTES: usize = 1993;
pub const REFERENCE_SPLITS: (usize, usize, usize) = (2804, 601, 601);
pub const REFERENCE_MEAN_CLAIM_TOKENS: f64 = 17.0;
pub const REFERENCE_MEAN_EVIDENCE_TOKENS: f64 = 449.0;

pub const ENV_SUMMARIZER: &str = "CLAIMWISE_SUMMARIZER";
pub const ENV_CLASSIFIER: &str = "CLAIMWISE_CLASSIFIER";
pub const ENV_NLI: &str = "CLAIMWISE_NLI";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("stage `{stage}` needs `{artifact}`; run `{producer}` first")]
    MissingUpstreamArtifact { stage: Stage, artifact: String, producer: Stage },
    #[error("{artifact} was produced by config {found}, current config is {expected}")]
    ProvenanceMismatch { artifact: String, expected: String, found: String },
    #[error("{artifact}: {detail}")]
    Artifact { artifact: String, detail: String },
    #[error("{failed} of {total} rationales failed; see rationale_failures.jsonl")]
    RationaleBatch { failed: usize, total: usize },
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Rationale(#[from] RationaleError),
    #[error(transparent)]
    Verdict(#[from] VerdictError),
    #[error(transparent)]
    Nle(#[from] NleError),
    #[error(transparent)]
    Explain(#[from] ExplainError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Backend(#[from] BackendFailure),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl PipelineError {
    /// True when the failure came from a model backend rather than from
    /// the inputs or configuration.
    pub fn is_backend_failure(&self) -> bool {
        matches!(
            self,
            PipelineError::Backend(_)
                | PipelineError::RationaleBatch { .. }
                | PipelineError::Rationale(RationaleError::Backend(_))
                | PipelineError::Verdict(VerdictError::Backend(_))
                | PipelineError::Explain(ExplainError::Backend(_))
                | PipelineError::Eval(EvalError::Backend(_))
        )
    }

    /// Process exit code: 1 for validation errors, 2 for backend failures.
    pub fn exit_code(&self) -> i32 {
        if self.is_backend_failure() {
            2
        } else {
            1
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Ingest,
    Split,
    Rationales,
    Train,
    Predict,
    Nle,
    Explain,
    Eval,
    AnnotateExport,
}

impl Stage {
    /// Stages reachable through `run --stage`, in pipeline order.
    pub const RUNNABLE: [Stage; 7] =
        [Stage::Split, Stage::Rationales, Stage::Train, Stage::Predict, Stage::Nle, Stage::Explain, Stage::Eval];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Ingest => "ingest",
            Stage::Split => "split",
            Stage::Rationales => "rationales",
            Stage::Train => "train",
            Stage::Predict => "predict",
            Stage::Nle => "nle",
            Stage::Explain => "explain",
            Stage::Eval => "eval",
            Stage::AnnotateExport => "annotate-export",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stage {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [Stage::Ingest, Stage::AnnotateExport]
            .into_iter()
            .chain(Stage::RUNNABLE)
            .find(|st| st.as_str() == s)
            .ok_or_else(|| PipelineError::Config(format!("unknown stage `{s}`")))
    }
}

/// Artifact file names inside the output directory.
pub mod artifacts {
    pub const CORPUS: &str = "corpus.jsonl";
    pub const STATS: &str = "stats.json";
    pub const SPLITS: &str = "splits.json";
    pub const RATIONALES: &str = "rationales.jsonl";
    pub const RATIONALE_FAILURES: &str = "rationale_failures.jsonl";
    pub const RATIONALE_STATS: &str = "rationale_stats.json";
    pub const MODEL: &str = "model.json";
    pub const TRAIN_LOG: &str = "train_log.json";
    pub const PREDICTIONS: &str = "predictions.jsonl";
    pub const NLES: &str = "nles.jsonl";
    pub const HIGHLIGHTS: &str = "highlights.jsonl";
    pub const HIGHLIGHTS_HTML: &str = "highlights.html";
    pub const NLI: &str = "nli.jsonl";
    pub const EVAL_REPORT: &str = "eval_report.json";
    pub const ANNOTATIONS: &str = "annotations.csv";
    pub const REPORT: &str = "report.json";
    pub const MANIFEST: &str = "manifest.json";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitConfig {
    pub ratios: [f64; 3],
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig { ratios: [0.70, 0.15, 0.15], seed: 2022 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub summarizer: String,
    pub classifier: String,
    pub nli: String,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            summarizer: LeadSentenceSummarizer::ID.into(),
            classifier: MemorizingBackend::ID.into(),
            nli: evaluation::LexicalNliBackend::ID.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExplainConfig {
    pub granularity: Granularity,
    /// Feature counts up to this use exact enumeration; above, sampling.
    pub max_exact_features: usize,
    pub permutations: usize,
    pub seed: u64,
    /// Explain at most this many test records.
    pub limit: Option<usize>,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        ExplainConfig {
            granularity: Granularity::Sentence,
            max_exact_features: 10,
            permutations: 200,
            seed: 7,
            limit: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnotationConfig {
    pub n: usize,
    pub seed: u64,
    pub system_id: String,
}

impl Default for AnnotationConfig {
    fn default() -> Self {
        AnnotationConfig { n: 100, seed: 11, system_id: "claimwise".into() }
    }
}

/// Everything a run depends on. Paths are kept as written and resolved
/// against the directory of the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub corpus: PathBuf,
    #[serde(default = "default_format")]
    pub corpus_format: CorpusFormat,
    /// Outlet blocklist; the built-in list when absent.
    #[serde(default)]
    pub blocklist: Option<PathBuf>,
    #[serde(default = "yes")]
    pub clean: bool,
    pub output_dir: PathBuf,
    /// Keep only the first N raw records (fixture runs).
    #[serde(default)]
    pub limit: Option<usize>,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default)]
    pub summary: SummaryConfig,
    #[serde(default)]
    pub backends: BackendConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub explain: ExplainConfig,
    #[serde(default)]
    pub annotation: AnnotationConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_format() -> CorpusFormat {
    CorpusFormat::JsonLines
}

fn yes() -> bool {
    true
}

/// The part of the config that determines artifact contents. The output
/// directory is excluded so identical runs in different places agree.
#[derive(Serialize)]
struct HashedConfig<'a> {
    corpus: &'a Path,
    corpus_format: CorpusFormat,
    blocklist: &'a Option<PathBuf>,
    clean: bool,
    limit: Option<usize>,
    split: &'a SplitConfig,
    summary: &'a SummaryConfig,
    backends: &'a BackendConfig,
    train: &'a TrainConfig,
    explain: &'a ExplainConfig,
    annotation: &'a AnnotationConfig,
}

impl PipelineConfig {
    /// A config with defaults for everything but the two required paths.
    pub fn new(corpus: impl Into<PathBuf>, output_dir: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            corpus: corpus.into(),
            corpus_format: CorpusFormat::JsonLines,
            blocklist: None,
            clean: true,
            output_dir: output_dir.into(),
            limit: None,
            split: SplitConfig::default(),
            summary: SummaryConfig::default(),
            backends: BackendConfig::default(),
            train: TrainConfig::default(),
            explain: ExplainConfig::default(),
            annotation: AnnotationConfig::default(),
            base_dir: PathBuf::from("."),
        }
    }

    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self, PipelineError> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    /// Load a TOML config and apply backend overrides from the environment.
    pub fn load(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        let mut cfg = Self::from_toml(&text, &base)?;
        cfg.apply_env_overrides();
        Ok(cfg)
    }

    pub fn apply_env_overrides(&mut self) {
        for (var, slot) in [
            (ENV_SUMMARIZER, &mut self.backends.summarizer),
            (ENV_CLASSIFIER, &mut self.backends.classifier),
            (ENV_NLI, &mut self.backends.nli),
        ] {
            if let Ok(v) = std::env::var(var) {
                if !v.trim().is_empty() {
                    *slot = v.trim().to_string();
                }
            }
        }
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn corpus_path(&self) -> PathBuf {
        self.resolve(&self.corpus)
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let corpus = self.corpus_path();
        if !corpus.is_file() {
            return Err(PipelineError::Config(format!("corpus {} does not exist", corpus.display())));
        }
        if let Some(b) = &self.blocklist {
            let b = self.resolve(b);
            if !b.is_file() {
                return Err(PipelineError::Config(format!("blocklist {} does not exist", b.display())));
            }
        }
        let r = self.split.ratios;
        if r.iter().any(|x| *x < 0.0) || (r.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(CorpusError::BadRatios(r).into());
        }
        self.summary.validate()?;
        self.train.validate()?;
        if self.explain.max_exact_features > explain::MAX_EXACT_FEATURES {
            return Err(PipelineError::Config(format!(
                "explain.max_exact_features must be at most {}",
                explain::MAX_EXACT_FEATURES
            )));
        }
        if self.explain.permutations == 0 {
            return Err(PipelineError::Config("explain.permutations must be at least 1".into()));
        }
        Ok(())
    }

    pub fn hash(&self) -> String {
        json_digest(&HashedConfig {
            corpus: &self.corpus,
            corpus_format: self.corpus_format,
            blocklist: &self.blocklist,
            clean: self.clean,
            limit: self.limit,
            split: &self.split,
            summary: &self.summary,
            backends: &self.backends,
            train: &self.train,
            explain: &self.explain,
            annotation: &self.annotation,
        })
    }
}

/// Summarizers known to this build. Real models plug in by implementing
/// [`SummarizationBackend`] and calling the library directly.
pub fn make_summarizer(id: &str, config: &SummaryConfig) -> Result<Box<dyn SummarizationBackend>, BackendFailure> {
    match id {
        LeadSentenceSummarizer::ID => Ok(Box::new(LeadSentenceSummarizer::new(config.backend_max_input))),
        other => Err(BackendFailure::new(other, "unknown summarization backend")),
    }
}

pub fn make_classifier(id: &str) -> Result<MemorizingBackend, BackendFailure> {
    match id {
        MemorizingBackend::ID => Ok(MemorizingBackend::default()),
        other => Err(BackendFailure::new(other, "unknown text-to-text backend")),
    }
}

pub fn make_nli(id: &str) -> Result<Box<dyn NliBackend>, BackendFailure> {
    match id {
        evaluation::LexicalNliBackend::ID => Ok(Box::new(evaluation::LexicalNliBackend)),
        other => Err(BackendFailure::new(other, "unknown NLI backend")),
    }
}

#[derive(Serialize, Deserialize)]
struct Stamped<T> {
    #[serde(flatten)]
    item: T,
    config_hash: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub stage: Stage,
    pub config_hash: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub timestamp: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub entries: BTreeMap<Stage, ManifestEntry>,
}

/// RFC 3339 timestamp; honours `SOURCE_DATE_EPOCH` for reproducible runs.
fn timestamp() -> String {
    let now = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0))
        .unwrap_or_else(chrono::Utc::now);
    now.to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceComparison {
    pub total: (usize, usize),
    pub supports: (usize, usize),
    pub refutes: (usize, usize),
    pub mean_claim_tokens: (f64, f64),
    pub mean_evidence_tokens: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestReport {
    pub raw_records: usize,
    pub dropped: Vec<String>,
    pub stats: CorpusStats,
    /// (observed, reference) pairs, present when the corpus has the
    /// reference size.
    pub reference: Option<ReferenceComparison>,
}

impl IngestReport {
    pub fn render(&self) -> String {
        let s = &self.stats;
        let mut out = format!(
            "records: {} ingested, {} dropped by source filter\n\
             total: {}\nSupports: {}\nRefutes: {}\nmean claim tokens: {:.2}\nmean evidence tokens: {:.2}\n",
            self.raw_records,
            self.dropped.len(),
            s.total,
            s.label_count(VerdictLabel::Supports),
            s.label_count(VerdictLabel::Refutes),
            s.mean_claim_tokens,
            s.mean_evidence_tokens
        );
        if let Some(r) = &self.reference {
            out.push_str("\nstatistic              observed  reference\n");
            out.push_str(&format!("total                  {:>8}  {:>9}\n", r.total.0, r.total.1));
            out.push_str(&format!("Supports               {:>8}  {:>9}\n", r.supports.0, r.supports.1));
            out.push_str(&format!("Refutes                {:>8}  {:>9}\n", r.refutes.0, r.refutes.1));
            out.push_str(&format!("mean claim tokens      {:>8.1}  {:>9.0}\n", r.mean_claim_tokens.0, r.mean_claim_tokens.1));
            out.push_str(&format!("mean evidence tokens   {:>8.1}  {:>9.0}\n", r.mean_evidence_tokens.0, r.mean_evidence_tokens.1));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationaleStats {
    pub count: usize,
    pub failed: usize,
    pub mean_tokens: f64,
    /// Mean of rationale tokens over evidence tokens.
    pub mean_compression: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRow {
    #[serde(flatten)]
    pub prediction: VerdictPrediction,
    pub split: SplitName,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NliRow {
    pub record_id: String,
    pub prompt: String,
    pub verdict: NliVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighlightRow {
    #[serde(flatten)]
    pub doc: HighlightDoc,
    pub method: Method,
    pub value_empty: f64,
    pub value_full: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct ModelFile {
    backend_id: String,
    state: MemorizingBackend,
}

/// Summary of one stage run.
#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub stage: Stage,
    pub outputs: BTreeMap<String, String>,
    pub message: String,
}

/// A pipeline bound to a validated config and its output directory.
pub struct Pipeline {
    config: PipelineConfig,
    hash: String,
    out: PathBuf,
}

impl Pipeline {
    pub fn new(config: PipelineConfig) -> Result<Self, PipelineError> {
        config.validate()?;
        let out = config.output_path();
        fs::create_dir_all(&out).map_err(io_err(&out))?;
        let hash = config.hash();
        Ok(Pipeline { config, hash, out })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn config_hash(&self) -> &str {
        &self.hash
    }

    pub fn output_dir(&self) -> &Path {
        &self.out
    }

    pub fn artifact(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn require(&self, stage: Stage, name: &str, producer: Stage) -> Result<PathBuf, PipelineError> {
        let p = self.artifact(name);
        if p.is_file() {
            Ok(p)
        } else {
            Err(PipelineError::MissingUpstreamArtifact { stage, artifact: name.to_string(), producer })
        }
    }

    fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<(String, String), PipelineError> {
        let p = self.artifact(name);
        fs::write(&p, bytes).map_err(io_err(&p))?;
        Ok((name.to_string(), sha256_hex(bytes)))
    }

    fn write_store<T: Serialize>(&self, name: &str, items: &[T]) -> Result<(String, String), PipelineError> {
        let mut buf = Vec::new();
        for item in items {
            serde_json::to_writer(&mut buf, &Stamped { item, config_hash: self.hash.clone() })
                .map_err(|e| PipelineError::Artifact { artifact: name.into(), detail: e.to_string() })?;
            buf.push(b'\n');
        }
        self.write_bytes(name, &buf)
    }

    fn read_store<T: DeserializeOwned>(&self, path: &Path) -> Result<Vec<T>, PipelineError> {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let file = fs::File::open(path).map_err(io_err(path))?;
        let mut out = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(io_err(path))?;
            if line.trim().is_empty() {
                continue;
            }
            let s: Stamped<T> = serde_json::from_str(&line)
                .map_err(|e| PipelineError::Artifact { artifact: name.clone(), detail: e.to_string() })?;
            self.check_hash(&name, &s.config_hash)?;
            out.push(s.item);
        }
        Ok(out)
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<(String, String), PipelineError> {
        let mut bytes = serde_json::to_vec_pretty(&Stamped { item: value, config_hash: self.hash.clone() })
            .map_err(|e| PipelineError::Artifact { artifact: name.into(), detail: e.to_string() })?;
        bytes.push(b'\n');
        self.write_bytes(name, &bytes)
    }

    fn read_json<T: DeserializeOwned>(&self, path: &Path) -> Result<T, PipelineError> {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let s: Stamped<T> = serde_json::from_str(&text)
            .map_err(|e| PipelineError::Artifact { artifact: name.clone(), detail: e.to_string() })?;
        self.check_hash(&name, &s.config_hash)?;
        Ok(s.item)
    }

    fn check_hash(&self, artifact: &str, found: &str) -> Result<(), PipelineError> {
        if found == self.hash {
            Ok(())
        } else {
            Err(PipelineError::ProvenanceMismatch {
                artifact: artifact.to_string(),
                expected: self.hash.clone(),
                found: found.to_string(),
            })
        }
    }

    fn file_digest(path: &Path) -> Result<String, PipelineError> {
        Ok(sha256_hex(fs::read(path).map_err(io_err(path))?))
    }

    fn record_manifest(
        &self,
        stage: Stage,
        inputs: &[PathBuf],
        outputs: &[(String, String)],
    ) -> Result<(), PipelineError> {
        let path = self.artifact(artifacts::MANIFEST);
        let mut manifest: Manifest = if path.is_file() {
            let text = fs::read_to_string(&path).map_err(io_err(&path))?;
            serde_json::from_str(&text).unwrap_or_default()
        } else {
            Manifest::default()
        };
        let mut input_hashes = BTreeMap::new();
        for p in inputs {
            let key = p
                .strip_prefix(&self.out)
                .map(|r| r.display().to_string())
                .unwrap_or_else(|_| p.display().to_string());
            input_hashes.insert(key, Self::file_digest(p)?);
        }
        manifest.entries.insert(
            stage,
            ManifestEntry {
                stage,
                config_hash: self.hash.clone(),
                inputs: input_hashes,
                outputs: outputs.iter().cloned().collect(),
                timestamp: timestamp(),
            },
        );
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        bytes.push(b'\n');
        fs::write(&path, bytes).map_err(io_err(&path))?;
        Ok(())
    }

    fn outcome(&self, stage: Stage, outputs: Vec<(String, String)>, inputs: &[PathBuf], message: String) -> Result<StageOutcome, PipelineError> {
        self.record_manifest(stage, inputs, &outputs)?;
        Ok(StageOutcome { stage, outputs: outputs.into_iter().collect(), message })
    }

    // ---- loaders -------------------------------------------------------

    fn load_corpus(&self, stage: Stage) -> Result<(PathBuf, Vec<ClaimRecord>), PipelineError> {
        let p = self.require(stage, artifacts::CORPUS, Stage::Ingest)?;
        let records = self.read_store(&p)?;
        Ok((p, records))
    }

    fn load_splits(&self, stage: Stage, records: &[ClaimRecord]) -> Result<(PathBuf, CorpusSplits), PipelineError> {
        let p = self.require(stage, artifacts::SPLITS, Stage::Split)?;
        let manifest: SplitManifest = self.read_json(&p)?;
        Ok((p, manifest.reconstruct(records)?))
    }

    fn load_rationales(&self, stage: Stage) -> Result<(PathBuf, BTreeMap<String, Rationale>), PipelineError> {
        let p = self.require(stage, artifacts::RATIONALES, Stage::Rationales)?;
        let rows: Vec<Rationale> = self.read_store(&p)?;
        Ok((p, rows.into_iter().map(|r| (r.record_id.clone(), r)).collect()))
    }

    fn load_predictions(&self, stage: Stage) -> Result<(PathBuf, Vec<PredictionRow>), PipelineError> {
        let p = self.require(stage, artifacts::PREDICTIONS, Stage::Predict)?;
        Ok((p.clone(), self.read_store(&p)?))
    }

    fn load_nles(&self, stage: Stage) -> Result<(PathBuf, Vec<NleText>), PipelineError> {
        let p = self.require(stage, artifacts::NLES, Stage::Nle)?;
        Ok((p.clone(), self.read_store(&p)?))
    }

    // ---- stages --------------------------------------------------------

    /// Parse, label-map, clean and store the corpus, then report statistics.
    pub fn ingest(&self) -> Result<(StageOutcome, IngestReport), PipelineError> {
        let cfg = &self.config;
        let raw_path = cfg.corpus_path();
        let mut raw = corpus::parse_corpus(&raw_path, cfg.corpus_format)?;
        if let Some(n) = cfg.limit {
            raw.truncate(n);
        }
        let mut inputs = vec![raw_path];
        let cleaned = if cfg.clean {
            let blocklist = match &cfg.blocklist {
                Some(p) => {
                    let p = cfg.resolve(p);
                    inputs.push(p.clone());
                    SourceBlocklist::load(&p)?
                }
                None => SourceBlocklist::builtin(),
            };
            if blocklist.is_empty() {
                return Err(CorpusError::EmptyBlocklist.into());
            }
            corpus::clean_corpus(&raw, &blocklist)
        } else {
            corpus::CleanedCorpus { records: raw.clone(), dropped: Vec::new() }
        };
        let stats = corpus::compute_stats(&cleaned.records)?;
        let reference = (stats.total == REFERENCE_TOTAL).then(|| ReferenceComparison {
            total: (stats.total, REFERENCE_TOTAL),
            supports: (stats.label_count(VerdictLabel::Supports), REFERENCE_SUPPORTS),
            refutes: (stats.label_count(VerdictLabel::Refutes), REFERENCE_REFUTES),
            mean_claim_tokens: (stats.mean_claim_tokens, REFERENCE_MEAN_CLAIM_TOKENS),
            mean_evidence_tokens: (stats.mean_evidence_tokens, REFERENCE_MEAN_EVIDENCE_TOKENS),
        });
        let report = IngestReport { raw_records: raw.len(), dropped: cleaned.dropped, stats, reference };
        let outputs = vec![self.write_store(artifacts::CORPUS, &cleaned.records)?, self.write_json(artifacts::STATS, &report)?];
        let message = report.render();
        Ok((self.outcome(Stage::Ingest, outputs, &inputs, message)?, report))
    }

    pub fn stats(&self) -> Result<CorpusStats, PipelineError> {
        let (_, records) = self.load_corpus(Stage::Split)?;
        Ok(corpus::compute_stats(&records)?)
    }

    pub fn split(&self) -> Result<StageOutcome, PipelineError> {
        let (corpus_path, records) = self.load_corpus(Stage::Split)?;
        let splits = corpus::split_corpus(&records, self.config.split.ratios, self.config.split.seed)?;
        let manifest = splits.manifest(self.config.split.ratios);
        let (a, b, c) = splits.sizes();
        let outputs = vec![self.write_json(artifacts::SPLITS, &manifest)?];
        self.outcome(
            Stage::Split,
            outputs,
            &[corpus_path],
            format!("split seed {}: train {a}, validation {b}, test {c}", splits.seed),
        )
    }

    pub fn rationales(&self) -> Result<StageOutcome, PipelineError> {
        let (corpus_path, records) = self.load_corpus(Stage::Rationales)?;
        let (splits_path, _) = self.load_splits(Stage::Rationales, &records)?;
        let backend = make_summarizer(&self.config.backends.summarizer, &self.config.summary)?;
        let batch = rationale::batch_generate(&records, backend.as_ref(), &self.config.summary);

        let rows: Vec<Rationale> = records.iter().filter_map(|r| batch.rationales.get(&r.id).cloned()).collect();
        let failures: Vec<BTreeMap<&str, String>> = batch
            .failures
            .iter()
            .map(|(id, e)| BTreeMap::from([("record_id", id.clone()), ("error", e.to_string())]))
            .collect();
        let evidence_len: HashMap<&str, usize> =
            records.iter().map(|r| (r.id.as_str(), text::whitespace_tokens(&r.evidence).len())).collect();
        let n = rows.len().max(1) as f64;
        let stats = RationaleStats {
            count: rows.len(),
            failed: failures.len(),
            mean_tokens: rows.iter().map(|r| r.token_length as f64).sum::<f64>() / n,
            mean_compression: rows
                .iter()
                .map(|r| r.token_length as f64 / evidence_len[r.record_id.as_str()].max(1) as f64)
                .sum::<f64>()
                / n,
        };
        let outputs = vec![
            self.write_store(artifacts::RATIONALES, &rows)?,
            self.write_store(artifacts::RATIONALE_FAILURES, &failures)?,
            self.write_json(artifacts::RATIONALE_STATS, &stats)?,
        ];
        let message = format!(
            "{} rationales ({} failed), mean {:.1} tokens, mean compression {:.3}",
            stats.count, stats.failed, stats.mean_tokens, stats.mean_compression
        );
        let outcome = self.outcome(Stage::Rationales, outputs, &[corpus_path, splits_path], message)?;
        if stats.failed > 0 {
            return Err(PipelineError::RationaleBatch { failed: stats.failed, total: records.len() });
        }
        Ok(outcome)
    }

    pub fn train(&self) -> Result<StageOutcome, PipelineError> {
        let (corpus_path, records) = self.load_corpus(Stage::Train)?;
        let (splits_path, splits) = self.load_splits(Stage::Train, &records)?;
        let (rat_path, rationales) = self.load_rationales(Stage::Train)?;
        let train_pairs = verdict::make_training_pairs(&splits.train, &rationales)?;
        let val_pairs = verdict::make_training_pairs(&splits.validation, &rationales)?;
        let backend = make_classifier(&self.config.backends.classifier)?;
        let (state, log): (MemorizingBackend, TrainLog) =
            verdict::fine_tune(&train_pairs, &val_pairs, &self.config.train, backend)?;
        let model = ModelFile { backend_id: state.id().to_string(), state };
        let outputs = vec![self.write_json(artifacts::MODEL, &model)?, self.write_json(artifacts::TRAIN_LOG, &log)?];
        let message = format!(
            "{} steps over {} pairs; best validation macro-F1 {} at step {}",
            log.total_steps,
            train_pairs.len(),
            log.best_macro_f1.map_or("n/a".into(), |f| format!("{f:.4}")),
            log.best_step.map_or("n/a".into(), |s| s.to_string()),
        );
        self.outcome(Stage::Train, outputs, &[corpus_path, splits_path, rat_path], message)
    }

    fn load_model(&self, stage: Stage) -> Result<(PathBuf, MemorizingBackend), PipelineError> {
        let p = self.require(stage, artifacts::MODEL, Stage::Train)?;
        let model: ModelFile = self.read_json(&p)?;
        if model.backend_id != self.config.backends.classifier {
            return Err(BackendFailure::new(
                &self.config.backends.classifier,
                format!("model file holds a `{}` checkpoint", model.backend_id),
            )
            .into());
        }
        Ok((p, model.state))
    }

    pub fn predict(&self) -> Result<StageOutcome, PipelineError> {
        let (corpus_path, records) = self.load_corpus(Stage::Predict)?;
        let (splits_path, splits) = self.load_splits(Stage::Predict, &records)?;
        let (rat_path, rationales) = self.load_rationales(Stage::Predict)?;
        let (model_path, backend) = self.load_model(Stage::Predict)?;
        let mut rows = Vec::new();
        for split in SplitName::ALL {
            for r in splits.get(split) {
                let rat = rationales.get(&r.id).ok_or_else(|| VerdictError::MissingRationale(r.id.clone()))?;
                let prediction = verdict::classify(&r.claim, rat, &backend)?;
                rows.push(PredictionRow { prediction, split });
            }
        }
        let outputs = vec![self.write_store(artifacts::PREDICTIONS, &rows)?];
        let message = format!("{} predictions", rows.len());
        self.outcome(Stage::Predict, outputs, &[corpus_path, splits_path, rat_path, model_path], message)
    }

    pub fn nle(&self) -> Result<StageOutcome, PipelineError> {
        let (pred_path, preds) = self.load_predictions(Stage::Nle)?;
        let (rat_path, rationales) = self.load_rationales(Stage::Nle)?;
        let nles = preds
            .iter()
            .map(|p| {
                let rat = rationales
                    .get(&p.prediction.record_id)
                    .ok_or_else(|| VerdictError::MissingRationale(p.prediction.record_id.clone()))?;
                Ok(nle::compose_nle(&p.prediction, rat)?)
            })
            .collect::<Result<Vec<NleText>, PipelineError>>()?;
        let outputs = vec![self.write_store(artifacts::NLES, &nles)?];
        let message = format!("{} explanations", nles.len());
        self.outcome(Stage::Nle, outputs, &[pred_path, rat_path], message)
    }

    pub fn explain(&self) -> Result<StageOutcome, PipelineError> {
        let (corpus_path, records) = self.load_corpus(Stage::Explain)?;
        let (splits_path, splits) = self.load_splits(Stage::Explain, &records)?;
        let (rat_path, rationales) = self.load_rationales(Stage::Explain)?;
        let backend = make_summarizer(&self.config.backends.summarizer, &self.config.summary)?;
        let ec = &self.config.explain;
        let limit = ec.limit.unwrap_or(usize::MAX);
        let mut rows = Vec::new();
        for r in splits.test.iter().take(limit) {
            let reference = rationales.get(&r.id).ok_or_else(|| VerdictError::MissingRationale(r.id.clone()))?;
            let vf = explain::rationale_value_fn(&r.evidence, reference, backend.as_ref(), &self.config.summary, ec.granularity);
            let features = vf.features().to_vec();
            if features.is_empty() {
                continue;
            }
            let result = if features.len() <= ec.max_exact_features {
                explain::exact_shapley(&features, &vf)?
            } else {
                explain::sampled_shapley(&features, &vf, ec.permutations, ec.seed)?
            };
            rows.push(HighlightRow {
                doc: explain::export_highlights(&r.id, &result),
                method: result.method,
                value_empty: result.value_empty,
                value_full: result.value_full,
            });
        }
        let docs: Vec<HighlightDoc> = rows.iter().map(|r| r.doc.clone()).collect();
        let html = explain::render_highlights_html(&docs).replacen(
            "<html>\n",
            &format!("<html>\n<!-- config_hash: {} -->\n", self.hash),
            1,
        );
        let outputs = vec![
            self.write_store(artifacts::HIGHLIGHTS, &rows)?,
            self.write_bytes(artifacts::HIGHLIGHTS_HTML, html.as_bytes())?,
        ];
        let message = format!("attributions for {} test records", rows.len());
        self.outcome(Stage::Explain, outputs, &[corpus_path, splits_path, rat_path], message)
    }

    /// Macro-F1 per split from the stored predictions.
    pub fn eval_f1(&self) -> Result<BTreeMap<String, f64>, PipelineError> {
        let (_, records) = self.load_corpus(Stage::Eval)?;
        let (_, preds) = self.load_predictions(Stage::Eval)?;
        let gold: HashMap<&str, VerdictLabel> = records.iter().map(|r| (r.id.as_str(), r.verdict)).collect();
        let mut out = BTreeMap::new();
        for split in SplitName::ALL {
            let (p, g): (Vec<VerdictLabel>, Vec<VerdictLabel>) = preds
                .iter()
                .filter(|row| row.split == split)
                .map(|row| (row.prediction.label, gold[row.prediction.record_id.as_str()]))
                .unzip();
            if !g.is_empty() {
                out.insert(split.as_str().to_string(), evaluation::macro_f1(&p, &g)?);
            }
        }
        Ok(out)
    }

    /// Entailment audit of the test-split explanations.
    pub fn eval_nli(&self) -> Result<(NliReport, Vec<NliRow>), PipelineError> {
        let (_, records) = self.load_corpus(Stage::Eval)?;
        let (_, splits) = self.load_splits(Stage::Eval, &records)?;
        let (_, nles) = self.load_nles(Stage::Eval)?;
        let backend = make_nli(&self.config.backends.nli)?;
        let by_id: HashMap<&str, &NleText> = nles.iter().map(|n| (n.record_id.as_str(), n)).collect();
        let mut pairs = Vec::new();
        for r in &splits.test {
            let n = by_id.get(r.id.as_str()).ok_or_else(|| PipelineError::Artifact {
                artifact: artifacts::NLES.into(),
                detail: format!("no explanation for test record `{}`", r.id),
            })?;
            pairs.push((r.claim.clone(), (*n).clone()));
        }
        let verdicts = evaluation::nli_verdicts(&pairs, backend.as_ref())?;
        let rows = pairs
            .iter()
            .zip(&verdicts)
            .map(|((claim, n), (id, v))| {
                Ok(NliRow { record_id: id.clone(), prompt: evaluation::build_nli_prompt(claim, n)?, verdict: *v })
            })
            .collect::<Result<Vec<_>, EvalError>>()?;
        let only: Vec<NliVerdict> = verdicts.into_iter().map(|(_, v)| v).collect();
        Ok((NliReport::from_verdicts(&only), rows))
    }

    pub fn eval(&self) -> Result<(StageOutcome, EvalReport), PipelineError> {
        let inputs = vec![
            self.require(Stage::Eval, artifacts::CORPUS, Stage::Ingest)?,
            self.require(Stage::Eval, artifacts::SPLITS, Stage::Split)?,
            self.require(Stage::Eval, artifacts::PREDICTIONS, Stage::Predict)?,
            self.require(Stage::Eval, artifacts::NLES, Stage::Nle)?,
        ];
        let macro_f1 = self.eval_f1()?;
        let (nli, rows) = if self.has_test_split()? { let (r, rows) = self.eval_nli()?; (Some(r), rows) } else { (None, Vec::new()) };
        let report = EvalReport { macro_f1, nli, annotations: None };
        let outputs = vec![self.write_store(artifacts::NLI, &rows)?, self.write_json(artifacts::EVAL_REPORT, &report)?];
        let message = render_eval_report(&report);
        Ok((self.outcome(Stage::Eval, outputs, &inputs, message)?, report))
    }

    fn has_test_split(&self) -> Result<bool, PipelineError> {
        let (_, records) = self.load_corpus(Stage::Eval)?;
        let (_, splits) = self.load_splits(Stage::Eval, &records)?;
        Ok(!splits.test.is_empty())
    }

    /// Write the manual-rating sheet for a seeded sample of test records.
    pub fn annotate_export(&self, n: usize, seed: u64, out: Option<&Path>) -> Result<StageOutcome, PipelineError> {
        let (corpus_path, records) = self.load_corpus(Stage::AnnotateExport)?;
        let (splits_path, splits) = self.load_splits(Stage::AnnotateExport, &records)?;
        let (nle_path, nles) = self.load_nles(Stage::AnnotateExport)?;
        let by_id: HashMap<&str, &NleText> = nles.iter().map(|n| (n.record_id.as_str(), n)).collect();
        let items: Vec<(String, String, String)> = splits
            .test
            .iter()
            .filter_map(|r| by_id.get(r.id.as_str()).map(|n| (r.id.clone(), r.claim.clone(), n.text.clone())))
            .collect();
        let tasks = evaluation::export_annotation_tasks(&items, n, seed, &self.config.annotation.system_id)?;
        let mut buf = format!("# config_hash: {}\n", self.hash).into_bytes();
        evaluation::write_annotation_file(&mut buf, &tasks)?;
        let output = match out {
            Some(p) => {
                fs::write(p, &buf).map_err(io_err(p))?;
                (p.display().to_string(), sha256_hex(&buf))
            }
            None => self.write_bytes(artifacts::ANNOTATIONS, &buf)?,
        };
        let message = format!("{} annotation tasks written to {}", tasks.len(), output.0);
        self.outcome(Stage::AnnotateExport, vec![output], &[corpus_path, splits_path, nle_path], message)
    }

    /// Combine the evaluation report with aggregated manual ratings.
    pub fn report<P: AsRef<Path>>(&self, annotation_files: &[P]) -> Result<EvalReport, PipelineError> {
        let p = self.require(Stage::Eval, artifacts::EVAL_REPORT, Stage::Eval)?;
        let mut report: EvalReport = self.read_json(&p)?;
        if !annotation_files.is_empty() {
            report.annotations = Some(evaluation::aggregate_annotations(annotation_files)?);
        }
        self.write_json(artifacts::REPORT, &report)?;
        Ok(report)
    }

    pub fn run_stage(&self, stage: Stage) -> Result<StageOutcome, PipelineError> {
        match stage {
            Stage::Ingest => self.ingest().map(|(o, _)| o),
            Stage::Split => self.split(),
            Stage::Rationales => self.rationales(),
            Stage::Train => self.train(),
            Stage::Predict => self.predict(),
            Stage::Nle => self.nle(),
            Stage::Explain => self.explain(),
            Stage::Eval => self.eval().map(|(o, _)| o),
            Stage::AnnotateExport => {
                self.annotate_export(self.config.annotation.n, self.config.annotation.seed, None)
            }
        }
    }

    /// Ingest followed by every runnable stage.
    pub fn run_all(&self) -> Result<Vec<StageOutcome>, PipelineError> {
        let mut out = vec![self.ingest()?.0];
        for stage in Stage::RUNNABLE {
            out.push(self.run_stage(stage)?);
        }
        Ok(out)
    }
}

pub fn render_annotation_summary(s: &AnnotationSummary) -> String {
    let mut out = format!("{} rated rows\n", s.rated_items);
    for (system, means) in &s.per_system {
        out.push_str(&format!("system {system}\n"));
        for (c, m) in means {
            out.push_str(&format!("  {:<13} {m:.3}\n", c.as_str()));
        }
        if let Some(annotators) = s.per_annotator.get(system) {
            for (a, means) in annotators {
                let parts: Vec<String> = means.iter().map(|(c, m)| format!("{}={m:.3}", c.as_str())).collect();
                out.push_str(&format!("    annotator {a}: {}\n", parts.join(" ")));
            }
        }
    }
    out
}

pub fn render_eval_report(report: &EvalReport) -> String {
    let mut out = String::new();
    for (split, f1) in &report.macro_f1 {
        out.push_str(&format!("macro-F1 {split:<10} {f1:.4}\n"));
    }
    if let Some(nli) = &report.nli {
        out.push_str(&format!("NLI over {} test explanations\n", nli.total));
        for v in NliVerdict::ALL {
            out.push_str(&format!("  {:<13} {:>5} {:>5.1}%\n", v.as_str(), nli.count(v), nli.percentage(v)));
        }
    }
    if let Some(a) = &report.annotations {
        out.push_str(&render_annotation_summary(a));
    }
    out
}

/// Write records in the canonical store format without provenance stamps.
pub fn write_plain_records(path: &Path, records: &[ClaimRecord]) -> Result<(), PipelineError> {
    let f = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(f);
    corpus::write_records(&mut w, records).map_err(io_err(path))?;
    w.flush().map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn raw_line(id: usize, verdict: &str, evidence: &str) -> String {
        serde_json::json!({
            "id": format!("r{id:03}"),
            "claim": format!("Claim {id} says exports grew"),
            "date": "2021-05-01",
            "source": "A speaker",
            "verdict": verdict,
            "evidence": evidence,
            "url": format!("https://example.org/{id}"),
        })
        .to_string()
    }

    fn setup(lines: &[String]) -> (tempfile::TempDir, PipelineConfig) {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("raw.jsonl");
        fs::write(&corpus, lines.join("\n")).unwrap();
        let mut cfg = PipelineConfig::new("raw.jsonl", "out");
        cfg.base_dir = dir.path().to_path_buf();
        cfg.train.epochs = 2;
        (dir, cfg)
    }

    fn fixture(n: usize) -> Vec<String> {
        (0..n)
            .map(|i| {
                raw_line(
                    i,
                    if i % 2 == 0 { "True" } else { "False" },
                    &format!("Official data show item {i} changed. The ministry confirmed it.\n\nCNN covered it too."),
                )
            })
            .collect()
    }

    #[test]
    fn stage_order_is_enforced() {
        let (_d, cfg) = setup(&fixture(6));
        let p = Pipeline::new(cfg).unwrap();
        match p.run_stage(Stage::Predict) {
            Err(PipelineError::MissingUpstreamArtifact { stage: Stage::Predict, producer: Stage::Ingest, .. }) => {}
            other => panic!("{other:?}"),
        }
        p.ingest().unwrap();
        p.split().unwrap();
        match p.predict() {
            Err(e @ PipelineError::MissingUpstreamArtifact { .. }) => assert_eq!(e.exit_code(), 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ingest_cleans_and_reports_unlabeled_rows() {
        let (_d, cfg) = setup(&fixture(4));
        let p = Pipeline::new(cfg.clone()).unwrap();
        let (_, report) = p.ingest().unwrap();
        assert_eq!(report.stats.total, 4);
        let stored: Vec<ClaimRecord> = p.read_store(&p.artifact(artifacts::CORPUS)).unwrap();
        assert!(stored.iter().all(|r| !r.evidence.contains("CNN")));

        let mut lines = fixture(3);
        lines.push(raw_line(9, "Mostly True", "x"));
        let (_d2, cfg2) = setup(&lines);
        let err = Pipeline::new(cfg2).unwrap().ingest().unwrap_err();
        assert!(err.to_string().contains("row 4"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn mixed_provenance_is_rejected() {
        let (_d, cfg) = setup(&fixture(10));
        let p = Pipeline::new(cfg.clone()).unwrap();
        p.ingest().unwrap();
        p.split().unwrap();
        let mut other = cfg;
        other.split.seed += 1;
        let q = Pipeline::new(other).unwrap();
        assert!(matches!(q.rationales(), Err(PipelineError::ProvenanceMismatch { .. })));
    }

    #[test]
    fn unknown_backend_exits_with_backend_code() {
        let (_d, mut cfg) = setup(&fixture(10));
        cfg.backends.summarizer = "bart-large-cnn".into();
        let p = Pipeline::new(cfg).unwrap();
        p.ingest().unwrap();
        p.split().unwrap();
        let err = p.rationales().unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn config_hash_ignores_output_dir() {
        let a = PipelineConfig::new("c.jsonl", "out1");
        let mut b = PipelineConfig::new("c.jsonl", "out2");
        assert_eq!(a.hash(), b.hash());
        b.summary.max_tokens = 100;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn toml_config_defaults() {
        let cfg = PipelineConfig::from_toml(
            "corpus = \"raw.jsonl\"\noutput_dir = \"out\"\n[train]\nepochs = 3\n",
            Path::new("/tmp"),
        )
        .unwrap();
        assert_eq!(cfg.train.epochs, 3);
        assert_eq!(cfg.train.batch_size, 8);
        assert_eq!(cfg.summary, SummaryConfig::default());
        assert_eq!(cfg.corpus_path(), PathBuf::from("/tmp/raw.jsonl"));
        assert!(PipelineConfig::from_toml("output_dir = \"x\"", Path::new(".")).is_err());
    }

    #[test]
    fn stage_names_round_trip() {
        for s in Stage::RUNNABLE {
            assert_eq!(s.as_str().parse::<Stage>().unwrap(), s);
        }
        assert!("bogus".parse::<Stage>().is_err());
    }
}
