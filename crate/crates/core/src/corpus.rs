//! Claim/evidence corpus ingestion, cleaning, label mapping, splitting and
//! summary statistics.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text;

/// Field names every raw row must supply, in canonical order.
pub const RECORD_FIELDS: [&str; 7] = ["id", "claim", "date", "source", "verdict", "evidence", "url"];

const DEFAULT_BLOCKLIST: &str = include_str!("../config/blocklist.txt");

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("row {row}: missing field `{field}`")]
    MissingField { row: usize, field: String },
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
    #[error("unreadable file {path}: {detail}")]
    UnreadableFile { path: PathBuf, detail: String },
    #[error("row {row}: malformed record: {detail}")]
    Malformed { row: usize, detail: String },
    #[error("row {row}: date `{value}` is not an ISO-8601 calendar date")]
    InvalidDate { row: usize, value: String },
    #[error("unsupported verdict label `{0}`")]
    UnsupportedLabel(String),
    #[error("row {row}: {source}")]
    RowLabel {
        row: usize,
        #[source]
        source: Box<CorpusError>,
    },
    #[error("record `{0}` has no evidence left after source filtering")]
    EmptyEvidenceAfterFilter(String),
    #[error("split ratios {0:?} must be non-negative and sum to 1")]
    BadRatios([f64; 3]),
    #[error("cannot compute statistics of an empty corpus")]
    EmptyCorpus,
    #[error("blocklist is empty")]
    EmptyBlocklist,
    #[error("unknown corpus format `{0}`")]
    UnknownFormat(String),
    #[error("split manifest does not match the corpus: {0}")]
    ManifestMismatch(String),
}

/// Binary verdict. Raw fact-checker ratings other than plain true/false
/// never make it into a corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VerdictLabel {
    Supports,
    Refutes,
}

impl VerdictLabel {
    pub const ALL: [VerdictLabel; 2] = [VerdictLabel::Supports, VerdictLabel::Refutes];

    pub fn as_str(self) -> &'static str {
        match self {
            VerdictLabel::Supports => "Supports",
            VerdictLabel::Refutes => "Refutes",
        }
    }

    pub fn other(self) -> Self {
        match self {
            VerdictLabel::Supports => VerdictLabel::Refutes,
            VerdictLabel::Refutes => VerdictLabel::Supports,
        }
    }
}

impl fmt::Display for VerdictLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Map a raw rating onto the binary label set.
///
/// Only "true" and "false" (after trimming and case-folding) are accepted;
/// the intermediate ratings are rejected rather than coerced.
pub fn map_verdict_label(raw: &str) -> Result<VerdictLabel, CorpusError> {
    match raw.trim().to_lowercase().as_str() {
        "true" => Ok(VerdictLabel::Supports),
        "false" => Ok(VerdictLabel::Refutes),
        _ => Err(CorpusError::UnsupportedLabel(raw.to_string())),
    }
}

/// One claim with its evidence and provenance. Field order is the canonical
/// storage order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub id: String,
    pub claim: String,
    pub date: String,
    pub source: String,
    pub verdict: VerdictLabel,
    pub evidence: String,
    pub url: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorpusFormat {
    JsonLines,
    Delimited,
}

impl FromStr for CorpusFormat {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json-lines" | "jsonl" => Ok(CorpusFormat::JsonLines),
            "delimited" | "csv" => Ok(CorpusFormat::Delimited),
            other => Err(CorpusError::UnknownFormat(other.to_string())),
        }
    }
}

fn unreadable(path: &Path, e: impl fmt::Display) -> CorpusError {
    CorpusError::UnreadableFile { path: path.to_path_buf(), detail: e.to_string() }
}

/// Parse a raw scraped corpus. Rows are numbered from 1 in errors.
pub fn parse_corpus(path: &Path, format: CorpusFormat) -> Result<Vec<ClaimRecord>, CorpusError> {
    let rows = match format {
        CorpusFormat::JsonLines => read_json_rows(path)?,
        CorpusFormat::Delimited => read_delimited_rows(path)?,
    };
    let mut seen = HashSet::new();
    let mut records = Vec::with_capacity(rows.len());
    for (row, fields) in rows {
        let record = record_from_fields(row, &fields)?;
        if !seen.insert(record.id.clone()) {
            return Err(CorpusError::DuplicateId(record.id));
        }
        records.push(record);
    }
    Ok(records)
}

type RawRow = (usize, BTreeMap<String, String>);

fn read_json_rows(path: &Path) -> Result<Vec<RawRow>, CorpusError> {
    let file = fs::File::open(path).map_err(|e| unreadable(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| unreadable(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = i + 1;
        let value: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| CorpusError::Malformed { row, detail: e.to_string() })?;
        let obj = value
            .as_object()
            .ok_or_else(|| CorpusError::Malformed { row, detail: "expected a JSON object".into() })?;
        let mut fields = BTreeMap::new();
        for (k, v) in obj {
            let s = match v {
                serde_json::Value::String(s) => s.clone(),
                serde_json::Value::Null => continue,
                other => other.to_string(),
            };
            fields.insert(k.clone(), s);
        }
        rows.push((row, fields));
    }
    Ok(rows)
}

fn read_delimited_rows(path: &Path) -> Result<Vec<RawRow>, CorpusError> {
    let file = fs::File::open(path).map_err(|e| unreadable(path, e))?;
    if file.metadata().map(|m| m.len() == 0).unwrap_or(false) {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(file);
    let headers = reader.headers().map_err(|e| unreadable(path, e))?.clone();
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        // header is line 1
        let row = i + 2;
        let rec = rec.map_err(|e| CorpusError::Malformed { row, detail: e.to_string() })?;
        let fields = headers
            .iter()
            .zip(rec.iter())
            .map(|(h, v)| (h.trim().to_string(), v.to_string()))
            .collect();
        rows.push((row, fields));
    }
    Ok(rows)
}

fn record_from_fields(row: usize, fields: &BTreeMap<String, String>) -> Result<ClaimRecord, CorpusError> {
    let get = |name: &str| -> Result<String, CorpusError> {
        fields
            .get(name)
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .ok_or_else(|| CorpusError::MissingField { row, field: name.to_string() })
    };
    let id = get("id")?;
    let claim = get("claim")?;
    let date = get("date")?;
    let source = get("source")?;
    let raw_verdict = get("verdict")?;
    let evidence = get("evidence")?;
    let url = get("url")?;
    if chrono::NaiveDate::parse_from_str(&date, "%Y-%m-%d").is_err() {
        return Err(CorpusError::InvalidDate { row, value: date });
    }
    let verdict =
        map_verdict_label(&raw_verdict).map_err(|e| CorpusError::RowLabel { row, source: Box::new(e) })?;
    Ok(ClaimRecord { id, claim, date, source, verdict, evidence, url })
}

/// Outlets whose citations disqualify an evidence paragraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceBlocklist {
    outlets: Vec<String>,
}

impl SourceBlocklist {
    /// Normalizes (trim, lowercase) and deduplicates, keeping first-seen order.
    pub fn new<I, S>(outlets: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = HashSet::new();
        let outlets = outlets
            .into_iter()
            .map(|s| s.as_ref().trim().to_lowercase())
            .filter(|s| !s.is_empty() && seen.insert(s.clone()))
            .collect();
        SourceBlocklist { outlets }
    }

    /// Parse the plain-text format: one outlet per line, `#` starts a comment.
    pub fn parse(text: &str) -> Self {
        Self::new(text.lines().map(|l| l.split('#').next().unwrap_or("")))
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(path).map_err(|e| unreadable(path, e))?;
        Ok(Self::parse(&text))
    }

    /// The shipped list of 30 widely read news outlets.
    pub fn builtin() -> Self {
        Self::parse(DEFAULT_BLOCKLIST)
    }

    pub fn empty() -> Self {
        SourceBlocklist { outlets: Vec::new() }
    }

    pub fn outlets(&self) -> &[String] {
        &self.outlets
    }

    pub fn is_empty(&self) -> bool {
        self.outlets.is_empty()
    }

    pub fn len(&self) -> usize {
        self.outlets.len()
    }

    /// Case-insensitive substring match that must start and end on a word
    /// boundary, so "NPR" does not fire inside "unprecedented".
    pub fn matches(&self, paragraph: &str) -> bool {
        let hay = paragraph.to_lowercase();
        self.outlets.iter().any(|outlet| contains_bounded(&hay, outlet))
    }
}

fn contains_bounded(hay: &str, needle: &str) -> bool {
    let mut start = 0;
    while let Some(pos) = hay[start..].find(needle) {
        let begin = start + pos;
        let end = begin + needle.len();
        let before_ok = hay[..begin].chars().next_back().is_none_or(|c| !c.is_alphanumeric());
        let after_ok = hay[end..].chars().next().is_none_or(|c| !c.is_alphanumeric());
        if before_ok && after_ok {
            return true;
        }
        start = begin + hay[begin..].chars().next().map_or(1, char::len_utf8);
    }
    false
}

/// Drop every evidence paragraph citing a blocklisted outlet.
///
/// Surviving paragraphs keep their order and are rejoined with blank lines.
pub fn filter_evidence(record: &ClaimRecord, blocklist: &SourceBlocklist) -> Result<ClaimRecord, CorpusError> {
    if blocklist.is_empty() {
        return Ok(record.clone());
    }
    let kept: Vec<String> = text::split_paragraphs(&record.evidence)
        .into_iter()
        .filter(|p| !blocklist.matches(p))
        .collect();
    if kept.is_empty() {
        return Err(CorpusError::EmptyEvidenceAfterFilter(record.id.clone()));
    }
    Ok(ClaimRecord { evidence: kept.join("\n\n"), ..record.clone() })
}

/// Result of cleaning a whole corpus: survivors plus the ids that lost all
/// their evidence.
#[derive(Debug, Clone, Default)]
pub struct CleanedCorpus {
    pub records: Vec<ClaimRecord>,
    pub dropped: Vec<String>,
}

pub fn clean_corpus(records: &[ClaimRecord], blocklist: &SourceBlocklist) -> CleanedCorpus {
    let mut out = CleanedCorpus::default();
    for r in records {
        match filter_evidence(r, blocklist) {
            Ok(clean) => out.records.push(clean),
            Err(CorpusError::EmptyEvidenceAfterFilter(id)) => {
                log::warn!("dropping record {id}: every evidence paragraph cites a blocklisted outlet");
                out.dropped.push(id);
            }
            Err(other) => unreachable!("filter_evidence only fails on empty evidence: {other}"),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSplits {
    pub train: Vec<ClaimRecord>,
    pub validation: Vec<ClaimRecord>,
    pub test: Vec<ClaimRecord>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Validation,
    Test,
}

impl SplitName {
    pub const ALL: [SplitName; 3] = [SplitName::Train, SplitName::Validation, SplitName::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Validation => "validation",
            SplitName::Test => "test",
        }
    }
}

impl fmt::Display for SplitName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl CorpusSplits {
    pub fn get(&self, name: SplitName) -> &[ClaimRecord] {
        match name {
            SplitName::Train => &self.train,
            SplitName::Validation => &self.validation,
            SplitName::Test => &self.test,
        }
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.train.len(), self.validation.len(), self.test.len())
    }

    pub fn manifest(&self, ratios: [f64; 3]) -> SplitManifest {
        let ids = |rs: &[ClaimRecord]| rs.iter().map(|r| r.id.clone()).collect();
        SplitManifest {
            seed: self.seed,
            ratios,
            train: ids(&self.train),
            validation: ids(&self.validation),
            test: ids(&self.test),
        }
    }
}

/// Split sizes: train and validation are rounded to nearest, test takes the
/// remainder.
pub fn split_sizes(n: usize, ratios: [f64; 3]) -> (usize, usize, usize) {
    let train = ((n as f64) * ratios[0]).round() as usize;
    let train = train.min(n);
    let validation = (((n as f64) * ratios[1]).round() as usize).min(n - train);
    (train, validation, n - train - validation)
}

/// Deterministic shuffle-then-slice split.
///
/// Records are ordered by id before shuffling, so the result depends only on
/// the record set and the seed, not on file order.
pub fn split_corpus(records: &[ClaimRecord], ratios: [f64; 3], seed: u64) -> Result<CorpusSplits, CorpusError> {
    if ratios.iter().any(|r| !r.is_finite() || *r < 0.0) || (ratios.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(CorpusError::BadRatios(ratios));
    }
    let mut shuffled: Vec<ClaimRecord> = records.to_vec();
    shuffled.sort_by(|a, b| a.id.cmp(&b.id));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    shuffled.shuffle(&mut rng);
    let (n_train, n_val, _) = split_sizes(shuffled.len(), ratios);
    let test = shuffled.split_off(n_train + n_val);
    let validation = shuffled.split_off(n_train);
    Ok(CorpusSplits { train: shuffled, validation, test, seed })
}

/// Ids per split plus the seed, enough to rebuild the splits from the
/// cleaned corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub seed: u64,
    pub ratios: [f64; 3],
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
}

impl SplitManifest {
    pub fn ids(&self, name: SplitName) -> &[String] {
        match name {
            SplitName::Train => &self.train,
            SplitName::Validation => &self.validation,
            SplitName::Test => &self.test,
        }
    }

    /// Rebuild the splits from the corpus the manifest was made from.
    pub fn reconstruct(&self, records: &[ClaimRecord]) -> Result<CorpusSplits, CorpusError> {
        let by_id: BTreeMap<&str, &ClaimRecord> = records.iter().map(|r| (r.id.as_str(), r)).collect();
        let pick = |ids: &[String]| -> Result<Vec<ClaimRecord>, CorpusError> {
            ids.iter()
                .map(|id| {
                    by_id
                        .get(id.as_str())
                        .map(|r| (*r).clone())
                        .ok_or_else(|| CorpusError::ManifestMismatch(format!("unknown id `{id}`")))
                })
                .collect()
        };
        let splits = CorpusSplits {
            train: pick(&self.train)?,
            validation: pick(&self.validation)?,
            test: pick(&self.test)?,
            seed: self.seed,
        };
        let total = splits.train.len() + splits.validation.len() + splits.test.len();
        if total != records.len() {
            return Err(CorpusError::ManifestMismatch(format!(
                "manifest lists {total} ids, corpus has {}",
                records.len()
            )));
        }
        Ok(splits)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total: usize,
    pub per_label: BTreeMap<VerdictLabel, usize>,
    pub mean_claim_tokens: f64,
    pub mean_evidence_tokens: f64,
}

impl CorpusStats {
    pub fn label_count(&self, label: VerdictLabel) -> usize {
        self.per_label.get(&label).copied().unwrap_or(0)
    }
}

pub fn compute_stats(records: &[ClaimRecord]) -> Result<CorpusStats, CorpusError> {
    if records.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    let mut per_label: BTreeMap<VerdictLabel, usize> = VerdictLabel::ALL.iter().map(|l| (*l, 0)).collect();
    let mut claim_tokens = 0usize;
    let mut evidence_tokens = 0usize;
    for r in records {
        *per_label.entry(r.verdict).or_default() += 1;
        claim_tokens += text::stat_token_count(&r.claim);
        evidence_tokens += text::stat_token_count(&r.evidence);
    }
    let n = records.len() as f64;
    Ok(CorpusStats {
        total: records.len(),
        per_label,
        mean_claim_tokens: claim_tokens as f64 / n,
        mean_evidence_tokens: evidence_tokens as f64 / n,
    })
}

/// Write records in the canonical one-object-per-line form.
pub fn write_records<W: Write>(mut out: W, records: &[ClaimRecord]) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Read records written by [`write_records`]; labels are already mapped.
pub fn read_records(path: &Path) -> Result<Vec<ClaimRecord>, CorpusError> {
    let file = fs::File::open(path).map_err(|e| unreadable(path, e))?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| unreadable(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: ClaimRecord =
            serde_json::from_str(&line).map_err(|e| CorpusError::Malformed { row: i + 1, detail: e.to_string() })?;
        if !seen.insert(r.id.clone()) {
            return Err(CorpusError::DuplicateId(r.id));
        }
        out.push(r);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(id: &str, verdict: VerdictLabel, evidence: &str) -> ClaimRecord {
        ClaimRecord {
            id: id.into(),
            claim: format!("claim {id}"),
            date: "2021-03-04".into(),
            source: "Someone".into(),
            verdict,
            evidence: evidence.into(),
            url: format!("https://example.org/{id}"),
        }
    }

    fn temp_file(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn label_mapping() {
        assert_eq!(map_verdict_label("True").unwrap(), VerdictLabel::Supports);
        assert_eq!(map_verdict_label(" false ").unwrap(), VerdictLabel::Refutes);
        for bad in ["Half True", "Mostly True", "Mostly False", "Pants on Fire", "", "supports"] {
            assert!(matches!(map_verdict_label(bad), Err(CorpusError::UnsupportedLabel(_))), "{bad}");
        }
    }

    #[test]
    fn parse_json_lines_maps_labels() {
        let f = temp_file(
            r#"{"id":"1","claim":"X","date":"2020-01-02","source":"S","verdict":"True","evidence":"Y","url":"u"}
{"id":"2","claim":"X2","date":"2020-01-03","source":"S","verdict":"FALSE","evidence":"Y2","url":"u"}
"#,
        );
        let recs = parse_corpus(f.path(), CorpusFormat::JsonLines).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].verdict, VerdictLabel::Supports);
        assert_eq!(recs[1].verdict, VerdictLabel::Refutes);
    }

    #[test]
    fn parse_empty_file() {
        let f = temp_file("");
        assert!(parse_corpus(f.path(), CorpusFormat::JsonLines).unwrap().is_empty());
        assert!(parse_corpus(f.path(), CorpusFormat::Delimited).unwrap().is_empty());
    }

    #[test]
    fn parse_reports_missing_field_and_row() {
        let f = temp_file(r#"{"id":"1","claim":"X","date":"2020-01-02","source":"S","verdict":"True","url":"u"}"#);
        match parse_corpus(f.path(), CorpusFormat::JsonLines) {
            Err(CorpusError::MissingField { row, field }) => {
                assert_eq!(row, 1);
                assert_eq!(field, "evidence");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_rejects_duplicates_and_bad_labels() {
        let line = r#"{"id":"1","claim":"X","date":"2020-01-02","source":"S","verdict":"True","evidence":"Y","url":"u"}"#;
        let f = temp_file(&format!("{line}\n{line}\n"));
        assert!(matches!(parse_corpus(f.path(), CorpusFormat::JsonLines), Err(CorpusError::DuplicateId(id)) if id == "1"));

        let f = temp_file(&line.replace("\"True\"", "\"Half True\""));
        match parse_corpus(f.path(), CorpusFormat::JsonLines) {
            Err(CorpusError::RowLabel { row: 1, source }) => {
                assert!(matches!(*source, CorpusError::UnsupportedLabel(_)))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_delimited() {
        let f = temp_file(
            "id,claim,date,source,verdict,evidence,url\n7,\"A, claim\",2019-12-31,Gov,False,\"para one\n\npara two\",http://x\n",
        );
        let recs = parse_corpus(f.path(), CorpusFormat::Delimited).unwrap();
        assert_eq!(recs[0].claim, "A, claim");
        assert_eq!(recs[0].verdict, VerdictLabel::Refutes);
        assert_eq!(recs[0].evidence, "para one\n\npara two");
    }

    #[test]
    fn unreadable_file() {
        let err = parse_corpus(Path::new("/definitely/not/here.jsonl"), CorpusFormat::JsonLines).unwrap_err();
        assert!(matches!(err, CorpusError::UnreadableFile { .. }));
    }

    #[test]
    fn filter_drops_blocklisted_paragraphs() {
        let bl = SourceBlocklist::new(["CNN"]);
        let r = record("1", VerdictLabel::Supports, "The WHO said so.\n\nAs reported by cnn today.\n\nThe census agrees.");
        let f = filter_evidence(&r, &bl).unwrap();
        assert_eq!(f.evidence, "The WHO said so.\n\nThe census agrees.");
        // idempotent
        assert_eq!(filter_evidence(&f, &bl).unwrap(), f);
    }

    #[test]
    fn filter_identity_and_degenerate_cases() {
        let r = record("1", VerdictLabel::Supports, "Reuters wrote it.");
        assert_eq!(filter_evidence(&r, &SourceBlocklist::empty()).unwrap(), r);
        let bl = SourceBlocklist::new(["reuters"]);
        assert!(matches!(filter_evidence(&r, &bl), Err(CorpusError::EmptyEvidenceAfterFilter(id)) if id == "1"));
    }

    #[test]
    fn blocklist_matches_on_word_boundaries() {
        let bl = SourceBlocklist::builtin();
        assert_eq!(bl.len(), 30);
        assert!(bl.matches("According to NPR, the bill passed."));
        assert!(!bl.matches("An unprecedented budget."));
        assert!(bl.matches("the new york times reported"));
    }

    #[test]
    fn blocklist_normalizes_and_dedupes() {
        let bl = SourceBlocklist::parse("CNN\n cnn \n# comment\n\nBBC # trailing\n");
        assert_eq!(bl.outlets(), ["cnn", "bbc"]);
    }

    #[test]
    fn split_sizes_match_reference_table() {
        assert_eq!(split_sizes(4006, [0.70, 0.15, 0.15]), (2804, 601, 601));
        assert_eq!(split_sizes(0, [0.70, 0.15, 0.15]), (0, 0, 0));
        assert_eq!(split_sizes(1, [0.5, 0.5, 0.0]), (1, 0, 0));
    }

    #[test]
    fn split_is_deterministic_and_validates_ratios() {
        let recs: Vec<_> = (0..50).map(|i| record(&i.to_string(), VerdictLabel::Supports, "e")).collect();
        let a = split_corpus(&recs, [0.7, 0.15, 0.15], 9).unwrap();
        let b = split_corpus(&recs, [0.7, 0.15, 0.15], 9).unwrap();
        assert_eq!(a, b);
        let mut reversed = recs.clone();
        reversed.reverse();
        assert_eq!(split_corpus(&reversed, [0.7, 0.15, 0.15], 9).unwrap(), a);
        assert!(matches!(split_corpus(&recs, [0.7, 0.2, 0.2], 9), Err(CorpusError::BadRatios(_))));
        let empty = split_corpus(&[], [0.7, 0.15, 0.15], 1).unwrap();
        assert_eq!(empty.sizes(), (0, 0, 0));
    }

    #[test]
    fn manifest_reconstructs_splits() {
        let recs: Vec<_> = (0..20).map(|i| record(&i.to_string(), VerdictLabel::Refutes, "e")).collect();
        let s = split_corpus(&recs, [0.7, 0.15, 0.15], 3).unwrap();
        let m = s.manifest([0.7, 0.15, 0.15]);
        assert_eq!(m.reconstruct(&recs).unwrap(), s);
        assert!(m.reconstruct(&recs[..10]).is_err());
    }

    #[test]
    fn stats_hand_count() {
        let mut r = record("1", VerdictLabel::Supports, "one two, three four.");
        r.claim = "a b c".into();
        let s = compute_stats(&[r]).unwrap();
        assert_eq!(s.mean_claim_tokens, 3.0);
        assert_eq!(s.mean_evidence_tokens, 4.0);
        assert_eq!(s.label_count(VerdictLabel::Refutes), 0);
        assert!(matches!(compute_stats(&[]), Err(CorpusError::EmptyCorpus)));
    }

    #[test]
    fn canonical_store_round_trip() {
        let recs = vec![record("a", VerdictLabel::Supports, "x"), record("b", VerdictLabel::Refutes, "y\n\nz")];
        let mut buf = Vec::new();
        write_records(&mut buf, &recs).unwrap();
        let line = String::from_utf8(buf.clone()).unwrap();
        assert!(line.starts_with(r#"{"id":"a","claim":"claim a","date":"2021-03-04","source":"Someone","verdict":"Supports""#));
        let f = temp_file(&line);
        assert_eq!(read_records(f.path()).unwrap(), recs);
    }
}
