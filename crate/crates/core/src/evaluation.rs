//! Scoring and audits: macro-F1 over verdicts, entailment checks of the
//! explanations, and the manual-rating sheet round trip.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::BackendFailure;
use crate::corpus::VerdictLabel;
use crate::nle::NleText;
use crate::text;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("predictions ({predictions}) and golds ({golds}) differ in length")]
    LengthMismatch { predictions: usize, golds: usize },
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("NLI output `{0}` is not entailment, neutral or contradiction")]
    UndecodableNliOutput(String),
    #[error("cannot sample {requested} tasks from {available} records")]
    SampleTooLarge { requested: usize, available: usize },
    #[error("{file}: item `{item}` has rating `{value}` outside 1-5")]
    OutOfRangeRating { file: String, item: String, value: String },
    #[error("{file}: malformed annotation file: {detail}")]
    MalformedAnnotation { file: String, detail: String },
    #[error(transparent)]
    Backend(#[from] BackendFailure),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// 2x2 confusion counts, indexed `[gold][predicted]` with Supports = 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub counts: [[usize; 2]; 2],
}

fn idx(label: VerdictLabel) -> usize {
    match label {
        VerdictLabel::Supports => 0,
        VerdictLabel::Refutes => 1,
    }
}

impl ConfusionCounts {
    pub fn from_labels(predictions: &[VerdictLabel], golds: &[VerdictLabel]) -> Self {
        let mut counts = [[0usize; 2]; 2];
        for (p, g) in predictions.iter().zip(golds) {
            counts[idx(*g)][idx(*p)] += 1;
        }
        ConfusionCounts { counts }
    }

    pub fn get(&self, gold: VerdictLabel, predicted: VerdictLabel) -> usize {
        self.counts[idx(gold)][idx(predicted)]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// `2tp / (2tp + fp + fn)`, or 0 when the class never occurs.
    pub fn f1(&self, class: VerdictLabel) -> f64 {
        let c = idx(class);
        let tp = self.counts[c][c];
        let fp = self.counts[1 - c][c];
        let fn_ = self.counts[c][1 - c];
        let denom = 2 * tp + fp + fn_;
        if denom == 0 {
            0.0
        } else {
            (2 * tp) as f64 / denom as f64
        }
    }
}

/// Unweighted mean of the per-class F1 over both labels.
pub fn macro_f1(predictions: &[VerdictLabel], golds: &[VerdictLabel]) -> Result<f64, EvalError> {
    if predictions.len() != golds.len() {
        return Err(EvalError::LengthMismatch { predictions: predictions.len(), golds: golds.len() });
    }
    if golds.is_empty() {
        return Err(EvalError::EmptyInput("no labels to score"));
    }
    let cm = ConfusionCounts::from_labels(predictions, golds);
    let mut sum = 0.0;
    for class in VerdictLabel::ALL {
        let present = golds.contains(&class) || predictions.contains(&class);
        if !present {
            log::warn!("class {class} absent from golds and predictions; its F1 counts as 0");
        }
        sum += cm.f1(class);
    }
    Ok(sum / VerdictLabel::ALL.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NliVerdict {
    Entailment,
    Neutral,
    Contradiction,
}

impl NliVerdict {
    pub const ALL: [NliVerdict; 3] = [NliVerdict::Entailment, NliVerdict::Neutral, NliVerdict::Contradiction];

    pub fn as_str(self) -> &'static str {
        match self {
            NliVerdict::Entailment => "entailment",
            NliVerdict::Neutral => "neutral",
            NliVerdict::Contradiction => "contradiction",
        }
    }
}

impl fmt::Display for NliVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn decode_nli(raw: &str) -> Result<NliVerdict, EvalError> {
    match raw.trim().to_lowercase().as_str() {
        "entailment" => Ok(NliVerdict::Entailment),
        "neutral" => Ok(NliVerdict::Neutral),
        "contradiction" => Ok(NliVerdict::Contradiction),
        _ => Err(EvalError::UndecodableNliOutput(raw.to_string())),
    }
}

pub const NLI_HYPOTHESIS: &str = "cb hypothesis: ";
pub const NLI_PREMISE: &str = " premise: ";

/// Entailment prompt with the claim as hypothesis and the explanation as
/// premise.
pub fn build_nli_prompt(claim: &str, nle: &NleText) -> Result<String, EvalError> {
    if claim.trim().is_empty() {
        return Err(EvalError::EmptyInput("claim"));
    }
    if nle.text.trim().is_empty() {
        return Err(EvalError::EmptyInput("explanation"));
    }
    Ok(format!("{NLI_HYPOTHESIS}{claim}{NLI_PREMISE}{}", nle.text))
}

pub trait NliBackend {
    fn id(&self) -> &str;
    fn infer(&self, prompt: &str) -> Result<String, BackendFailure>;
}

/// Deterministic word-overlap judge for desk-scale runs.
///
/// When at least half of the hypothesis tokens occur in the premise, the
/// explanation's verdict word decides entailment or contradiction;
/// otherwise the pair is neutral.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalNliBackend;

impl LexicalNliBackend {
    pub const ID: &'static str = "stub-lexical";
}

impl NliBackend for LexicalNliBackend {
    fn id(&self) -> &str {
        Self::ID
    }

    fn infer(&self, prompt: &str) -> Result<String, BackendFailure> {
        let rest = prompt
            .strip_prefix(NLI_HYPOTHESIS)
            .ok_or_else(|| BackendFailure::new(Self::ID, "prompt lacks the hypothesis marker"))?;
        let (hypothesis, premise) = rest
            .split_once(NLI_PREMISE)
            .ok_or_else(|| BackendFailure::new(Self::ID, "prompt lacks the premise marker"))?;
        let lower = |s: &str| -> Vec<String> { text::stat_tokens(s).into_iter().map(|t| t.to_lowercase()).collect() };
        let hyp = lower(hypothesis);
        let prem: std::collections::HashSet<String> = lower(premise).into_iter().collect();
        let covered = hyp.iter().filter(|t| prem.contains(*t)).count();
        let verdict = if hyp.is_empty() || 2 * covered < hyp.len() {
            NliVerdict::Neutral
        } else if premise.starts_with("The evidence refutes") {
            NliVerdict::Contradiction
        } else {
            NliVerdict::Entailment
        };
        Ok(verdict.as_str().to_string())
    }
}

/// Fixed outputs keyed by prompt.
#[derive(Debug, Clone, Default)]
pub struct FixtureNliBackend {
    pub outputs: BTreeMap<String, String>,
}

impl NliBackend for FixtureNliBackend {
    fn id(&self) -> &str {
        "stub-fixture-nli"
    }

    fn infer(&self, prompt: &str) -> Result<String, BackendFailure> {
        self.outputs
            .get(prompt)
            .cloned()
            .ok_or_else(|| BackendFailure::new(self.id(), "prompt not programmed"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NliReport {
    pub total: usize,
    pub counts: BTreeMap<NliVerdict, usize>,
    pub percentages: BTreeMap<NliVerdict, f64>,
}

/// `100 * count / total` cut (not rounded) to one decimal.
///
/// Integer arithmetic, so 168/601 gives exactly 27.9.
pub fn one_decimal_percentage(count: usize, total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let tenths = (1000 * count as u128) / total as u128;
    tenths as f64 / 10.0
}

impl NliReport {
    pub fn from_verdicts(verdicts: &[NliVerdict]) -> Self {
        let mut counts: BTreeMap<NliVerdict, usize> = NliVerdict::ALL.iter().map(|v| (*v, 0)).collect();
        for v in verdicts {
            *counts.entry(*v).or_default() += 1;
        }
        let total = verdicts.len();
        let percentages = counts.iter().map(|(v, c)| (*v, one_decimal_percentage(*c, total))).collect();
        NliReport { total, counts, percentages }
    }

    pub fn count(&self, v: NliVerdict) -> usize {
        self.counts.get(&v).copied().unwrap_or(0)
    }

    pub fn percentage(&self, v: NliVerdict) -> f64 {
        self.percentages.get(&v).copied().unwrap_or(0.0)
    }
}

/// Per-record entailment verdicts for `(claim, explanation)` pairs.
pub fn nli_verdicts(records: &[(String, NleText)], backend: &dyn NliBackend) -> Result<Vec<(String, NliVerdict)>, EvalError> {
    records
        .iter()
        .map(|(claim, nle)| {
            let prompt = build_nli_prompt(claim, nle)?;
            let raw = backend.infer(&prompt)?;
            Ok((nle.record_id.clone(), decode_nli(&raw)?))
        })
        .collect()
}

pub fn evaluate_nli(records: &[(String, NleText)], backend: &dyn NliBackend) -> Result<NliReport, EvalError> {
    let verdicts: Vec<NliVerdict> = nli_verdicts(records, backend)?.into_iter().map(|(_, v)| v).collect();
    Ok(NliReport::from_verdicts(&verdicts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Plausibility,
    Fluency,
    Correctness,
}

impl Criterion {
    pub const ALL: [Criterion; 3] = [Criterion::Plausibility, Criterion::Fluency, Criterion::Correctness];

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Plausibility => "plausibility",
            Criterion::Fluency => "fluency",
            Criterion::Correctness => "correctness",
        }
    }

    /// Annotator-facing description of what the rating measures.
    pub fn definition(self) -> &'static str {
        match self {
            Criterion::Plausibility => "does the explanation make a convincing case for the predicted verdict",
            Criterion::Fluency => "is the explanation well written (spelling, grammar, flow, tone)",
            Criterion::Correctness => "how likely is it that the explanation and the verdict are true",
        }
    }

    /// Rating labels from 5 down to 1.
    pub fn scale(self) -> [(&'static str, u8); 5] {
        match self {
            Criterion::Plausibility => [
                ("Very Convincing", 5),
                ("Slightly Convincing", 4),
                ("Slightly Not Convincing", 3),
                ("Not Convincing", 2),
                ("Can Not Judge", 1),
            ],
            Criterion::Fluency => [
                ("Flawless English", 5),
                ("Good English", 4),
                ("Non-native English", 3),
                ("Disfluent English", 2),
                ("Incomprehensible", 1),
            ],
            Criterion::Correctness => [
                ("Absolutely True", 5),
                ("Probably True", 4),
                ("Probably Not True", 3),
                ("Absolutely Not True", 2),
                ("Can Not Judge", 1),
            ],
        }
    }
}

/// One claim/explanation pair to be rated on every criterion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationTask {
    pub item_id: String,
    pub claim: String,
    pub nle: String,
    pub plausibility: Option<u8>,
    pub fluency: Option<u8>,
    pub correctness: Option<u8>,
    pub annotator_id: String,
    pub system_id: String,
}

impl AnnotationTask {
    pub fn rating(&self, c: Criterion) -> Option<u8> {
        match c {
            Criterion::Plausibility => self.plausibility,
            Criterion::Fluency => self.fluency,
            Criterion::Correctness => self.correctness,
        }
    }
}

pub const ANNOTATION_COLUMNS: [&str; 8] =
    ["item_id", "claim", "nle", "plausibility", "fluency", "correctness", "annotator_id", "system_id"];

/// Seeded sample of `n` items, in sampled order, with empty ratings.
pub fn export_annotation_tasks(
    items: &[(String, String, String)],
    n: usize,
    seed: u64,
    system_id: &str,
) -> Result<Vec<AnnotationTask>, EvalError> {
    if n > items.len() {
        return Err(EvalError::SampleTooLarge { requested: n, available: items.len() });
    }
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    Ok(order[..n]
        .iter()
        .map(|&i| {
            let (id, claim, nle) = &items[i];
            AnnotationTask {
                item_id: id.clone(),
                claim: claim.clone(),
                nle: nle.clone(),
                plausibility: None,
                fluency: None,
                correctness: None,
                annotator_id: String::new(),
                system_id: system_id.to_string(),
            }
        })
        .collect())
}

/// Write the legend as `#` comment lines followed by a CSV table.
pub fn write_annotation_file<W: Write>(mut out: W, tasks: &[AnnotationTask]) -> Result<(), EvalError> {
    writeln!(out, "# Rate every item from 1 to 5 on each criterion. Work alone; use only the claim and explanation shown.")?;
    for c in Criterion::ALL {
        let scale: Vec<String> = c.scale().iter().map(|(label, v)| format!("\"{label}\"={v}")).collect();
        writeln!(out, "# {}: {}", c.as_str(), c.definition())?;
        writeln!(out, "#   {}", scale.join(", "))?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(ANNOTATION_COLUMNS).map_err(csv_io)?;
    let fmt_rating = |r: Option<u8>| r.map(|v| v.to_string()).unwrap_or_default();
    for t in tasks {
        w.write_record([
            t.item_id.as_str(),
            &t.claim,
            &t.nle,
            &fmt_rating(t.plausibility),
            &fmt_rating(t.fluency),
            &fmt_rating(t.correctness),
            &t.annotator_id,
            &t.system_id,
        ])
        .map_err(csv_io)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_io(e: csv::Error) -> EvalError {
    EvalError::Io(std::io::Error::other(e))
}

/// Read a (possibly filled) annotation file.
///
/// Every rating must be filled with an integer in 1-5.
pub fn read_annotation_file(path: &Path) -> Result<Vec<AnnotationTask>, EvalError> {
    let file = path.display().to_string();
    let malformed = |detail: String| EvalError::MalformedAnnotation { file: file.clone(), detail };
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| malformed(e.to_string()))?;
    let headers = reader.headers().map_err(|e| malformed(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name).ok_or_else(|| malformed(format!("missing column `{name}`")));
    let cols: Vec<usize> = ANNOTATION_COLUMNS.iter().map(|c| col(c)).collect::<Result<_, _>>()?;
    let mut tasks = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| malformed(e.to_string()))?;
        let field = |k: usize| rec.get(cols[k]).unwrap_or("").to_string();
        let item = field(0);
        let rating = |k: usize| -> Result<Option<u8>, EvalError> {
            let raw = field(k);
            match raw.trim().parse::<u8>() {
                Ok(v) if (1..=5).contains(&v) => Ok(Some(v)),
                _ => Err(EvalError::OutOfRangeRating { file: file.clone(), item: item.clone(), value: raw }),
            }
        };
        tasks.push(AnnotationTask {
            plausibility: rating(3)?,
            fluency: rating(4)?,
            correctness: rating(5)?,
            item_id: item.clone(),
            claim: field(1),
            nle: field(2),
            annotator_id: field(6),
            system_id: field(7),
        });
    }
    Ok(tasks)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationSummary {
    /// system -> criterion -> mean over all annotators and items
    pub per_system: BTreeMap<String, BTreeMap<Criterion, f64>>,
    /// system -> annotator -> criterion -> mean over that annotator's items
    pub per_annotator: BTreeMap<String, BTreeMap<String, BTreeMap<Criterion, f64>>>,
    pub rated_items: usize,
}

/// Means over filled ratings. Integer sums keep the result independent of
/// row order.
pub fn aggregate_ratings(tasks: &[AnnotationTask]) -> Result<AnnotationSummary, EvalError> {
    if tasks.is_empty() {
        return Err(EvalError::EmptyInput("no annotation rows"));
    }
    type Acc = BTreeMap<Criterion, (u64, u64)>;
    let mut sys: BTreeMap<String, Acc> = BTreeMap::new();
    let mut ann: BTreeMap<String, BTreeMap<String, Acc>> = BTreeMap::new();
    for t in tasks {
        for c in Criterion::ALL {
            let Some(r) = t.rating(c) else {
                return Err(EvalError::OutOfRangeRating {
                    file: "<memory>".into(),
                    item: t.item_id.clone(),
                    value: String::new(),
                });
            };
            let e = sys.entry(t.system_id.clone()).or_default().entry(c).or_default();
            e.0 += r as u64;
            e.1 += 1;
            let e = ann
                .entry(t.system_id.clone())
                .or_default()
                .entry(t.annotator_id.clone())
                .or_default()
                .entry(c)
                .or_default();
            e.0 += r as u64;
            e.1 += 1;
        }
    }
    let means = |acc: &Acc| acc.iter().map(|(c, (s, n))| (*c, *s as f64 / *n as f64)).collect();
    Ok(AnnotationSummary {
        per_system: sys.iter().map(|(k, v)| (k.clone(), means(v))).collect(),
        per_annotator: ann
            .iter()
            .map(|(k, v)| (k.clone(), v.iter().map(|(a, acc)| (a.clone(), means(acc))).collect()))
            .collect(),
        rated_items: tasks.len(),
    })
}

pub fn aggregate_annotations<P: AsRef<Path>>(files: &[P]) -> Result<AnnotationSummary, EvalError> {
    let mut all = Vec::new();
    for f in files {
        all.extend(read_annotation_file(f.as_ref())?);
    }
    aggregate_ratings(&all)
}

/// Combined evaluation summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub macro_f1: BTreeMap<String, f64>,
    pub nli: Option<NliReport>,
    pub annotations: Option<AnnotationSummary>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use VerdictLabel::{Refutes as R, Supports as S};

    #[test]
    fn perfect_and_hand_cases() {
        assert_eq!(macro_f1(&[S, R, S], &[S, R, S]).unwrap(), 1.0);
        // golds S S R R, preds S R R R: Supports F1 = 2/3, Refutes F1 = 4/5
        let v = macro_f1(&[S, R, R, R], &[S, S, R, R]).unwrap();
        assert!((v - (2.0 / 3.0 + 0.8) / 2.0).abs() < 1e-15);
        // one class absent everywhere
        assert_eq!(macro_f1(&[S, S], &[S, S]).unwrap(), 0.5);
    }

    #[test]
    fn metric_errors() {
        assert!(matches!(macro_f1(&[S], &[S, R]), Err(EvalError::LengthMismatch { .. })));
        assert!(matches!(macro_f1(&[], &[]), Err(EvalError::EmptyInput(_))));
    }

    #[test]
    fn confusion_total() {
        let cm = ConfusionCounts::from_labels(&[S, R, R], &[R, R, S]);
        assert_eq!(cm.total(), 3);
        assert_eq!(cm.get(R, S), 1);
    }

    fn nle(id: &str, text: &str) -> NleText {
        NleText { record_id: id.into(), text: text.into(), verdict_word: "supports".into(), rationale_text: String::new() }
    }

    #[test]
    fn nli_prompt() {
        assert_eq!(build_nli_prompt("C0", &nle("1", "N0")).unwrap(), "cb hypothesis: C0 premise: N0");
        assert!(matches!(build_nli_prompt("C0", &nle("1", "")), Err(EvalError::EmptyInput(_))));
    }

    #[test]
    fn reference_table_percentages() {
        let mut v = vec![NliVerdict::Entailment; 168];
        v.extend(vec![NliVerdict::Neutral; 253]);
        v.extend(vec![NliVerdict::Contradiction; 180]);
        let r = NliReport::from_verdicts(&v);
        assert_eq!(r.total, 601);
        assert_eq!(r.percentage(NliVerdict::Entailment), 27.9);
        assert_eq!(r.percentage(NliVerdict::Neutral), 42.0);
        assert_eq!(r.percentage(NliVerdict::Contradiction), 29.9);

        let all = NliReport::from_verdicts(&[NliVerdict::Entailment; 4]);
        assert_eq!(all.percentage(NliVerdict::Entailment), 100.0);
        assert_eq!(all.percentage(NliVerdict::Neutral), 0.0);

        let one = NliReport::from_verdicts(&[NliVerdict::Neutral]);
        assert_eq!((one.count(NliVerdict::Entailment), one.count(NliVerdict::Neutral), one.count(NliVerdict::Contradiction)), (0, 1, 0));
    }

    #[test]
    fn nli_decoding_and_backends() {
        assert_eq!(decode_nli(" Neutral").unwrap(), NliVerdict::Neutral);
        assert!(matches!(decode_nli("yes"), Err(EvalError::UndecodableNliOutput(_))));

        let b = LexicalNliBackend;
        let s = b.infer("cb hypothesis: Exports fell premise: The evidence supports the claim because exports fell.").unwrap();
        assert_eq!(s, "entailment");
        let s = b.infer("cb hypothesis: Exports fell premise: The evidence refutes the claim because exports fell.").unwrap();
        assert_eq!(s, "contradiction");
        let s = b.infer("cb hypothesis: Exports fell premise: The evidence supports the claim because of rain.").unwrap();
        assert_eq!(s, "neutral");

        let mut fx = FixtureNliBackend::default();
        fx.outputs.insert("cb hypothesis: c premise: n".into(), "banana".into());
        let recs = vec![("c".to_string(), nle("1", "n"))];
        assert!(matches!(evaluate_nli(&recs, &fx), Err(EvalError::UndecodableNliOutput(_))));
    }

    fn items(n: usize) -> Vec<(String, String, String)> {
        (0..n).map(|i| (format!("id{i}"), format!("claim {i}"), format!("nle {i}"))).collect()
    }

    #[test]
    fn annotation_sampling() {
        let it = items(601);
        let a = export_annotation_tasks(&it, 100, 5, "sys").unwrap();
        assert_eq!(a.len(), 100);
        assert_eq!(a, export_annotation_tasks(&it, 100, 5, "sys").unwrap());
        assert!(export_annotation_tasks(&it, 0, 5, "sys").unwrap().is_empty());
        assert!(matches!(export_annotation_tasks(&it[..3], 4, 5, "sys"), Err(EvalError::SampleTooLarge { .. })));
    }

    fn task(item: &str, annot: &str, sys: &str, r: [u8; 3]) -> AnnotationTask {
        AnnotationTask {
            item_id: item.into(),
            claim: "c".into(),
            nle: "n".into(),
            plausibility: Some(r[0]),
            fluency: Some(r[1]),
            correctness: Some(r[2]),
            annotator_id: annot.into(),
            system_id: sys.into(),
        }
    }

    #[test]
    fn aggregation_means() {
        let rows = vec![task("i", "a1", "s", [4, 5, 1]), task("i", "a2", "s", [4, 5, 2]), task("i", "a3", "s", [5, 5, 3])];
        let sum = aggregate_ratings(&rows).unwrap();
        let m = &sum.per_system["s"];
        assert!((m[&Criterion::Plausibility] - 4.333).abs() < 5e-4);
        assert_eq!(m[&Criterion::Fluency], 5.0);
        assert_eq!(m[&Criterion::Correctness], 2.0);
        assert_eq!(sum.per_annotator["s"]["a3"][&Criterion::Plausibility], 5.0);

        let mut rev = rows.clone();
        rev.reverse();
        assert_eq!(aggregate_ratings(&rev).unwrap(), sum);
    }

    #[test]
    fn annotation_file_round_trip_and_range_check() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        let rows = vec![task("i1", "a", "s", [1, 2, 3]), task("i2", "a", "s", [5, 5, 5])];
        write_annotation_file(std::fs::File::create(&path).unwrap(), &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("\"Very Convincing\"=5"));
        assert_eq!(read_annotation_file(&path).unwrap(), rows);

        let bad = text.replace("i2,c,n,5,5,5", "i2,c,n,6,5,5");
        std::fs::write(&path, bad).unwrap();
        match aggregate_annotations(&[&path]) {
            Err(EvalError::OutOfRangeRating { item, value, .. }) => {
                assert_eq!(item, "i2");
                assert_eq!(value, "6");
            }
            other => panic!("{other:?}"),
        }
    }
}
