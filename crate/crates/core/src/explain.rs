//! Shapley-value attribution of rationale generation to evidence features.
//!
//! Two estimators share one contract: exact enumeration over all coalitions
//! for small feature sets, and a seeded permutation-sampling estimator for
//! larger ones.

use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::BackendFailure;
use crate::rationale::{generate_rationale, Rationale, RationaleError, SummarizationBackend, SummaryConfig};
use crate::text;

/// Largest feature count accepted by [`exact_shapley`].
pub const MAX_EXACT_FEATURES: usize = 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExplainError {
    #[error("{0} features exceed the exact enumeration limit of {MAX_EXACT_FEATURES}")]
    TooManyFeatures(usize),
    #[error("no features to attribute")]
    NoFeatures,
    #[error("num_permutations must be at least 1")]
    NoPermutations,
    #[error("coalition value is not finite")]
    NonFiniteValue,
    #[error(transparent)]
    Backend(#[from] BackendFailure),
}

impl From<RationaleError> for ExplainError {
    fn from(e: RationaleError) -> Self {
        match e {
            RationaleError::Backend(b) => ExplainError::Backend(b),
            other => ExplainError::Backend(BackendFailure::new("coalition-summary", other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Granularity {
    Sentence,
    Token,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Feature {
    pub index: usize,
    pub text: String,
    pub granularity: Granularity,
}

/// Partition evidence into ordered features.
pub fn evidence_features(evidence: &str, granularity: Granularity) -> Vec<Feature> {
    let pieces: Vec<String> = match granularity {
        Granularity::Sentence => text::split_sentences(evidence),
        Granularity::Token => text::whitespace_tokens(evidence).into_iter().map(str::to_string).collect(),
    };
    pieces
        .into_iter()
        .enumerate()
        .map(|(index, text)| Feature { index, text, granularity })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exact,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionResult {
    pub features: Vec<Feature>,
    pub phi: Vec<f64>,
    pub value_empty: f64,
    pub value_full: f64,
    pub method: Method,
    pub num_permutations: Option<usize>,
    pub seed: Option<u64>,
}

impl AttributionResult {
    /// `sum(phi) - (v(N) - v(empty))`.
    pub fn efficiency_gap(&self) -> f64 {
        self.phi.iter().sum::<f64>() - (self.value_full - self.value_empty)
    }
}

/// Value of a coalition, given as ascending feature indices.
pub trait CoalitionValueFn {
    fn evaluate(&self, coalition: &[usize]) -> Result<f64, BackendFailure>;
}

impl<F> CoalitionValueFn for F
where
    F: Fn(&[usize]) -> Result<f64, BackendFailure>,
{
    fn evaluate(&self, coalition: &[usize]) -> Result<f64, BackendFailure> {
        self(coalition)
    }
}

/// A game given as a full table of `2^n` values indexed by membership
/// bitmask (bit `i` set when feature `i` is in the coalition).
#[derive(Debug, Clone, PartialEq)]
pub struct TableGame {
    values: Vec<f64>,
}

impl TableGame {
    pub fn new(values: Vec<f64>) -> Option<Self> {
        (values.len().is_power_of_two()).then_some(TableGame { values })
    }

    pub fn num_players(&self) -> usize {
        self.values.len().trailing_zeros() as usize
    }

    pub fn value(&self, mask: usize) -> f64 {
        self.values[mask]
    }
}

impl CoalitionValueFn for TableGame {
    fn evaluate(&self, coalition: &[usize]) -> Result<f64, BackendFailure> {
        Ok(self.values[coalition.iter().fold(0usize, |m, &i| m | (1 << i))])
    }
}

fn checked(v: f64) -> Result<f64, ExplainError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ExplainError::NonFiniteValue)
    }
}

fn members(mask: usize, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask & (1 << i) != 0).collect()
}

/// Exact Shapley values by enumerating every coalition once.
///
/// `phi_i = sum over S not containing i of |S|! (n-|S|-1)! / n! * (v(S+i) - v(S))`
pub fn exact_shapley(features: &[Feature], value_fn: &dyn CoalitionValueFn) -> Result<AttributionResult, ExplainError> {
    let n = features.len();
    if n == 0 {
        return Err(ExplainError::NoFeatures);
    }
    if n > MAX_EXACT_FEATURES {
        return Err(ExplainError::TooManyFeatures(n));
    }
    let values: Vec<f64> = (0..1usize << n)
        .map(|mask| checked(value_fn.evaluate(&members(mask, n))?))
        .collect::<Result<_, ExplainError>>()?;

    // weight[s] = s! (n-s-1)! / n!, built as a ratio to stay exact-ish for n <= 14
    let factorial = |k: usize| (1..=k).map(|x| x as f64).product::<f64>();
    let weights: Vec<f64> = (0..n).map(|s| factorial(s) * factorial(n - s - 1) / factorial(n)).collect();

    let mut phi = vec![0.0; n];
    for (i, phi_i) in phi.iter_mut().enumerate() {
        let bit = 1 << i;
        let mut acc = 0.0;
        for mask in 0..1usize << n {
            if mask & bit == 0 {
                let s = mask.count_ones() as usize;
                acc += weights[s] * (values[mask | bit] - values[mask]);
            }
        }
        *phi_i = acc;
    }
    Ok(AttributionResult {
        features: features.to_vec(),
        phi,
        value_empty: values[0],
        value_full: values[(1 << n) - 1],
        method: Method::Exact,
        num_permutations: None,
        seed: None,
    })
}

/// Monte Carlo estimate: average marginal contributions along seeded
/// random orderings. Each ordering telescopes to `v(N) - v(empty)`, so the
/// efficiency property holds for the average as well.
pub fn sampled_shapley(
    features: &[Feature],
    value_fn: &dyn CoalitionValueFn,
    num_permutations: usize,
    seed: u64,
) -> Result<AttributionResult, ExplainError> {
    let n = features.len();
    if n == 0 {
        return Err(ExplainError::NoFeatures);
    }
    if num_permutations == 0 {
        return Err(ExplainError::NoPermutations);
    }
    let cache: RefCell<HashMap<Vec<usize>, f64>> = RefCell::new(HashMap::new());
    let eval = |coalition: &[usize]| -> Result<f64, ExplainError> {
        if let Some(v) = cache.borrow().get(coalition) {
            return Ok(*v);
        }
        let v = checked(value_fn.evaluate(coalition)?)?;
        cache.borrow_mut().insert(coalition.to_vec(), v);
        Ok(v)
    };

    let value_empty = eval(&[])?;
    let all: Vec<usize> = (0..n).collect();
    let value_full = eval(&all)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = all.clone();
    let mut totals = vec![0.0; n];
    let mut coalition: Vec<usize> = Vec::with_capacity(n);
    for _ in 0..num_permutations {
        order.shuffle(&mut rng);
        coalition.clear();
        let mut prev = value_empty;
        for &i in &order {
            let pos = coalition.binary_search(&i).unwrap_err();
            coalition.insert(pos, i);
            let cur = eval(&coalition)?;
            totals[i] += cur - prev;
            prev = cur;
        }
    }
    let phi = totals.into_iter().map(|t| t / num_permutations as f64).collect();
    Ok(AttributionResult {
        features: features.to_vec(),
        phi,
        value_empty,
        value_full,
        method: Method::Sampled,
        num_permutations: Some(num_permutations),
        seed: Some(seed),
    })
}

/// Coalition value for rationale generation: token-overlap F1 between the
/// summary of the coalition-only evidence and the reference rationale.
/// Features outside the coalition are removed, not masked.
pub struct RationaleValueFn<'a> {
    record_id: String,
    features: Vec<Feature>,
    reference: String,
    backend: &'a dyn SummarizationBackend,
    config: SummaryConfig,
}

impl<'a> RationaleValueFn<'a> {
    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    fn coalition_text(&self, coalition: &[usize]) -> String {
        let sep = match self.features.first().map(|f| f.granularity) {
            // one sentence per line reproduces the original sentence boundaries
            Some(Granularity::Sentence) => "\n",
            _ => " ",
        };
        coalition.iter().map(|&i| self.features[i].text.as_str()).collect::<Vec<_>>().join(sep)
    }
}

impl CoalitionValueFn for RationaleValueFn<'_> {
    fn evaluate(&self, coalition: &[usize]) -> Result<f64, BackendFailure> {
        if coalition.is_empty() {
            return Ok(0.0);
        }
        let evidence = self.coalition_text(coalition);
        let summary = generate_rationale(&self.record_id, &evidence, self.backend, &self.config).map_err(|e| match e {
            RationaleError::Backend(b) => b,
            other => BackendFailure::new(self.backend.id(), other.to_string()),
        })?;
        Ok(text::token_overlap_f1(&summary.text, &self.reference))
    }
}

pub fn rationale_value_fn<'a>(
    evidence: &str,
    reference: &Rationale,
    backend: &'a dyn SummarizationBackend,
    config: &SummaryConfig,
    granularity: Granularity,
) -> RationaleValueFn<'a> {
    RationaleValueFn {
        record_id: reference.record_id.clone(),
        features: evidence_features(evidence, granularity),
        reference: reference.text.clone(),
        backend,
        config: *config,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
    Zero,
}

/// Magnitudes at or below this are reported as zero.
const ZERO_TOLERANCE: f64 = 1e-12;

pub fn polarity(phi: f64) -> Polarity {
    if phi > ZERO_TOLERANCE {
        Polarity::Positive
    } else if phi < -ZERO_TOLERANCE {
        Polarity::Negative
    } else {
        Polarity::Zero
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HighlightDoc {
    pub record_id: String,
    pub features: Vec<String>,
    pub phi: Vec<f64>,
    pub polarity: Vec<Polarity>,
    pub intensity: Vec<f64>,
}

pub fn export_highlights(record_id: &str, result: &AttributionResult) -> HighlightDoc {
    let max_abs = result.phi.iter().fold(0.0f64, |m, p| m.max(p.abs()));
    HighlightDoc {
        record_id: record_id.to_string(),
        features: result.features.iter().map(|f| f.text.clone()).collect(),
        phi: result.phi.clone(),
        polarity: result.phi.iter().map(|&p| polarity(p)).collect(),
        intensity: result.phi.iter().map(|p| if max_abs > 0.0 { p.abs() / max_abs } else { 0.0 }).collect(),
    }
}

fn escape_html(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Standalone HTML page: blue for positive contributions, red for negative,
/// opacity proportional to `|phi| / max|phi|`.
pub fn render_highlights_html(docs: &[HighlightDoc]) -> String {
    let mut html = String::from(
        "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>Evidence attributions</title>\n\
         <style>body{font-family:sans-serif;max-width:60em;margin:2em auto}span{padding:1px 2px}</style>\n\
         </head>\n<body>\n",
    );
    for doc in docs {
        let _ = writeln!(html, "<section>\n<h3>{}</h3>\n<p>", escape_html(&doc.record_id));
        for (((text, phi), pol), alpha) in doc.features.iter().zip(&doc.phi).zip(&doc.polarity).zip(&doc.intensity) {
            let rgb = match pol {
                Polarity::Positive => "30,90,255",
                Polarity::Negative => "255,40,40",
                Polarity::Zero => "128,128,128",
            };
            let _ = writeln!(
                html,
                "<span title=\"{phi:.6}\" style=\"background-color:rgba({rgb},{alpha:.3})\">{}</span>",
                escape_html(text)
            );
        }
        html.push_str("</p>\n</section>\n");
    }
    html.push_str("</body>\n</html>\n");
    html
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rationale::LeadSentenceSummarizer;

    fn feats(n: usize) -> Vec<Feature> {
        (0..n).map(|i| Feature { index: i, text: format!("f{i}"), granularity: Granularity::Sentence }).collect()
    }

    /// Brute force over all orderings.
    fn permutation_oracle(n: usize, v: &dyn Fn(usize) -> f64) -> Vec<f64> {
        fn permute(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if rest.is_empty() {
                out.push(prefix.clone());
                return;
            }
            for k in 0..rest.len() {
                let x = rest.remove(k);
                prefix.push(x);
                permute(prefix, rest, out);
                prefix.pop();
                rest.insert(k, x);
            }
        }
        let mut perms = Vec::new();
        permute(&mut Vec::new(), &mut (0..n).collect(), &mut perms);
        let mut phi = vec![0.0; n];
        for p in &perms {
            let mut mask = 0;
            for &i in p {
                phi[i] += v(mask | (1 << i)) - v(mask);
                mask |= 1 << i;
            }
        }
        phi.iter().map(|x| x / perms.len() as f64).collect()
    }

    fn three_player_game() -> TableGame {
        // v(0)=0, v({0})=1, v({1})=1, v({2})=0, v({0,1})=2, v({0,2})=2, v({1,2})=1, v(N)=3
        TableGame::new(vec![0.0, 1.0, 1.0, 2.0, 0.0, 2.0, 1.0, 3.0]).unwrap()
    }

    #[test]
    fn three_player_hand_game() {
        let g = three_player_game();
        let oracle = permutation_oracle(3, &|m| g.value(m));
        // six orderings, counted by hand: 9/6, 6/6, 3/6
        assert_eq!(oracle, vec![1.5, 1.0, 0.5]);
        let r = exact_shapley(&feats(3), &g).unwrap();
        for (a, b) in r.phi.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn null_player_and_additive_games() {
        let constant = |_: &[usize]| Ok(4.2);
        let r = exact_shapley(&feats(5), &constant).unwrap();
        assert!(r.phi.iter().all(|p| *p == 0.0));

        let w = [0.3, -1.0, 2.5, 0.0];
        let additive = move |s: &[usize]| Ok(s.iter().map(|&i| w[i]).sum());
        let r = exact_shapley(&feats(4), &additive).unwrap();
        for (p, wi) in r.phi.iter().zip(w) {
            assert!((p - wi).abs() < 1e-12);
        }
    }

    #[test]
    fn guards() {
        let g = |_: &[usize]| Ok(0.0);
        assert_eq!(exact_shapley(&feats(15), &g).unwrap_err(), ExplainError::TooManyFeatures(15));
        assert_eq!(exact_shapley(&[], &g).unwrap_err(), ExplainError::NoFeatures);
        assert_eq!(sampled_shapley(&feats(2), &g, 0, 1).unwrap_err(), ExplainError::NoPermutations);
        let nan = |_: &[usize]| Ok(f64::NAN);
        assert_eq!(exact_shapley(&feats(2), &nan).unwrap_err(), ExplainError::NonFiniteValue);
    }

    #[test]
    fn single_permutation_equals_its_marginals() {
        let g = three_player_game();
        let r = sampled_shapley(&feats(3), &g, 1, 5).unwrap();
        // recover the ordering the seed produced
        let mut order: Vec<usize> = (0..3).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(5));
        let mut mask = 0;
        let mut expected = vec![0.0; 3];
        for i in order {
            expected[i] = g.value(mask | (1 << i)) - g.value(mask);
            mask |= 1 << i;
        }
        assert_eq!(r.phi, expected);
        assert!(r.efficiency_gap().abs() < 1e-12);
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let g = three_player_game();
        let a = sampled_shapley(&feats(3), &g, 50, 9).unwrap();
        let b = sampled_shapley(&feats(3), &g, 50, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn symmetric_players_get_equal_values() {
        // players 0 and 1 are interchangeable
        let g = |s: &[usize]| {
            let a = s.contains(&0) as u8 + s.contains(&1) as u8;
            Ok(if a == 2 { 1.0 } else { 0.0 } + if s.contains(&2) { 0.5 } else { 0.0 })
        };
        let r = exact_shapley(&feats(3), &g).unwrap();
        assert!((r.phi[0] - r.phi[1]).abs() < 1e-12);
        assert!((r.phi[2] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rationale_value_fn_boundaries() {
        let backend = LeadSentenceSummarizer::default();
        let cfg = SummaryConfig::default();
        let evidence = "The agency published the figures. Exports fell 4 percent.\nImports rose.";
        let reference = generate_rationale("r", evidence, &backend, &cfg).unwrap();
        let vf = rationale_value_fn(evidence, &reference, &backend, &cfg, Granularity::Sentence);
        assert_eq!(vf.features().len(), 3);
        assert_eq!(vf.evaluate(&[]).unwrap(), 0.0);
        assert_eq!(vf.evaluate(&[0, 1, 2]).unwrap(), 1.0);

        let single = "Only one sentence here.";
        let reference = generate_rationale("s", single, &backend, &cfg).unwrap();
        let vf = rationale_value_fn(single, &reference, &backend, &cfg, Granularity::Sentence);
        assert_eq!(vf.evaluate(&[0]).unwrap(), 1.0);

        // hand value: coalition {1} is "Exports fell 4 percent." -> 4 of 4 candidate
        // tokens match, reference has 11 tokens: F1 = 2*1*(4/11)/(1+4/11) = 8/15
        let reference = generate_rationale("r", evidence, &backend, &cfg).unwrap();
        let vf = rationale_value_fn(evidence, &reference, &backend, &cfg, Granularity::Sentence);
        assert!((vf.evaluate(&[1]).unwrap() - 8.0 / 15.0).abs() < 1e-12);
    }

    #[test]
    fn highlight_polarity_and_scaling() {
        let mut r = exact_shapley(&feats(3), &three_player_game()).unwrap();
        r.phi = vec![0.5, -0.2, 0.0];
        let d = export_highlights("x", &r);
        assert_eq!(d.polarity, vec![Polarity::Positive, Polarity::Negative, Polarity::Zero]);
        assert_eq!(d.intensity, vec![1.0, 0.4, 0.0]);

        r.phi = vec![0.3, 0.3, 0.3];
        assert_eq!(export_highlights("x", &r).intensity, vec![1.0; 3]);
        r.phi = vec![0.0; 3];
        assert_eq!(export_highlights("x", &r).intensity, vec![0.0; 3]);

        let html = render_highlights_html(&[d]);
        assert!(html.contains("rgba(30,90,255,1.000)"));
        assert!(html.contains("rgba(255,40,40,0.400)"));
    }
}
