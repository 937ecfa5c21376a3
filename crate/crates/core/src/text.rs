//! Tokenization and sentence splitting shared by the pipeline stages.
//!
//! The statistics tokenizer strips punctuation and splits on whitespace.
//! Summaries and coalition evidence use plain whitespace tokens so that
//! truncation never rewrites characters inside a token.

use std::collections::HashMap;

/// Tokens used for corpus statistics and overlap scoring.
///
/// Punctuation is removed before splitting; tokens left empty by the
/// stripping (a lone dash, say) are dropped.
pub fn stat_tokens(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(|raw| raw.chars().filter(|c| !c.is_ascii_punctuation() && !is_unicode_punct(*c)).collect::<String>())
        .filter(|t| !t.is_empty())
        .collect()
}

pub fn stat_token_count(text: &str) -> usize {
    stat_tokens(text).len()
}

fn is_unicode_punct(c: char) -> bool {
    matches!(
        c,
        '\u{2018}' | '\u{2019}' | '\u{201C}' | '\u{201D}' | '\u{2013}' | '\u{2014}' | '\u{2026}'
    )
}

pub fn whitespace_tokens(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Split evidence into sentences, keeping terminal punctuation.
///
/// A sentence ends at `.`, `!` or `?` followed by whitespace (or end of
/// text), and at every line break. Empty pieces are discarded.
pub fn split_sentences(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\n' {
            push_trimmed(&mut out, &mut current);
            continue;
        }
        current.push(c);
        if matches!(c, '.' | '!' | '?') {
            match chars.peek() {
                None => push_trimmed(&mut out, &mut current),
                Some(next) if next.is_whitespace() => push_trimmed(&mut out, &mut current),
                _ => {}
            }
        }
    }
    push_trimmed(&mut out, &mut current);
    out
}

fn push_trimmed(out: &mut Vec<String>, current: &mut String) {
    let t = current.trim();
    if !t.is_empty() {
        out.push(t.to_string());
    }
    current.clear();
}

/// Split evidence into paragraphs on blank lines, falling back to single
/// line breaks when the text has no blank line at all.
pub fn split_paragraphs(text: &str) -> Vec<String> {
    let normalized = text.replace("\r\n", "\n");
    let has_blank_line = normalized
        .split('\n')
        .collect::<Vec<_>>()
        .windows(2)
        .any(|w| w[1].trim().is_empty() && !w[0].trim().is_empty());
    let pieces: Vec<String> = if has_blank_line {
        let mut paras = Vec::new();
        let mut current: Vec<&str> = Vec::new();
        for line in normalized.split('\n') {
            if line.trim().is_empty() {
                if !current.is_empty() {
                    paras.push(current.join("\n"));
                    current.clear();
                }
            } else {
                current.push(line);
            }
        }
        if !current.is_empty() {
            paras.push(current.join("\n"));
        }
        paras
    } else {
        normalized.split('\n').map(str::to_string).collect()
    };
    pieces
        .into_iter()
        .map(|p| p.trim().to_string())
        .filter(|p| !p.is_empty())
        .collect()
}

/// Multiset token-overlap F1 between two texts, using lowercase
/// statistics tokens. Two empty texts score 0.
pub fn token_overlap_f1(candidate: &str, reference: &str) -> f64 {
    let cand: Vec<String> = stat_tokens(candidate).into_iter().map(|t| t.to_lowercase()).collect();
    let refs: Vec<String> = stat_tokens(reference).into_iter().map(|t| t.to_lowercase()).collect();
    if cand.is_empty() || refs.is_empty() {
        return 0.0;
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for t in &refs {
        *counts.entry(t.as_str()).or_default() += 1;
    }
    let mut common = 0usize;
    for t in &cand {
        if let Some(n) = counts.get_mut(t.as_str()) {
            if *n > 0 {
                *n -= 1;
                common += 1;
            }
        }
    }
    if common == 0 {
        return 0.0;
    }
    let precision = common as f64 / cand.len() as f64;
    let recall = common as f64 / refs.len() as f64;
    2.0 * precision * recall / (precision + recall)
}
