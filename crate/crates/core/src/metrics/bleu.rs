//! Sentence-level BLEU: mixed case, 13a tokenization, exponential smoothing,
//! effective order, maximum order 4.

use std::collections::HashMap;

use super::tokenize::{split_words, tokenize_13a, trim_end_whitespace};
use super::{MetricOutput, ScoreWarning};

pub const MAX_ORDER: usize = 4;

/// Clipped n-gram statistics of one hypothesis against one reference.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BleuStats {
    pub hyp_len: usize,
    pub ref_len: usize,
    pub correct: [usize; MAX_ORDER],
    pub total: [usize; MAX_ORDER],
}

fn ngram_counts<'a>(tokens: &'a [&'a str]) -> HashMap<&'a [&'a str], usize> {
    let mut counts = HashMap::new();
    for n in 1..=MAX_ORDER {
        for gram in tokens.windows(n) {
            *counts.entry(gram).or_insert(0) += 1;
        }
    }
    counts
}

pub fn bleu_stats(hyp_tokens: &[&str], ref_tokens: &[&str]) -> BleuStats {
    let hyp = ngram_counts(hyp_tokens);
    let reference = ngram_counts(ref_tokens);
    let mut correct = [0; MAX_ORDER];
    let mut total = [0; MAX_ORDER];
    for (gram, &count) in &hyp {
        let n = gram.len() - 1;
        total[n] += count;
        if let Some(&r) = reference.get(gram) {
            correct[n] += count.min(r);
        }
    }
    BleuStats {
        hyp_len: hyp_tokens.len(),
        ref_len: ref_tokens.len(),
        correct,
        total,
    }
}

/// Brevity penalty for the given lengths.
pub fn brevity_penalty(hyp_len: usize, ref_len: usize) -> f64 {
    if hyp_len < ref_len {
        if hyp_len > 0 {
            (1.0 - ref_len as f64 / hyp_len as f64).exp()
        } else {
            0.0
        }
    } else {
        1.0
    }
}

/// BLEU in [0, 100] from sufficient statistics.
///
/// An order with zero matches contributes `1 / (2^k * total)` where `k`
/// counts the zero-match orders seen so far. Orders without any hypothesis
/// n-gram end the product (effective order).
pub fn bleu_from_stats(stats: &BleuStats) -> f64 {
    let bp = brevity_penalty(stats.hyp_len, stats.ref_len);
    if stats.correct.iter().all(|&c| c == 0) {
        return 0.0;
    }
    let mut precisions = [0.0f64; MAX_ORDER];
    let mut smooth = 1.0f64;
    let mut effective_order = MAX_ORDER;
    for (n, precision) in precisions.iter_mut().enumerate() {
        let total = stats.total[n];
        if total == 0 {
            break;
        }
        effective_order = n + 1;
        *precision = if stats.correct[n] == 0 {
            smooth *= 2.0;
            100.0 / (smooth * total as f64)
        } else {
            100.0 * stats.correct[n] as f64 / total as f64
        };
    }
    if bp == 1.0 && (0..effective_order).all(|n| stats.correct[n] == stats.total[n]) {
        // exp(ln 100) is not exactly 100
        return 100.0;
    }
    let log_sum: f64 = precisions[..effective_order].iter().map(|&p| p.ln()).sum();
    bp * (log_sum / effective_order as f64).exp()
}

pub fn tokenize(text: &str) -> String {
    tokenize_13a(trim_end_whitespace(text))
}

pub fn sentence_bleu(hypothesis: &str, reference: &str) -> MetricOutput {
    let hyp = tokenize(hypothesis);
    let reference = tokenize(reference);
    let hyp_tokens: Vec<&str> = split_words(&hyp).collect();
    let ref_tokens: Vec<&str> = split_words(&reference).collect();
    let warning = if hyp_tokens.is_empty() {
        Some(ScoreWarning::EmptyHypothesis)
    } else if ref_tokens.is_empty() {
        Some(ScoreWarning::EmptyReference)
    } else {
        None
    };
    let value = bleu_from_stats(&bleu_stats(&hyp_tokens, &ref_tokens));
    MetricOutput { value, warning }
}
