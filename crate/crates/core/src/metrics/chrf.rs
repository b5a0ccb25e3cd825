//! Sentence-level chrF: character n-grams of order 1..=6, no word n-grams,
//! beta = 2, mixed case, whitespace ignored, no epsilon smoothing.

use std::collections::HashMap;

use super::tokenize::is_split_whitespace;
use super::{MetricOutput, ScoreWarning};

pub const CHAR_ORDER: usize = 6;
pub const BETA: f64 = 2.0;

/// `[hyp count, ref count, matches]` per order.
pub type ChrfStats = [[usize; 3]; CHAR_ORDER];

fn counts(chars: &[char], n: usize) -> HashMap<&[char], usize> {
    let mut out = HashMap::new();
    for gram in chars.windows(n) {
        *out.entry(gram).or_insert(0) += 1;
    }
    out
}

pub fn chrf_stats(hypothesis: &str, reference: &str) -> ChrfStats {
    let hyp: Vec<char> = hypothesis.chars().filter(|&c| !is_split_whitespace(c)).collect();
    let reference: Vec<char> = reference.chars().filter(|&c| !is_split_whitespace(c)).collect();
    let mut stats = [[0; 3]; CHAR_ORDER];
    for (i, row) in stats.iter_mut().enumerate() {
        let n = i + 1;
        let h = counts(&hyp, n);
        let r = counts(&reference, n);
        row[0] = hyp.len().saturating_sub(n - 1);
        row[1] = reference.len().saturating_sub(n - 1);
        row[2] = h.iter().filter_map(|(g, &c)| r.get(g).map(|&rc| c.min(rc))).sum();
    }
    stats
}

/// Averages precision and recall over the orders where both sides have
/// n-grams, then combines them into F-beta.
pub fn chrf_from_stats(stats: &ChrfStats) -> f64 {
    const EPS: f64 = 1e-16;
    let factor = BETA * BETA;
    let (mut avg_prec, mut avg_rec) = (0.0, 0.0);
    let mut effective_order = 0usize;
    for &[n_hyp, n_ref, n_match] in stats {
        let prec = if n_hyp > 0 { n_match as f64 / n_hyp as f64 } else { EPS };
        let rec = if n_ref > 0 { n_match as f64 / n_ref as f64 } else { EPS };
        if n_hyp > 0 && n_ref > 0 {
            avg_prec += prec;
            avg_rec += rec;
            effective_order += 1;
        }
    }
    if effective_order == 0 {
        return 0.0;
    }
    avg_prec /= effective_order as f64;
    avg_rec /= effective_order as f64;
    if avg_prec + avg_rec == 0.0 {
        return 0.0;
    }
    let score = (1.0 + factor) * avg_prec * avg_rec / (factor * avg_prec + avg_rec);
    100.0 * score
}

pub fn sentence_chrf(hypothesis: &str, reference: &str) -> MetricOutput {
    let blank = |s: &str| s.chars().all(is_split_whitespace);
    let warning = if blank(hypothesis) {
        Some(ScoreWarning::EmptyHypothesis)
    } else if blank(reference) {
        Some(ScoreWarning::EmptyReference)
    } else {
        None
    };
    MetricOutput {
        value: chrf_from_stats(&chrf_stats(hypothesis, reference)),
        warning,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_disjoint() {
        assert_eq!(sentence_chrf("abcdef", "abcdef").value, 100.0);
        assert_eq!(sentence_chrf("aaaa", "bbbb").value, 0.0);
    }

    #[test]
    fn hand_computed_abcd_abce() {
        // orders 1..4 present on both sides; precision = recall per order:
        // 3/4, 2/3, 1/2, 0  -> average 23/48, and F equals it
        let v = sentence_chrf("abcd", "abce").value;
        assert!((v - 100.0 * 23.0 / 48.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn whitespace_is_ignored() {
        assert_eq!(sentence_chrf("a b c", "abc").value, 100.0);
    }

    #[test]
    fn empty_warns() {
        let out = sentence_chrf("", "abc");
        assert_eq!(out.value, 0.0);
        assert_eq!(out.warning, Some(ScoreWarning::EmptyHypothesis));
    }
}
