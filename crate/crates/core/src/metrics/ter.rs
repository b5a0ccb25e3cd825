//! Sentence-level TER: lowercased, tercom-style whitespace tokenization, no
//! punctuation removal, unnormalized.
//!
//! Edit distance uses a beam around the length-scaled diagonal and shifts
//! are found greedily with Tercom's candidate limits, so scores match the
//! reference implementation exactly.

use std::collections::HashMap;

use super::tokenize::{split_words, trim_end_whitespace};
use super::{MetricOutput, ScoreWarning};

const MAX_SHIFT_SIZE: usize = 10;
const MAX_SHIFT_DIST: usize = 50;
const BEAM_WIDTH: i64 = 25;
const MAX_CACHE_SIZE: usize = 10_000;
const MAX_SHIFT_CANDIDATES: usize = 1000;
const INF: i64 = 10_000_000_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Nop,
    Sub,
    Ins,
    Del,
    Undef,
}

type Cell = (i64, Op);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TerOptions {
    /// Allow block shifts; without them TER is plain word edit distance.
    pub shifts: bool,
}

impl Default for TerOptions {
    fn default() -> Self {
        TerOptions { shifts: true }
    }
}

/// Lowercases, strips trailing whitespace and splits into words.
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered = trim_end_whitespace(text).to_lowercase();
    split_words(&lowered).map(str::to_string).collect()
}

/// TER in percent; `None` when the reference has no words.
pub fn sentence_ter(hypothesis: &str, reference: &str) -> Option<MetricOutput> {
    sentence_ter_with(hypothesis, reference, TerOptions::default())
}

pub fn sentence_ter_with(hypothesis: &str, reference: &str, options: TerOptions) -> Option<MetricOutput> {
    let hyp = tokenize(hypothesis);
    let reference = tokenize(reference);
    if reference.is_empty() {
        return None;
    }
    let hyp: Vec<&str> = hyp.iter().map(String::as_str).collect();
    let reference: Vec<&str> = reference.iter().map(String::as_str).collect();
    let (edits, ref_len) = edit_count(&hyp, &reference, options);
    Some(MetricOutput {
        value: 100.0 * (edits as f64 / ref_len as f64),
        warning: hyp.is_empty().then_some(ScoreWarning::EmptyHypothesis),
    })
}

/// Number of edits (including shifts) and reference length.
pub fn edit_count(hyp: &[&str], reference: &[&str], options: TerOptions) -> (usize, usize) {
    if reference.is_empty() {
        return (hyp.len(), 0);
    }
    let mut vocab: HashMap<&str, u32> = HashMap::new();
    let ref_ids = intern(reference, &mut vocab);
    let mut words = intern(hyp, &mut vocab);

    let mut ed = BeamEditDistance::new(&ref_ids);
    let mut shifts = 0usize;
    if options.shifts {
        let mut checked = 0usize;
        loop {
            let (delta, shifted) = best_shift(&words, &ref_ids, &mut ed, &mut checked);
            if checked >= MAX_SHIFT_CANDIDATES || delta <= 0 {
                break;
            }
            shifts += 1;
            words = shifted;
        }
    }
    let (distance, _) = ed.distance(&words);
    (shifts + distance as usize, reference.len())
}

fn intern<'a>(words: &[&'a str], vocab: &mut HashMap<&'a str, u32>) -> Vec<u32> {
    words
        .iter()
        .map(|w| {
            let next = vocab.len() as u32;
            *vocab.entry(w).or_insert(next)
        })
        .collect()
}

/// Ordering key of a candidate shift: gain, length, then negated positions.
type ShiftKey = (i64, usize, i64, i64);

/// Picks the shift with the largest gain, then longest, earliest source,
/// earliest target. Returns the gain (0 if none) and the shifted words.
fn best_shift(words: &[u32], reference: &[u32], ed: &mut BeamEditDistance, checked: &mut usize) -> (i64, Vec<u32>) {
    let (pre_score, trace) = ed.distance(words);
    let (align, ref_err, hyp_err) = alignment(&flip(&trace));
    let mut best: Option<(ShiftKey, Vec<u32>)> = None;

    for (start_h, start_r, length) in shifted_pairs(words, reference) {
        if hyp_err[start_h..start_h + length].iter().all(|&e| !e) {
            continue;
        }
        if ref_err[start_r..start_r + length].iter().all(|&e| !e) {
            continue;
        }
        let aligned = align[start_r];
        if start_h as i64 <= aligned && aligned < (start_h + length) as i64 {
            continue;
        }
        let mut prev_idx = -1i64;
        for offset in -1..length as i64 {
            let pos = start_r as i64 + offset;
            let idx = if pos == -1 {
                0
            } else if (pos as usize) < align.len() {
                align[pos as usize] + 1
            } else {
                break;
            };
            if idx == prev_idx {
                continue;
            }
            prev_idx = idx;
            let shifted = perform_shift(words, start_h, length, idx as usize);
            let key = (pre_score - ed.distance(&shifted).0, length, -(start_h as i64), -idx);
            *checked += 1;
            if best.as_ref().is_none_or(|(b, _)| key > *b) {
                best = Some((key, shifted));
            }
        }
        if *checked >= MAX_SHIFT_CANDIDATES {
            break;
        }
    }
    match best {
        Some(((gain, ..), shifted)) => (gain, shifted),
        None => (0, words.to_vec()),
    }
}

/// Python-style slice with clipping.
fn slice(words: &[u32], from: usize, to: usize) -> &[u32] {
    let to = to.min(words.len());
    let from = from.min(to);
    &words[from..to]
}

fn perform_shift(words: &[u32], start: usize, length: usize, target: usize) -> Vec<u32> {
    let end = start + length;
    let parts: [&[u32]; 4] = if target < start {
        [
            slice(words, 0, target),
            slice(words, start, end),
            slice(words, target, start),
            slice(words, end, usize::MAX),
        ]
    } else if target > end {
        [
            slice(words, 0, start),
            slice(words, end, target),
            slice(words, start, end),
            slice(words, target, usize::MAX),
        ]
    } else {
        [
            slice(words, 0, start),
            slice(words, end, length + target),
            slice(words, start, end),
            slice(words, length + target, usize::MAX),
        ]
    };
    parts.concat()
}

/// Matching word runs `(hyp start, ref start, length)`, every prefix length
/// up to the maximum shift size, within the maximum shift distance.
fn shifted_pairs(words_h: &[u32], words_r: &[u32]) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    for start_h in 0..words_h.len() {
        for start_r in 0..words_r.len() {
            if start_r.abs_diff(start_h) > MAX_SHIFT_DIST {
                continue;
            }
            let mut length = 0;
            while words_h[start_h + length] == words_r[start_r + length] && length < MAX_SHIFT_SIZE {
                length += 1;
                out.push((start_h, start_r, length));
                if words_h.len() == start_h + length || words_r.len() == start_r + length {
                    break;
                }
            }
        }
    }
    out
}

fn flip(trace: &[Op]) -> Vec<Op> {
    trace
        .iter()
        .map(|op| match op {
            Op::Ins => Op::Del,
            Op::Del => Op::Ins,
            other => *other,
        })
        .collect()
}

/// Reference position to hypothesis position (may be -1), plus error flags
/// for each reference and hypothesis word.
fn alignment(trace: &[Op]) -> (Vec<i64>, Vec<bool>, Vec<bool>) {
    let (mut pos_hyp, mut align) = (-1i64, Vec::new());
    let (mut ref_err, mut hyp_err) = (Vec::new(), Vec::new());
    for op in trace {
        match op {
            Op::Nop | Op::Sub => {
                let err = *op == Op::Sub;
                pos_hyp += 1;
                align.push(pos_hyp);
                hyp_err.push(err);
                ref_err.push(err);
            }
            Op::Ins => {
                pos_hyp += 1;
                hyp_err.push(true);
            }
            Op::Del => {
                align.push(pos_hyp);
                ref_err.push(true);
            }
            Op::Undef => unreachable!("trace runs through computed cells only"),
        }
    }
    (align, ref_err, hyp_err)
}

struct CacheNode {
    children: HashMap<u32, usize>,
    row: Vec<Cell>,
}

/// Word edit distance against a fixed reference, with a prefix cache of
/// matrix rows and a beam around the pseudo-diagonal.
struct BeamEditDistance<'r> {
    reference: &'r [u32],
    initial_row: Vec<Cell>,
    /// Node 0 is the root and holds no row.
    nodes: Vec<CacheNode>,
}

impl<'r> BeamEditDistance<'r> {
    fn new(reference: &'r [u32]) -> Self {
        BeamEditDistance {
            reference,
            initial_row: (0..=reference.len()).map(|j| (j as i64, Op::Ins)).collect(),
            nodes: vec![CacheNode {
                children: HashMap::new(),
                row: Vec::new(),
            }],
        }
    }

    fn distance(&mut self, words: &[u32]) -> (i64, Vec<Op>) {
        let n_ref = self.reference.len();
        let n_hyp = words.len();

        let mut node = 0;
        let mut dist: Vec<Vec<Cell>> = Vec::with_capacity(n_hyp + 1);
        dist.push(self.initial_row.clone());
        for w in words {
            match self.nodes[node].children.get(w) {
                Some(&child) => {
                    node = child;
                    dist.push(self.nodes[child].row.clone());
                }
                None => break,
            }
        }
        let start = dist.len() - 1;
        dist.resize(n_hyp + 1, vec![(INF, Op::Undef); n_ref + 1]);

        let ratio = if n_hyp > 0 { n_ref as f64 / n_hyp as f64 } else { 1.0 };
        let beam = if (BEAM_WIDTH as f64) < ratio / 2.0 {
            (ratio / 2.0 + BEAM_WIDTH as f64).ceil() as i64
        } else {
            BEAM_WIDTH
        };
        for i in start + 1..=n_hyp {
            let diag = (i as f64 * ratio).floor() as i64;
            let min_j = (diag - beam).max(0) as usize;
            let max_j = if i == n_hyp {
                n_ref + 1
            } else {
                (diag + beam).clamp(0, n_ref as i64 + 1) as usize
            };
            let (above, rest) = dist.split_at_mut(i);
            let prev = &above[i - 1];
            let row = &mut rest[0];
            for j in min_j..max_j {
                if j == 0 {
                    row[0] = (prev[0].0 + 1, Op::Del);
                    continue;
                }
                let (cost_sub, op_sub) = if words[i - 1] == self.reference[j - 1] {
                    (0, Op::Nop)
                } else {
                    (1, Op::Sub)
                };
                let ops = [
                    (prev[j - 1].0 + cost_sub, op_sub),
                    (prev[j].0 + 1, Op::Del),
                    (row[j - 1].0 + 1, Op::Ins),
                ];
                for (cost, op) in ops {
                    if row[j].0 > cost {
                        row[j] = (cost, op);
                    }
                }
            }
        }

        let mut trace = Vec::with_capacity(n_hyp + n_ref);
        let (mut i, mut j) = (n_hyp, n_ref);
        while i > 0 || j > 0 {
            let op = dist[i][j].1;
            trace.push(op);
            match op {
                Op::Nop | Op::Sub => {
                    i -= 1;
                    j -= 1;
                }
                Op::Ins => j -= 1,
                Op::Del => i -= 1,
                Op::Undef => unreachable!("trace runs through computed cells only"),
            }
        }
        trace.reverse();

        if self.nodes.len() - 1 < MAX_CACHE_SIZE {
            for (w, row) in words[start..].iter().zip(&dist[start + 1..]) {
                let next = self.nodes.len();
                let child = *self.nodes[node].children.entry(*w).or_insert(next);
                if child == next {
                    self.nodes.push(CacheNode {
                        children: HashMap::new(),
                        row: row.clone(),
                    });
                }
                node = child;
            }
        }
        (dist[n_hyp][n_ref].0, trace)
    }
}
