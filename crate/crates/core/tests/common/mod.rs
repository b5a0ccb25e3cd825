//! Synthetic corpora whose metric scores track the human scores, so that
//! correlations are positive but imperfect.

#![allow(dead_code)]

use rand::Rng;
use reftrade::corpus::{Corpus, Editor, Level, Proficiency};
use reftrade::rng::rng;

const VOCAB: &[&str] = &[
    "the", "a", "cat", "dog", "sat", "on", "mat", "house", "river", "green", "quickly", "ran", "over", "bridge", "old",
    "man", "saw", "bird", "under", "tree", "and", "then", "left", "city", "small", "boat",
];

fn perturb<R: Rng>(words: &[&'static str], noise: f64, rng: &mut R) -> Vec<&'static str> {
    let mut out: Vec<&'static str> = words
        .iter()
        .map(|&w| {
            if rng.random::<f64>() < noise {
                VOCAB[rng.random_range(0..VOCAB.len())]
            } else {
                w
            }
        })
        .collect();
    if out.len() > 3 && rng.random::<f64>() < noise {
        let i = rng.random_range(0..out.len() - 1);
        out.swap(i, i + 1);
    }
    out
}

pub struct Spec {
    pub segments: usize,
    pub systems: usize,
    pub post_edits: bool,
    pub seed: u64,
}

impl Default for Spec {
    fn default() -> Self {
        Spec {
            segments: 24,
            systems: 6,
            post_edits: true,
            seed: 1,
        }
    }
}

/// Four reference levels with noise 0.35, 0.25, 0.1, 0.15 (R3 closest to the
/// latent translation), systems of graded quality and DA tied to quality.
pub fn synthetic(spec: &Spec) -> Corpus {
    let mut r = rng(spec.seed);
    let mut b = Corpus::builder();
    let level_noise = [0.35, 0.25, 0.1, 0.15];
    for s in 0..spec.segments {
        let seg = format!("seg{s:03}");
        let doc = format!("doc{}", s / 4);
        let len = r.random_range(6..14);
        let truth: Vec<&'static str> = (0..len).map(|_| VOCAB[r.random_range(0..VOCAB.len())]).collect();
        b.segment(&doc, &seg, &format!("src {}", truth.join(" ")));
        for (l, &noise) in level_noise.iter().enumerate() {
            let level = Level::new(l as u8 + 1);
            let reference = perturb(&truth, noise, &mut r);
            b.reference(&seg, level, None, &reference.join(" "));
            if spec.post_edits {
                for (p, id) in [(Proficiency::Layman, "e1"), (Proficiency::Professional, "e2")] {
                    let edited = perturb(&reference, noise / 3.0, &mut r);
                    let editor = Editor {
                        proficiency: p,
                        id: id.into(),
                    };
                    b.reference(&seg, level, Some(editor), &edited.join(" "));
                }
            }
        }
        for y in 0..spec.systems {
            let noise = 0.05 + 0.7 * r.random::<f64>();
            let hyp = perturb(&truth, noise, &mut r);
            let sys = format!("sys{y}");
            b.hypothesis(&sys, &seg, &hyp.join(" "));
            let da = (100.0 * (1.0 - noise) + 20.0 * (r.random::<f64>() - 0.5)).clamp(0.0, 100.0);
            b.human(&sys, &seg, da);
        }
    }
    b.build().expect("synthetic corpus is valid")
}

/// Corpus with the given DA matrix `[segment][system]`.
pub fn da_corpus(da: &[Vec<f64>]) -> Corpus {
    let mut b = Corpus::builder();
    for (s, row) in da.iter().enumerate() {
        let seg = format!("s{s}");
        b.segment("d", &seg, "x").reference(&seg, Level::new(1), None, "r");
        for (y, &v) in row.iter().enumerate() {
            let sys = format!("y{y}");
            b.hypothesis(&sys, &seg, "h").human(&sys, &seg, v);
        }
    }
    b.build().unwrap()
}

/// Double loop over every ordered system pair: a pair counts when the first
/// system's DA exceeds the second's by more than the threshold.
pub fn oracle_tau(da: &[Vec<f64>], metric: &[Vec<f64>], higher: bool, threshold: f64) -> Option<f64> {
    let (mut c, mut d, mut n) = (0i64, 0i64, 0i64);
    for (s, row) in da.iter().enumerate() {
        for i in 0..row.len() {
            for j in 0..row.len() {
                if row[i] - row[j] > threshold {
                    n += 1;
                    let (a, b) = (metric[s][i], metric[s][j]);
                    let agree = if higher { a > b } else { a < b };
                    if agree {
                        c += 1;
                    } else {
                        d += 1;
                    }
                }
            }
        }
    }
    (n > 0).then(|| (c - d) as f64 / n as f64)
}
