//! Sentence scores checked against values produced by sacrebleu 2.x with the
//! default sentence-level settings (see `data/gen_sacrebleu_goldens.py`).

use reftrade::metrics::bleu::sentence_bleu;
use reftrade::metrics::chrf::sentence_chrf;
use reftrade::metrics::ter::sentence_ter;
use reftrade::metrics::tokenize::tokenize_13a;

fn unescape(field: &str) -> String {
    let mut out = String::with_capacity(field.len());
    let mut chars = field.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('t') => out.push('\t'),
            Some('n') => out.push('\n'),
            Some('\\') => out.push('\\'),
            other => panic!("bad escape {other:?}"),
        }
    }
    out
}

fn rows(data: &str) -> Vec<Vec<String>> {
    data.lines()
        .skip(1)
        .map(|l| l.split('\t').map(unescape).collect())
        .collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * b.abs().max(1.0)
}

#[test]
fn tokenizer_matches_13a() {
    let data = include_str!("data/tok13a_goldens.tsv");
    let rows = rows(data);
    assert!(rows.len() > 40);
    for row in rows {
        assert_eq!(tokenize_13a(&row[0]), row[1], "input {:?}", row[0]);
    }
}

#[test]
fn sentence_scores_match_reference_implementation() {
    let data = include_str!("data/sacrebleu_goldens.tsv");
    let rows = rows(data);
    assert!(rows.len() >= 250);
    let mut failures = Vec::new();
    for row in &rows {
        let (hyp, reference) = (&row[0], &row[1]);
        let expected: Vec<f64> = row[2..5].iter().map(|v| v.parse().unwrap()).collect();
        let got = [
            sentence_bleu(hyp, reference).value,
            sentence_chrf(hyp, reference).value,
            sentence_ter(hyp, reference).map_or(f64::NAN, |o| o.value),
        ];
        for (name, (g, e)) in ["BLEU", "chrF", "TER"].iter().zip(got.iter().zip(&expected)) {
            if !close(*g, *e) {
                failures.push(format!("{name} {hyp:?} vs {reference:?}: got {g}, expected {e}"));
            }
        }
    }
    assert!(
        failures.is_empty(),
        "{} mismatches:\n{}",
        failures.len(),
        failures.join("\n")
    );
}
