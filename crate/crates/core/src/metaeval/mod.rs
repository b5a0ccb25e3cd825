//! Segment-level meta-evaluation: relative-ranking pairs from DA scores,
//! multi-reference aggregation and Kendall's tau.

mod curves;

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Selection, Selector};
use crate::error::{Error, Result};
use crate::metrics::{score_all, MetricId, NativeMetric, Orientation, ScoreTable};

pub use curves::{
    curve_to_tsv, mean_ci, mix_references, mixing_curve, mixing_to_tsv, sampling_curve, CurveMode, MixingPoint,
    SamplingCurvePoint, CURVE_HEADER, MIXING_HEADER,
};

/// DA difference a pair must exceed to count as a golden ranking.
pub const DEFAULT_THRESHOLD: f64 = 25.0;

/// A human judgement that `better` outranks `worse` on `segment` (corpus
/// indices).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DarrPair {
    pub segment: usize,
    pub better: usize,
    pub worse: usize,
}

/// Every system pair on every segment whose DA scores differ by strictly
/// more than `threshold`, oriented towards the higher DA.
pub fn build_darr_pairs(corpus: &Corpus, threshold: f64) -> Result<Vec<DarrPair>> {
    if !threshold.is_finite() || threshold < 0.0 {
        return Err(Error::InvalidArgument(format!("invalid DA threshold {threshold}")));
    }
    let n_sys = corpus.systems().len();
    let mut pairs = Vec::new();
    for (s, seg) in corpus.segments().iter().enumerate() {
        let scores = (0..n_sys)
            .map(|y| {
                corpus.human_score(s, y).ok_or_else(|| Error::MissingHumanScore {
                    system: corpus.systems()[y].clone(),
                    segment: seg.id.clone(),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        for a in 0..n_sys {
            for b in a + 1..n_sys {
                if (scores[a] - scores[b]).abs() > threshold {
                    let (better, worse) = if scores[a] > scores[b] { (a, b) } else { (b, a) };
                    pairs.push(DarrPair {
                        segment: s,
                        better,
                        worse,
                    });
                }
            }
        }
    }
    Ok(pairs)
}

pub const PAIRS_HEADER: &str = "seg_id\tbetter\tworse\tda_better\tda_worse";

pub fn pairs_to_tsv(corpus: &Corpus, pairs: &[DarrPair]) -> String {
    let mut out = format!("{PAIRS_HEADER}\n");
    for p in pairs {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            corpus.segments()[p.segment].id,
            corpus.systems()[p.better],
            corpus.systems()[p.worse],
            corpus.human_score(p.segment, p.better).unwrap_or(f64::NAN),
            corpus.human_score(p.segment, p.worse).unwrap_or(f64::NAN),
        );
    }
    out
}

/// How several per-reference scores become one segment score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Aggregation {
    /// Exactly one reference per segment.
    Single,
    /// Arithmetic mean.
    Avg,
    /// Best score under the metric's orientation (min for lower-is-better).
    Max,
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Aggregation::Single),
            "avg" | "average" => Ok(Aggregation::Avg),
            "max" => Ok(Aggregation::Max),
            _ => Err(Error::InvalidArgument(format!(
                "unknown aggregation `{s}` (expected avg or max)"
            ))),
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregation::Single => "single",
            Aggregation::Avg => "avg",
            Aggregation::Max => "max",
        })
    }
}

/// One score per (segment, system), indexed by corpus positions.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentScores {
    pub metric: MetricId,
    /// `values[segment][system]`; `None` where the table had no scores.
    pub values: Vec<Vec<Option<f64>>>,
}

impl SegmentScores {
    pub fn get(&self, segment: usize, system: usize) -> Option<f64> {
        self.values.get(segment)?.get(system).copied().flatten()
    }
}

/// Collapses each cell's reference scores into one value.
pub fn aggregate(table: &ScoreTable, aggregation: Aggregation) -> Result<SegmentScores> {
    let orientation = table.metric().orientation;
    let mut values = vec![vec![None; table.system_count()]; table.segment_count()];
    for (s, row) in values.iter_mut().enumerate() {
        for (y, out) in row.iter_mut().enumerate() {
            let Some(v) = table.values(s, y) else { continue };
            *out = Some(combine(v, aggregation, orientation)?);
        }
    }
    Ok(SegmentScores {
        metric: table.metric().clone(),
        values,
    })
}

fn combine(values: &[f64], aggregation: Aggregation, orientation: Orientation) -> Result<f64> {
    match (aggregation, values) {
        (_, []) => Err(Error::InvalidArgument("no reference scores to aggregate".into())),
        (Aggregation::Single, [v]) => Ok(*v),
        (Aggregation::Single, _) => Err(Error::InvalidArgument(format!(
            "single-reference aggregation got {} references; use avg or max",
            values.len()
        ))),
        (Aggregation::Avg, _) => Ok(values.iter().sum::<f64>() / values.len() as f64),
        (Aggregation::Max, _) => Ok(match orientation {
            Orientation::Higher => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Orientation::Lower => values.iter().copied().fold(f64::INFINITY, f64::min),
        }),
    }
}

/// How a metric tie on a golden pair counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    /// A tie is a disagreement (WMT relative-ranking convention).
    #[default]
    Discordant,
    /// Tied pairs are dropped from numerator and denominator.
    Exclude,
    /// A tie counts half concordant, half discordant, so it adds nothing.
    HalfCredit,
}

impl FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "discordant" => Ok(TiePolicy::Discordant),
            "exclude" => Ok(TiePolicy::Exclude),
            "half-credit" | "half" => Ok(TiePolicy::HalfCredit),
            _ => Err(Error::InvalidArgument(format!("unknown tie policy `{s}`"))),
        }
    }
}

/// Pair counts and the resulting tau.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TauStats {
    pub tau: f64,
    pub pairs: usize,
    pub concordant: usize,
    pub discordant: usize,
    pub ties: usize,
}

/// Kendall's tau-like agreement between golden pairs and metric scores:
/// `(Concordant - Discordant) / pairs`, ties handled by `tie`.
pub fn kendall_tau(
    pairs: &[DarrPair],
    scores: &SegmentScores,
    orientation: Orientation,
    tie: TiePolicy,
) -> Result<TauStats> {
    if pairs.is_empty() {
        return Err(Error::NoPairs);
    }
    let (mut concordant, mut discordant, mut ties) = (0usize, 0usize, 0usize);
    for p in pairs {
        let get = |y: usize| {
            scores.get(p.segment, y).ok_or_else(|| Error::MissingScore {
                system: format!("#{y}"),
                segment: format!("#{}", p.segment),
                reference: scores.metric.name.clone(),
            })
        };
        let better = orientation.oriented(get(p.better)?);
        let worse = orientation.oriented(get(p.worse)?);
        if better > worse {
            concordant += 1;
        } else if better < worse {
            discordant += 1;
        } else {
            ties += 1;
        }
    }
    let (c, d, n) = (concordant as f64, discordant as f64, pairs.len() as f64);
    let tau = match tie {
        TiePolicy::Discordant => (c - d - ties as f64) / n,
        TiePolicy::HalfCredit => (c - d) / n,
        TiePolicy::Exclude if concordant + discordant == 0 => return Err(Error::NoPairs),
        TiePolicy::Exclude => (c - d) / (c + d),
    };
    Ok(TauStats {
        tau,
        pairs: pairs.len(),
        concordant,
        discordant,
        ties,
    })
}

/// Where a metric's scores come from.
#[derive(Debug, Clone)]
pub enum MetricSource {
    Native(NativeMetric),
    /// Precomputed scores covering at least the references to evaluate.
    Table(ScoreTable),
}

impl MetricSource {
    pub fn id(&self) -> MetricId {
        match self {
            MetricSource::Native(m) => m.id(),
            MetricSource::Table(t) => t.metric().clone(),
        }
    }

    pub fn scores(&self, corpus: &Corpus, selection: &Selection) -> Result<ScoreTable> {
        match self {
            MetricSource::Native(m) => score_all(corpus, *m, selection),
            MetricSource::Table(t) => t.restrict(selection),
        }
    }
}

/// One cell of a correlation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationResult {
    pub metric: String,
    pub selector: String,
    pub aggregation: Aggregation,
    #[serde(flatten)]
    pub stats: TauStats,
}

impl CorrelationResult {
    pub fn tau(&self) -> f64 {
        self.stats.tau
    }
}

pub const CORRELATION_HEADER: &str = "metric\tselector\taggregation\ttau\tpairs\tconcordant\tdiscordant\tties";

pub fn correlations_to_tsv(results: &[CorrelationResult]) -> String {
    let mut out = format!("{CORRELATION_HEADER}\n");
    for r in results {
        let s = r.stats;
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            r.metric, r.selector, r.aggregation, s.tau, s.pairs, s.concordant, s.discordant, s.ties
        );
    }
    out
}

/// A corpus with its golden pairs, ready to correlate metrics.
#[derive(Debug, Clone)]
pub struct Evaluator<'a> {
    corpus: &'a Corpus,
    pairs: Vec<DarrPair>,
    tie: TiePolicy,
}

impl<'a> Evaluator<'a> {
    pub fn new(corpus: &'a Corpus, threshold: f64, tie: TiePolicy) -> Result<Self> {
        let pairs = build_darr_pairs(corpus, threshold)?;
        if pairs.is_empty() {
            return Err(Error::NoPairs);
        }
        Ok(Evaluator { corpus, pairs, tie })
    }

    pub fn corpus(&self) -> &'a Corpus {
        self.corpus
    }

    pub fn pairs(&self) -> &[DarrPair] {
        &self.pairs
    }

    pub fn correlate(
        &self,
        source: &MetricSource,
        selector: &Selector,
        aggregation: Aggregation,
    ) -> Result<CorrelationResult> {
        let selection = selector.select(self.corpus)?;
        self.correlate_selection(source, &selection, aggregation)
    }

    pub fn correlate_selection(
        &self,
        source: &MetricSource,
        selection: &Selection,
        aggregation: Aggregation,
    ) -> Result<CorrelationResult> {
        let table = source.scores(self.corpus, selection)?;
        self.correlate_table(&table, &selection.name, aggregation)
    }

    /// Correlates an already restricted table; `label` names its selection.
    pub fn correlate_table(
        &self,
        table: &ScoreTable,
        label: &str,
        aggregation: Aggregation,
    ) -> Result<CorrelationResult> {
        let scores = aggregate(table, aggregation)?;
        let stats = kendall_tau(&self.pairs, &scores, table.metric().orientation, self.tie)
            .map_err(|e| self.name_missing(e))?;
        Ok(CorrelationResult {
            metric: table.metric().name.clone(),
            selector: label.to_string(),
            aggregation,
            stats,
        })
    }

    /// Replaces positional ids in a missing-score error with corpus ids.
    fn name_missing(&self, e: Error) -> Error {
        match e {
            Error::MissingScore {
                system,
                segment,
                reference,
            } => {
                let lookup = |s: &str, ids: &[String]| {
                    s.strip_prefix('#')
                        .and_then(|i| i.parse::<usize>().ok())
                        .and_then(|i| ids.get(i).cloned())
                        .unwrap_or_else(|| s.to_string())
                };
                let seg_ids: Vec<String> = self.corpus.segments().iter().map(|s| s.id.clone()).collect();
                Error::MissingScore {
                    system: lookup(&system, self.corpus.systems()),
                    segment: lookup(&segment, &seg_ids),
                    reference,
                }
            }
            other => other,
        }
    }
}

/// Correlation of one metric under one selector with the default threshold
/// and tie policy.
pub fn correlate(
    corpus: &Corpus,
    source: &MetricSource,
    selector: &Selector,
    aggregation: Aggregation,
) -> Result<CorrelationResult> {
    Evaluator::new(corpus, DEFAULT_THRESHOLD, TiePolicy::default())?.correlate(source, selector, aggregation)
}

/// Mean raw metric value per (metric, selector), optionally negating
/// lower-is-better metrics so that larger always reads as better.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawScoreReport {
    pub metrics: Vec<String>,
    pub selectors: Vec<String>,
    /// `values[metric][selector]`
    pub values: Vec<Vec<f64>>,
    pub flipped: bool,
}

pub fn raw_score_report(
    corpus: &Corpus,
    sources: &[MetricSource],
    selectors: &[Selector],
    flip_lower: bool,
) -> Result<RawScoreReport> {
    let selections = selectors.iter().map(|s| s.select(corpus)).collect::<Result<Vec<_>>>()?;
    let mut values = Vec::with_capacity(sources.len());
    for source in sources {
        let orientation = source.id().orientation;
        let mut row = Vec::with_capacity(selections.len());
        for sel in &selections {
            let mean = source.scores(corpus, sel)?.mean().ok_or(Error::NoScores)?;
            row.push(if flip_lower { orientation.oriented(mean) } else { mean });
        }
        values.push(row);
    }
    Ok(RawScoreReport {
        metrics: sources.iter().map(|s| s.id().name).collect(),
        selectors: selectors.iter().map(|s| s.expr().to_string()).collect(),
        values,
        flipped: flip_lower,
    })
}

impl RawScoreReport {
    pub fn to_tsv(&self) -> String {
        let mut out = format!("metric\t{}\n", self.selectors.join("\t"));
        for (m, row) in self.metrics.iter().zip(&self.values) {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{m}\t{}", cells.join("\t"));
        }
        out
    }
}
