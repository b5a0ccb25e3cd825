//! Correlation as a function of reference quality mix and reference count.

use std::fmt::Write as _;

use rand::seq::{index, SliceRandom};
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{Aggregation, CorrelationResult, Evaluator, MetricSource};
use crate::corpus::{Level, RefKey, Selection, Selector};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng};

/// Number of segments that take level B at a given fraction. A tiny
/// tolerance keeps `0.7 * 10` at 7.
fn mixed_count(fraction: f64, segments: usize) -> usize {
    ((fraction * segments as f64) - 1e-9).ceil().clamp(0.0, segments as f64) as usize
}

fn check_fraction(fraction: f64) -> Result<()> {
    if (0.0..=1.0).contains(&fraction) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "mixing fraction {fraction} outside [0, 1]"
        )))
    }
}

/// Per segment, level `b` for a seeded random `fraction` of segments and
/// level `a` elsewhere.
fn mixed_selection(segments: usize, a: Level, b: Level, fraction: f64, seed: u64) -> Selection {
    let mut order: Vec<usize> = (0..segments).collect();
    order.shuffle(&mut rng(seed));
    let mut use_b = vec![false; segments];
    for &s in &order[..mixed_count(fraction, segments)] {
        use_b[s] = true;
    }
    let per_segment = use_b
        .into_iter()
        .map(|b_here| vec![RefKey::original(if b_here { b } else { a })])
        .collect();
    Selection::new(format!("mix({a},{b},{fraction})"), per_segment)
}

/// Correlation when each segment has one reference drawn from level `a` or,
/// for `ceil(fraction * |segments|)` seeded-random segments, from `b`.
pub fn mix_references(
    ev: &Evaluator,
    source: &MetricSource,
    a: Level,
    b: Level,
    fraction: f64,
    seed: u64,
) -> Result<CorrelationResult> {
    check_fraction(fraction)?;
    let selection = mixed_selection(ev.corpus().segments().len(), a, b, fraction, seed);
    ev.correlate_selection(source, &selection, Aggregation::Single)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixingPoint {
    pub fraction: f64,
    pub segments_from_b: usize,
    pub tau: f64,
}

pub const MIXING_HEADER: &str = "metric\tlevel_a\tlevel_b\tfraction\tsegments_from_b\ttau";

/// [`mix_references`] over several fractions, scoring both levels once.
pub fn mixing_curve(
    ev: &Evaluator,
    source: &MetricSource,
    a: Level,
    b: Level,
    fractions: &[f64],
    seed: u64,
) -> Result<Vec<MixingPoint>> {
    fractions.iter().try_for_each(|&f| check_fraction(f))?;
    let corpus = ev.corpus();
    let union = Selector::parse(&format!("{a}|{b}"))?.select(corpus)?;
    let table = source.scores(corpus, &union)?;
    let n = corpus.segments().len();
    fractions
        .iter()
        .map(|&fraction| {
            let selection = mixed_selection(n, a, b, fraction, seed);
            let r = ev.correlate_table(&table.restrict(&selection)?, &selection.name, Aggregation::Single)?;
            Ok(MixingPoint {
                fraction,
                segments_from_b: mixed_count(fraction, n),
                tau: r.tau(),
            })
        })
        .collect()
}

pub fn mixing_to_tsv(metric: &str, a: Level, b: Level, points: &[MixingPoint]) -> String {
    let mut out = format!("{MIXING_HEADER}\n");
    for p in points {
        let _ = writeln!(
            out,
            "{metric}\t{a}\t{b}\t{}\t{}\t{}",
            p.fraction, p.segments_from_b, p.tau
        );
    }
    out
}

/// Which references a repetition draws.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveMode {
    /// An independent subset for every segment.
    #[default]
    PerSegment,
    /// One subset of pool keys applied to every segment; needs a pool with
    /// the same keys everywhere.
    Global,
}

impl std::str::FromStr for CurveMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-segment" => Ok(CurveMode::PerSegment),
            "global" => Ok(CurveMode::Global),
            _ => Err(Error::InvalidArgument(format!(
                "unknown sampling mode `{s}` (expected per-segment or global)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplingCurvePoint {
    pub x: usize,
    pub mean: f64,
    /// Two-sided 99% Student-t interval; infinite with one repetition.
    pub ci_low: f64,
    pub ci_high: f64,
    pub taus: Vec<f64>,
}

pub const CURVE_HEADER: &str = "metric\tpool\tx\tmean_tau\tci_low\tci_high\trepetitions";

pub fn curve_to_tsv(metric: &str, pool: &str, points: &[SamplingCurvePoint]) -> String {
    let mut out = format!("{CURVE_HEADER}\n");
    for p in points {
        let _ = writeln!(
            out,
            "{metric}\t{pool}\t{}\t{}\t{}\t{}\t{}",
            p.x,
            p.mean,
            p.ci_low,
            p.ci_high,
            p.taus.len()
        );
    }
    out
}

/// Mean and 99% confidence half-width of a sample.
pub fn mean_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    // shifting by the first value keeps identical samples exact
    let first = values[0];
    let mean = first + values.iter().map(|v| v - first).sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::INFINITY);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.995);
    (mean, t * var.sqrt() / (n as f64).sqrt())
}

/// Correlation against the number of references drawn from `pool`: for each
/// `x`, `repetitions` seeded draws of `x` references without replacement,
/// aggregated with `aggregation`.
#[allow(clippy::too_many_arguments)]
pub fn sampling_curve(
    ev: &Evaluator,
    source: &MetricSource,
    pool: &Selector,
    xs: &[usize],
    repetitions: usize,
    seed: u64,
    mode: CurveMode,
    aggregation: Aggregation,
) -> Result<Vec<SamplingCurvePoint>> {
    if repetitions == 0 {
        return Err(Error::InvalidArgument("repetitions must be positive".into()));
    }
    let corpus = ev.corpus();
    let selection = pool.select(corpus)?;
    let table = source.scores(corpus, &selection)?;
    let smallest = selection.min_len();
    if mode == CurveMode::Global && selection.per_segment.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::InvalidArgument(format!(
            "pool `{}` differs across segments; global sampling needs identical keys",
            pool.expr()
        )));
    }
    let mut points = Vec::with_capacity(xs.len());
    for &x in xs {
        if x == 0 || x > smallest {
            return Err(Error::InvalidArgument(format!(
                "cannot draw {x} references from pool `{}` (smallest segment pool has {smallest})",
                pool.expr()
            )));
        }
        let taus = (0..repetitions)
            .into_par_iter()
            .map(|rep| {
                let mut r = rng(derive_seed(seed, &[x as u64, rep as u64]));
                let mut draw = |len: usize| {
                    let mut picked = index::sample(&mut r, len, x).into_vec();
                    picked.sort_unstable();
                    picked
                };
                let picks: Vec<Vec<usize>> = match mode {
                    CurveMode::PerSegment => selection.per_segment.iter().map(|keys| draw(keys.len())).collect(),
                    CurveMode::Global => vec![draw(smallest); selection.per_segment.len()],
                };
                let label = format!("{}@{x}", pool.expr());
                ev.correlate_table(&table.pick(&picks), &label, aggregation)
                    .map(|c| c.tau())
            })
            .collect::<Result<Vec<f64>>>()?;
        let (mean, half) = mean_ci(&taus);
        points.push(SamplingCurvePoint {
            x,
            mean,
            ci_low: mean - half,
            ci_high: mean + half,
            taus,
        });
    }
    Ok(points)
}
