//! One PASS / FAIL / NOT RUN line per acceptance criterion.
//!
//! Criteria 1 to 7 need the released corpus in canonical layout, pointed to
//! by `REFTRADE_CORPUS`; criterion 4 (and the full-metric part of 3) also
//! needs `REFTRADE_NEURAL_SCORES`, a directory of ingestible score files.

mod common;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use reftrade::allocator::{
    allocate, brute_force_allocate, default_levels, grid_experiment, minimum_budget, Allocation, AllocationProblem,
    GridConfig, Transaction, VendorLevel, DEFAULT_PATIENCE,
};
use reftrade::corpus::{import_corpus, Corpus, CorpusFormat, Level, Selector};
use reftrade::metaeval::{
    build_darr_pairs, kendall_tau, mixing_curve, raw_score_report, sampling_curve, Aggregation, CurveMode, Evaluator,
    MetricSource, SegmentScores, TiePolicy, DEFAULT_THRESHOLD,
};
use reftrade::metrics::{bleu, chrf, ingest_scores, ter, MetricId, NativeMetric, Orientation};
use reftrade::rng::rng;

enum Outcome {
    Pass(String),
    Fail(String),
    NotRun(String),
}

type Check = Result<String, String>;

fn outcome(check: Check) -> Outcome {
    match check {
        Ok(detail) => Outcome::Pass(detail),
        Err(detail) => Outcome::Fail(detail),
    }
}

fn ensure(ok: bool, detail: impl Into<String>) -> Check {
    let detail = detail.into();
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn within(got: f64, expected: f64, tol: f64) -> bool {
    // published values are rounded; allow for the representation error
    (got - expected).abs() <= tol + 1e-9
}

struct Data {
    corpus: Corpus,
    neural: Option<PathBuf>,
}

fn load_data() -> Option<Result<Data, String>> {
    let dir = std::env::var_os("REFTRADE_CORPUS")?;
    let corpus = match import_corpus(Path::new(&dir), CorpusFormat::Canonical) {
        Ok(c) => c,
        Err(e) => return Some(Err(format!("cannot import corpus: {e}"))),
    };
    let neural = std::env::var_os("REFTRADE_NEURAL_SCORES").map(PathBuf::from);
    Some(Ok(Data { corpus, neural }))
}

const LEVELS: [&str; 4] = ["R1", "R2", "R3", "R4"];

fn native(metric: NativeMetric) -> MetricSource {
    MetricSource::Native(metric)
}

fn single_taus(ev: &Evaluator, source: &MetricSource) -> Result<Vec<f64>, String> {
    LEVELS
        .iter()
        .map(|s| {
            let sel = Selector::parse(s).map_err(err)?;
            ev.correlate(source, &sel, Aggregation::Single)
                .map(|r| r.tau())
                .map_err(err)
        })
        .collect()
}

fn compare_rows(name: &str, got: &[f64], expected: &[f64], tol: f64) -> Check {
    let ok = got.iter().zip(expected).all(|(g, e)| within(*g, *e, tol));
    let cells: Vec<String> = got
        .iter()
        .zip(expected)
        .map(|(g, e)| format!("{g:.3}/{e:.3}"))
        .collect();
    ensure(ok, format!("{name} {}", cells.join(" ")))
}

fn criterion_1(ev: &Evaluator) -> Check {
    let start = Instant::now();
    let expected = [
        (NativeMetric::Bleu, [0.082, 0.103, 0.109, 0.103]),
        (NativeMetric::Chrf, [0.090, 0.125, 0.128, 0.123]),
        (NativeMetric::Ter, [0.082, 0.092, 0.114, 0.105]),
    ];
    let mut details = Vec::new();
    let mut ok = true;
    for (metric, row) in expected {
        let got = single_taus(ev, &native(metric))?;
        match compare_rows(metric.name(), &got, &row, 0.005) {
            Ok(d) => details.push(d),
            Err(d) => {
                ok = false;
                details.push(d)
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    details.push(format!("{secs:.1}s"));
    ensure(ok && secs < 120.0, details.join("; "))
}

fn criterion_2(corpus: &Corpus) -> Check {
    let selectors: Vec<Selector> = ["R1", "R2", "R4", "R3", "R1^PE", "R3^PE"]
        .iter()
        .map(|s| Selector::parse(s))
        .collect::<Result<_, _>>()
        .map_err(err)?;
    let sources: Vec<MetricSource> = NativeMetric::ALL.into_iter().map(native).collect();
    let report = raw_score_report(corpus, &sources, &selectors, true).map_err(err)?;
    let expected = [
        [24.2, 31.5, 27.3, 37.1, 23.9, 31.0],
        [55.7, 60.3, 56.1, 63.0, 54.5, 58.4],
        [-63.3, -53.0, -59.4, -48.7, -64.1, -58.9],
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for ((name, got), row) in report.metrics.iter().zip(&report.values).zip(&expected) {
        match compare_rows(name, got, row, 0.5) {
            Ok(d) => details.push(d),
            Err(d) => {
                ok = false;
                details.push(d)
            }
        }
    }
    ensure(ok, details.join("; "))
}

fn neural_sources(corpus: &Corpus, dir: &Path) -> Result<Vec<(String, MetricSource)>, String> {
    ["comet20", "comet22", "bleurt", "comet20-qe"]
        .iter()
        .map(|stem| {
            let table = ingest_scores(corpus, &dir.join(format!("{stem}.tsv")), None).map_err(err)?;
            Ok((stem.to_string(), MetricSource::Table(table)))
        })
        .collect()
}

fn criterion_3(ev: &Evaluator, neural: Option<&[(String, MetricSource)]>) -> Check {
    let rx = Selector::parse("Rx").map_err(err)?;
    let r3 = Selector::parse("R3").map_err(err)?;
    let mut details = Vec::new();
    let mut ok = true;

    let mut rx_native = Vec::new();
    let mut r3_native = Vec::new();
    for metric in NativeMetric::ALL {
        let s = native(metric);
        rx_native.push(ev.correlate(&s, &rx, Aggregation::Avg).map_err(err)?.tau());
        r3_native.push(ev.correlate(&s, &r3, Aggregation::Single).map_err(err)?.tau());
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (rx_mean, r3_mean) = (mean(&rx_native), mean(&r3_native));
    ok &= rx_mean > r3_mean;
    ok &= rx_native
        .iter()
        .zip([0.134, 0.147, 0.124])
        .all(|(g, e)| within(*g, e, 0.005));
    details.push(format!(
        "native Rx avg {:.3} {:.3} {:.3} (mean {rx_mean:.3}) vs R3 mean {r3_mean:.3}",
        rx_native[0], rx_native[1], rx_native[2]
    ));

    if let Some(neural) = neural {
        let mut rx_all = rx_native.clone();
        let mut r3_all = r3_native.clone();
        for (name, s) in neural.iter().filter(|(n, _)| n != "comet20-qe") {
            let rx_tau = ev
                .correlate(s, &rx, Aggregation::Avg)
                .map_err(|e| format!("{name}: {e}"))?
                .tau();
            let r3_tau = ev
                .correlate(s, &r3, Aggregation::Single)
                .map_err(|e| format!("{name}: {e}"))?
                .tau();
            rx_all.push(rx_tau);
            r3_all.push(r3_tau);
        }
        let (rx_m, r3_m) = (mean(&rx_all), mean(&r3_all));
        ok &= rx_m > r3_m && within(rx_m, 0.166, 0.005) && within(r3_m, 0.154, 0.005);
        details.push(format!(
            "all-metric Rx avg {rx_m:.3} vs R3 {r3_m:.3} (published .166 vs .154)"
        ));
    }
    ensure(ok, details.join("; "))
}

fn criterion_4(ev: &Evaluator, neural: &[(String, MetricSource)]) -> Check {
    let expected = [
        ("comet20", [0.172, 0.176, 0.185, 0.181]),
        ("comet22", [0.189, 0.195, 0.191, 0.192]),
        ("bleurt", [0.159, 0.156, 0.199, 0.178]),
    ];
    let mut ok = true;
    let mut details = Vec::new();
    for (name, row) in expected {
        let (_, source) = neural.iter().find(|(n, _)| n == name).expect("loaded above");
        let got = single_taus(ev, source)?;
        match compare_rows(name, &got, &row, 0.005) {
            Ok(d) => details.push(d),
            Err(d) => {
                ok = false;
                details.push(d)
            }
        }
    }
    let (_, qe) = neural.iter().find(|(n, _)| n == "comet20-qe").expect("loaded above");
    let none = Selector::parse("none").map_err(err)?;
    let qe_tau = ev.correlate(qe, &none, Aggregation::Single).map_err(err)?.tau();
    ok &= within(qe_tau, 0.171, 0.005);
    details.push(format!("comet20-qe {qe_tau:.3}/0.171"));
    ensure(ok, details.join("; "))
}

fn criterion_5(ev: &Evaluator) -> Check {
    let pool = Selector::parse("all").map_err(err)?;
    let smallest = pool.select(ev.corpus()).map_err(err)?.min_len();
    if smallest < 7 {
        return Err(format!("pool `all` has only {smallest} references on some segment"));
    }
    let xs: Vec<usize> = (1..=smallest.min(10)).collect();
    let mut details = Vec::new();
    let mut ok = true;
    for metric in NativeMetric::ALL {
        let points = sampling_curve(
            ev,
            &native(metric),
            &pool,
            &xs,
            10,
            0,
            CurveMode::PerSegment,
            Aggregation::Avg,
        )
        .map_err(err)?;
        let gain = points[6].mean > points[0].mean;
        let monotone = points
            .windows(2)
            .all(|w| w[1].mean >= w[0].mean || w[1].ci_high >= w[0].ci_low);
        ok &= gain && monotone;
        details.push(format!(
            "{} x=1 {:.3} x=7 {:.3}{}",
            metric.name(),
            points[0].mean,
            points[6].mean,
            if monotone { "" } else { " (non-monotone)" }
        ));
    }
    ensure(ok, details.join("; "))
}

fn criterion_6(ev: &Evaluator) -> Check {
    let (a, b) = (Level::new(1), Level::new(3));
    let mut details = Vec::new();
    let mut ok = true;
    for metric in NativeMetric::ALL {
        let taus = single_taus(ev, &native(metric))?;
        let (lo, hi) = (taus[0] - 0.01, taus[2] + 0.01);
        let points = mixing_curve(ev, &native(metric), a, b, &[0.25, 0.5, 0.75], 0).map_err(err)?;
        let inside = points.iter().all(|p| p.tau >= lo && p.tau <= hi);
        ok &= inside;
        let cells: Vec<String> = points.iter().map(|p| format!("{:.3}", p.tau)).collect();
        details.push(format!("{} [{lo:.3}, {hi:.3}] {}", metric.name(), cells.join(" ")));
    }
    ensure(ok, details.join("; "))
}

fn criterion_7(ev: &Evaluator) -> Check {
    let levels = default_levels();
    let n = ev.corpus().segments().len() as f64;
    let lambdas: Vec<f64> = (0..=7).map(|i| f64::from(i) / 10.0).collect();
    let config = GridConfig {
        levels,
        budgets: vec![n, 2.0 * n, 3.0 * n],
        lambdas: lambdas.clone(),
        temperature: 0.5,
        patience: DEFAULT_PATIENCE,
        seeds_per_cell: 10,
        seed: 0,
    };
    let grid = grid_experiment(ev, &native(NativeMetric::Chrf), &config).map_err(err)?;
    let rows: Vec<&[_]> = grid.cells.chunks(lambdas.len()).collect();
    let constant = rows[0].iter().all(|c| c.mean_tau == rows[0][0].mean_tau);
    let mut ok = constant;
    let mut details = vec![format!("minimal budget column constant: {constant}")];
    for row in &rows[1..] {
        let best = row.iter().position(|c| c.argmax).expect("one argmax per budget");
        let interior = best != 0 && best != row.len() - 1;
        ok &= interior;
        details.push(format!("budget {} argmax lambda {}", row[0].budget, row[best].lambda));
    }
    ensure(ok, details.join("; "))
}

/// Nonempty strings with at least one visible character, drawing from
/// ASCII, punctuation, accented Latin, CJK and unusual whitespace.
fn random_text<R: Rng>(rng: &mut R) -> String {
    const POOLS: &[&str] = &[
        "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ",
        "0123456789",
        ".,;:!?'\"()[]{}-/&%$#@*+=<>",
        "àéîõüßçñøÅÉ",
        "的一是不了人我在有他这中大来",
        " \t\u{a0}\u{2003}\u{1c}",
    ];
    let len = rng.random_range(1..40);
    let mut s: String = (0..len)
        .map(|_| {
            let pool: Vec<char> = POOLS[rng.random_range(0..POOLS.len())].chars().collect();
            pool[rng.random_range(0..pool.len())]
        })
        .collect();
    let visible: Vec<char> = POOLS[0].chars().collect();
    let at = s
        .char_indices()
        .map(|(i, _)| i)
        .nth(rng.random_range(0..len))
        .unwrap_or(s.len());
    s.insert(at, visible[rng.random_range(0..visible.len())]);
    s
}

fn criterion_8() -> Check {
    let mut r = rng(8);
    for _ in 0..1000 {
        let s = random_text(&mut r);
        let b = bleu::sentence_bleu(&s, &s).value;
        let c = chrf::sentence_chrf(&s, &s).value;
        let t = ter::sentence_ter(&s, &s).map(|o| o.value);
        if b != 100.0 || c != 100.0 || t != Some(0.0) {
            return Err(format!("{s:?}: BLEU {b} chrF {c} TER {t:?}"));
        }
    }
    Ok("1000 strings".into())
}

fn criterion_9() -> Check {
    let b = bleu::sentence_bleu("a b c d e", "a b c d f").value;
    let sub = ter::sentence_ter("a b c d e", "a b c d f").map(|o| o.value);
    let shift = ter::sentence_ter("b c d a", "a b c d").map(|o| o.value);
    let c = chrf::sentence_chrf("abc", "xyz").value;
    let ok = within(b, 66.87, 0.01) && sub == Some(20.0) && shift == Some(25.0) && c == 0.0;
    ensure(ok, format!("BLEU {b:.4} TER {sub:?} shift {shift:?} chrF {c}"))
}

fn random_instance<R: Rng>(r: &mut R) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let systems = r.random_range(2..=5);
    let segments = r.random_range(1..=5);
    let da = (0..segments)
        .map(|_| (0..systems).map(|_| f64::from(r.random_range(0..=100u32))).collect())
        .collect();
    let metric = (0..segments)
        .map(|_| (0..systems).map(|_| f64::from(r.random_range(0..4u32))).collect())
        .collect();
    (da, metric)
}

fn segment_scores(metric: &[Vec<f64>]) -> SegmentScores {
    SegmentScores {
        metric: MetricId::new("m", Orientation::Higher),
        values: metric.iter().map(|r| r.iter().map(|&v| Some(v)).collect()).collect(),
    }
}

fn criterion_10() -> Check {
    let mut r = rng(10);
    let (mut checked, mut flipped) = (0, 0);
    for _ in 0..2000 {
        let (da, metric) = random_instance(&mut r);
        let corpus = common::da_corpus(&da);
        let pairs = build_darr_pairs(&corpus, DEFAULT_THRESHOLD).map_err(err)?;
        for (higher, orientation) in [(true, Orientation::Higher), (false, Orientation::Lower)] {
            let got = kendall_tau(&pairs, &segment_scores(&metric), orientation, TiePolicy::Discordant).ok();
            let expected = common::oracle_tau(&da, &metric, higher, DEFAULT_THRESHOLD);
            if got.as_ref().map(|t| t.tau) != expected {
                return Err(format!("da {da:?} metric {metric:?}: {got:?} vs {expected:?}"));
            }
        }
        checked += 1;

        // distinct values rule out ties
        let distinct: Vec<Vec<f64>> = metric
            .iter()
            .enumerate()
            .map(|(s, row)| {
                (0..row.len())
                    .map(|y| r.random::<f64>() + (s * 10 + y) as f64)
                    .collect()
            })
            .collect();
        let s = segment_scores(&distinct);
        if let (Ok(up), Ok(down)) = (
            kendall_tau(&pairs, &s, Orientation::Higher, TiePolicy::Discordant),
            kendall_tau(&pairs, &s, Orientation::Lower, TiePolicy::Discordant),
        ) {
            if up.tau != -down.tau {
                return Err(format!("sign flip failed: {} vs {}", up.tau, down.tau));
            }
            flipped += 1;
        }
    }
    Ok(format!("{checked} instances, {flipped} tie-free flips"))
}

fn criterion_11() -> Check {
    let mut r = rng(11);
    for _ in 0..100 {
        let systems = r.random_range(2..=8);
        let da: Vec<Vec<f64>> = (0..r.random_range(1..=10))
            .map(|_| (0..systems).map(|_| r.random_range(0.0..100.0)).collect())
            .collect();
        let corpus = common::da_corpus(&da);
        let t1 = r.random_range(0.0..60.0);
        let t2 = t1 + r.random_range(0.0..40.0);
        let low = build_darr_pairs(&corpus, t1).map_err(err)?;
        let high = build_darr_pairs(&corpus, t2).map_err(err)?;
        if !high.iter().all(|p| low.contains(p)) {
            return Err(format!("thresholds {t1} < {t2}"));
        }
    }
    Ok("100 score sets".into())
}

fn segs(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("s{i}")).collect()
}

fn random_problem<R: Rng>(r: &mut R, max_segments: usize, max_levels: usize) -> AllocationProblem {
    let n = r.random_range(1..=max_segments);
    let levels: Vec<VendorLevel> = (0..r.random_range(1..=max_levels))
        .map(|l| {
            VendorLevel::new(
                format!("L{l}"),
                f64::from(r.random_range(1..=5u32)),
                f64::from(r.random_range(1..=5u32)),
            )
        })
        .collect();
    let min = minimum_budget(n, &levels);
    let total: f64 = levels.iter().map(|l| l.cost).sum::<f64>() * n as f64;
    AllocationProblem {
        segments: segs(n),
        budget: min + r.random::<f64>() * 1.2 * (total - min),
        levels,
        lambda: r.random(),
        temperature: r.random_range(0.1..3.0),
        patience: 200,
        seed: r.random(),
    }
}

fn criterion_12() -> Check {
    let mut r = rng(12);
    for i in 0..1000 {
        let p = random_problem(&mut r, 20, 5);
        let (alloc, trace) = allocate(&p).map_err(err)?;
        alloc.check(p.budget).map_err(|e| format!("problem {i}: {e}"))?;
        let start = Allocation::cheapest(&p.segments, &p.levels).utility();
        let monotone = trace
            .steps
            .iter()
            .try_fold(start, |last, s| (s.utility_after > last).then_some(s.utility_after))
            .is_some();
        let replayed = trace.replay(&p).map_err(err)? == alloc;
        let again = allocate(&p).map_err(err)?;
        if !monotone || !replayed || again.0 != alloc || again.1 != trace {
            return Err(format!("problem {i}: monotone {monotone} replay {replayed}"));
        }
    }
    Ok("1000 problems".into())
}

fn best_of_seeds(p: &AllocationProblem, seeds: std::ops::Range<u64>) -> Result<f64, String> {
    seeds
        .map(|seed| {
            allocate(&AllocationProblem { seed, ..p.clone() })
                .map(|(a, _)| a.utility())
                .map_err(err)
        })
        .try_fold(f64::NEG_INFINITY, |m, u| u.map(|u| m.max(u)))
}

fn criterion_13() -> Check {
    let mut r = rng(13);
    let mut worst = f64::INFINITY;
    let mut sum = 0.0;
    for _ in 0..50 {
        let p = AllocationProblem {
            lambda: 0.5,
            temperature: 1.0,
            ..random_problem(&mut r, 4, 3)
        };
        let (opt, _) = brute_force_allocate(&p.segments, &p.levels, p.budget).map_err(err)?;
        let ratio = best_of_seeds(&p, 0..10)? / opt;
        worst = worst.min(ratio);
        sum += ratio;
    }
    let example = AllocationProblem {
        patience: 200,
        ..AllocationProblem::new(
            segs(2),
            vec![VendorLevel::new("A", 1.0, 1.0), VendorLevel::new("B", 2.0, 3.0)],
            4.0,
        )
    };
    let example_best = best_of_seeds(&example, 0..10)?;
    ensure(
        worst >= 0.9 && example_best == 6.0,
        format!(
            "worst ratio {worst:.3}, mean {:.3}; worked example {example_best}",
            sum / 50.0
        ),
    )
}

fn criterion_14() -> Check {
    let mut r = rng(14);
    for i in 0..500 {
        let p = random_problem(&mut r, 20, 5);
        let minimal = AllocationProblem {
            budget: minimum_budget(p.segments.len(), &p.levels),
            ..p.clone()
        };
        if allocate(&minimal).map_err(err)?.0 != Allocation::cheapest(&p.segments, &p.levels) {
            return Err(format!(
                "problem {i}: minimal budget moved away from the cheapest assignment"
            ));
        }
        let quantity = AllocationProblem { lambda: 0.0, ..p };
        let (_, trace) = allocate(&quantity).map_err(err)?;
        if trace
            .steps
            .iter()
            .any(|s| matches!(s.transaction, Transaction::Promote { .. }))
        {
            return Err(format!("problem {i}: promotion with lambda 0"));
        }
    }
    Ok("500 problems".into())
}

fn main() -> ExitCode {
    let mut results: Vec<(u8, &str, Outcome)> = Vec::new();
    let data_titles: [(u8, &str); 7] = [
        (1, "string-metric tau per reference level"),
        (2, "raw metric means per reference set"),
        (3, "averaging over all references beats the best single one"),
        (4, "ingested neural metric tau per reference level"),
        (5, "tau grows with the number of references"),
        (6, "mixed-quality tau lies between the pure levels"),
        (7, "budget x lambda grid has an interior optimum"),
    ];
    match load_data() {
        None => {
            for (n, title) in data_titles {
                results.push((n, title, Outcome::NotRun("REFTRADE_CORPUS not set".into())));
            }
        }
        Some(Err(e)) => {
            for (n, title) in data_titles {
                results.push((n, title, Outcome::Fail(e.clone())));
            }
        }
        Some(Ok(data)) => {
            let corpus = &data.corpus;
            match Evaluator::new(corpus, DEFAULT_THRESHOLD, TiePolicy::default()) {
                Err(e) => {
                    for (n, title) in data_titles {
                        results.push((n, title, Outcome::Fail(e.to_string())));
                    }
                }
                Ok(ev) => {
                    let neural = data.neural.as_deref().map(|d| neural_sources(corpus, d));
                    let neural_ok = match &neural {
                        Some(Ok(n)) => Some(n.as_slice()),
                        _ => None,
                    };
                    let t = data_titles;
                    results.push((t[0].0, t[0].1, outcome(criterion_1(&ev))));
                    results.push((t[1].0, t[1].1, outcome(criterion_2(corpus))));
                    results.push((t[2].0, t[2].1, outcome(criterion_3(&ev, neural_ok))));
                    let c4 = match &neural {
                        None => Outcome::NotRun("REFTRADE_NEURAL_SCORES not set".into()),
                        Some(Err(e)) => Outcome::Fail(e.clone()),
                        Some(Ok(n)) => outcome(criterion_4(&ev, n)),
                    };
                    results.push((t[3].0, t[3].1, c4));
                    results.push((t[4].0, t[4].1, outcome(criterion_5(&ev))));
                    results.push((t[5].0, t[5].1, outcome(criterion_6(&ev))));
                    results.push((t[6].0, t[6].1, outcome(criterion_7(&ev))));
                }
            }
        }
    }
    results.push((8, "metric identities on random strings", outcome(criterion_8())));
    results.push((9, "hand-computed metric values", outcome(criterion_9())));
    results.push((10, "Kendall tau equals the double-loop oracle", outcome(criterion_10())));
    results.push((11, "pair sets shrink as the threshold grows", outcome(criterion_11())));
    results.push((
        12,
        "allocator feasibility, replay and determinism",
        outcome(criterion_12()),
    ));
    results.push((13, "allocator close to the exhaustive optimum", outcome(criterion_13())));
    results.push((14, "degenerate budgets and lambda 0", outcome(criterion_14())));

    let mut failed = false;
    for (n, title, o) in &results {
        let (tag, detail) = match o {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Fail(d) => {
                failed = true;
                ("FAIL", d)
            }
            Outcome::NotRun(d) => ("NOT RUN", d),
        };
        println!("{tag:<7} [{n:>2}] {title}: {detail}");
    }
    if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
