//! One function per subcommand.

use std::fmt::Write as _;
use std::path::Path;

use reftrade::allocator::{
    allocate as run_allocator, default_levels, evaluate_allocation, grid_experiment, AllocationProblem, GridConfig,
    VendorLevel,
};
use reftrade::corpus::{export_corpus, import_corpus, Corpus, CorpusFormat, Level, Proficiency, Selector};
use reftrade::metaeval::{
    build_darr_pairs, correlations_to_tsv, curve_to_tsv, mixing_curve, mixing_to_tsv, pairs_to_tsv, raw_score_report,
    sampling_curve, Aggregation, CorrelationResult, Evaluator, MetricSource,
};
use reftrade::metrics::{ingest_scores, score_all, MetricId, NativeMetric, Orientation, ScoreTable};
use serde::Serialize;
use serde_json::json;

use crate::run::{slug, Run, MANIFEST};
use crate::{
    AllocateArgs, CliError, CurveArgs, Data, GridArgs, ImportArgs, MixArgs, PairsArgs, PeDiffArgs, RerunArgs,
    ScoreArgs, Table2Args, Table3Args, Table5Args,
};

type Result<T> = std::result::Result<T, CliError>;

fn load_corpus(dir: &Path) -> Result<Corpus> {
    import_corpus(dir, CorpusFormat::Canonical).map_err(|e| CliError::Data(e.to_string()))
}

fn selector(expr: &str) -> Result<Selector> {
    Ok(Selector::parse(expr)?)
}

/// Reads score files; a file without sidecar is named after its stem.
fn ingest(corpus: &Corpus, files: &[std::path::PathBuf], orientation: Option<Orientation>) -> Result<Vec<ScoreTable>> {
    files
        .iter()
        .map(|path| {
            let metric = if path.with_extension("json").exists() {
                None
            } else {
                let orientation = orientation.ok_or_else(|| {
                    CliError::Usage(format!("{} has no JSON sidecar; pass --orientation", path.display()))
                })?;
                let stem = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                Some(MetricId::new(stem, orientation))
            };
            ingest_scores(corpus, path, metric).map_err(|e| match e {
                reftrade::Error::InvalidArgument(m) => CliError::Usage(m),
                e => CliError::Data(e.to_string()),
            })
        })
        .collect()
}

/// Requested metric names resolved to native metrics or ingested tables.
/// Names without scores are dropped with a warning.
fn resolve_metrics(run: &mut Run, requested: &[String], tables: Vec<ScoreTable>) -> Vec<MetricSource> {
    let names: Vec<String> = if requested.is_empty() {
        NativeMetric::ALL
            .iter()
            .map(|m| m.name().to_string())
            .chain(tables.iter().map(|t| t.metric().name.clone()))
            .collect()
    } else {
        requested.to_vec()
    };
    let mut tables: Vec<Option<ScoreTable>> = tables.into_iter().map(Some).collect();
    let mut sources = Vec::new();
    for name in names {
        if let Ok(m) = name.parse::<NativeMetric>() {
            sources.push(MetricSource::Native(m));
        } else if let Some(t) = tables
            .iter_mut()
            .find(|t| t.as_ref().is_some_and(|t| t.metric().name.eq_ignore_ascii_case(&name)))
        {
            sources.push(MetricSource::Table(t.take().expect("matched above")));
        } else {
            run.warn(format!("no scores for metric `{name}`; omitted"));
        }
    }
    sources
}

struct Session {
    corpus: Corpus,
    sources: Vec<MetricSource>,
}

fn open(run: &mut Run, data: &Data) -> Result<Session> {
    let corpus = load_corpus(&data.corpus)?;
    let tables = ingest(&corpus, &data.scores, data.orientation)?;
    let sources = resolve_metrics(run, &data.metrics, tables);
    if sources.is_empty() {
        return Err(CliError::Usage("no metric left to evaluate".into()));
    }
    let names: Vec<String> = sources.iter().map(|s| s.id().to_string()).collect();
    run.resolve("metrics", &names);
    run.resolve("corpus_counts", &corpus.counts());
    Ok(Session { corpus, sources })
}

fn evaluator<'a>(corpus: &'a Corpus, data: &Data) -> Result<Evaluator<'a>> {
    Ok(Evaluator::new(corpus, data.threshold, data.ties)?)
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| v.to_string())
}

/// Header plus one row per metric.
fn matrix(columns: &[String], rows: &[(String, Vec<Option<f64>>)]) -> String {
    let mut out = format!("metric\t{}\n", columns.join("\t"));
    for (name, values) in rows {
        let cells: Vec<String> = values.iter().map(|v| cell(*v)).collect();
        let _ = writeln!(out, "{name}\t{}", cells.join("\t"));
    }
    out
}

fn print_matrix(columns: &[String], rows: &[(String, Vec<Option<f64>>)], digits: usize) {
    let mut line = format!("{:<12}", "metric");
    for c in columns {
        let _ = write!(line, " {c:>10}");
    }
    println!("{line}");
    for (name, values) in rows {
        let mut line = format!("{name:<12}");
        for v in values {
            match v {
                Some(v) => {
                    let _ = write!(line, " {v:>10.digits$}");
                }
                None => line.push_str(&format!(" {:>10}", "NA")),
            }
        }
        println!("{line}");
    }
}

/// Adds a `mean` row when every metric has a value in a column.
fn with_mean(mut rows: Vec<(String, Vec<Option<f64>>)>) -> Vec<(String, Vec<Option<f64>>)> {
    if rows.len() > 1 {
        let width = rows[0].1.len();
        let mean = (0..width)
            .map(|c| {
                let col: Option<Vec<f64>> = rows.iter().map(|(_, v)| v[c]).collect();
                col.map(|v| v.iter().sum::<f64>() / v.len() as f64)
            })
            .collect();
        rows.push(("mean".to_string(), mean));
    }
    rows
}

pub fn import(a: ImportArgs, args: Vec<String>) -> Result<()> {
    let corpus = load_corpus(&a.corpus)?;
    let counts = corpus.counts();
    println!("{counts}");
    if let Some(out) = &a.out {
        let mut run = Run::new(out, "import", args, &a)?;
        export_corpus(&corpus, out).map_err(|e| CliError::Data(e.to_string()))?;
        run.summarize(&counts);
        run.finish()?;
    }
    Ok(())
}

fn level_selectors(corpus: &Corpus) -> Vec<String> {
    corpus.levels().iter().map(Level::to_string).collect()
}

pub fn table2(a: Table2Args, args: Vec<String>) -> Result<()> {
    let mut run = Run::new(&a.output.out, "table2", args, &a)?;
    let s = open(&mut run, &a.data)?;
    let ev = evaluator(&s.corpus, &a.data)?;
    let columns = if a.selectors.is_empty() {
        level_selectors(&s.corpus)
    } else {
        a.selectors.clone()
    };
    run.resolve("columns", &columns);
    let selectors = columns.iter().map(|c| selector(c)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut all = Vec::new();
    for source in &s.sources {
        let results = selectors
            .iter()
            .map(|sel| ev.correlate(source, sel, a.aggregation))
            .collect::<reftrade::Result<Vec<_>>>()?;
        rows.push((source.id().name, results.iter().map(|r| Some(r.tau())).collect()));
        all.extend(results);
    }
    print_matrix(&columns, &rows, 3);
    run.write("table2.tsv", &matrix(&columns, &rows))?;
    run.write("correlations.tsv", &correlations_to_tsv(&all))?;
    run.finish()
}

pub fn table3(a: Table3Args, args: Vec<String>) -> Result<()> {
    let mut run = Run::new(&a.output.out, "table3", args, &a)?;
    let s = open(&mut run, &a.data)?;
    let ev = evaluator(&s.corpus, &a.data)?;
    let pool = selector(&a.selector)?;
    let aggregations = if a.aggregations.is_empty() {
        vec![Aggregation::Avg, Aggregation::Max]
    } else {
        a.aggregations.clone()
    };
    let singles = level_selectors(&s.corpus);
    let mut columns = singles.clone();
    columns.extend(aggregations.iter().map(|g| format!("{}:{g}", pool.expr())));
    run.resolve("columns", &columns);
    let mut rows = Vec::new();
    let mut all = Vec::new();
    for source in &s.sources {
        let mut results = Vec::new();
        for c in &singles {
            results.push(ev.correlate(source, &selector(c)?, Aggregation::Single)?);
        }
        for &g in &aggregations {
            results.push(ev.correlate(source, &pool, g)?);
        }
        rows.push((source.id().name, results.iter().map(|r| Some(r.tau())).collect()));
        all.extend(results);
    }
    let rows = with_mean(rows);
    print_matrix(&columns, &rows, 3);
    run.write("table3.tsv", &matrix(&columns, &rows))?;
    run.write("correlations.tsv", &correlations_to_tsv(&all))?;
    run.finish()
}

pub fn table5(a: Table5Args, args: Vec<String>) -> Result<()> {
    let mut run = Run::new(&a.output.out, "table5", args, &a)?;
    let s = open(&mut run, &a.data)?;
    let columns = if a.selectors.is_empty() {
        let mut cols = level_selectors(&s.corpus);
        let post_edited: Vec<String> = s
            .corpus
            .levels()
            .iter()
            .map(|l| format!("{l}^PE"))
            .filter(|e| Selector::parse(e).and_then(|sel| sel.select(&s.corpus)).is_ok())
            .collect();
        cols.extend(post_edited);
        cols
    } else {
        a.selectors.clone()
    };
    run.resolve("columns", &columns);
    let selectors = columns.iter().map(|c| selector(c)).collect::<Result<Vec<_>>>()?;
    let report = raw_score_report(&s.corpus, &s.sources, &selectors, !a.raw)?;
    let rows: Vec<(String, Vec<Option<f64>>)> = report
        .metrics
        .iter()
        .zip(&report.values)
        .map(|(m, v)| (m.clone(), v.iter().map(|&x| Some(x)).collect()))
        .collect();
    print_matrix(&columns, &rows, 1);
    run.write("table5.tsv", &matrix(&columns, &rows))?;
    run.finish()
}

pub fn pe_diff(a: PeDiffArgs, args: Vec<String>) -> Result<()> {
    let mut run = Run::new(&a.output.out, "pe-diff", args, &a)?;
    let s = open(&mut run, &a.data)?;
    let ev = evaluator(&s.corpus, &a.data)?;
    let mut proficiencies: Vec<Proficiency> = s.corpus.editors().iter().map(|e| e.proficiency).collect();
    proficiencies.dedup();
    if proficiencies.is_empty() {
        return Err(CliError::Data("corpus has no post-edited references".into()));
    }
    let mut columns = level_selectors(&s.corpus);
    columns.push("Rx".to_string());
    run.resolve("columns", &columns);
    run.resolve("proficiencies", &proficiencies);

    // tau of a selector, or None where it selects nothing on some segment
    let tau = |source: &MetricSource, expr: &str, agg: Aggregation| -> Result<Option<f64>> {
        let sel = selector(expr)?;
        match ev.correlate(source, &sel, agg) {
            Ok(r) => Ok(Some(r.tau())),
            Err(reftrade::Error::EmptySelection { .. }) => Ok(None),
            Err(e) => Err(e.into()),
        }
    };

    let mut out = format!("proficiency\tmetric\t{}\n", columns.join("\t"));
    for &p in &proficiencies {
        let mut rows = Vec::new();
        for source in &s.sources {
            let mut deltas = Vec::new();
            for col in &columns {
                let (base, base_agg) = if col == "Rx" {
                    ("Rx", a.aggregation)
                } else {
                    (col.as_str(), Aggregation::Single)
                };
                let edited = tau(source, &format!("{col}^PE({p})"), a.aggregation)?;
                let original = tau(source, base, base_agg)?;
                deltas.push(edited.zip(original).map(|(e, o)| e - o));
            }
            rows.push((source.id().name, deltas));
        }
        let rows = with_mean(rows);
        println!("{p}");
        print_matrix(&columns, &rows, 3);
        for (name, values) in &rows {
            let cells: Vec<String> = values.iter().map(|v| cell(*v)).collect();
            let _ = writeln!(out, "{p}\t{name}\t{}", cells.join("\t"));
        }
    }
    run.write("pe_diff.tsv", &out)?;
    run.finish()
}

/// Concatenates per-metric TSVs under one header.
fn concat(parts: &[String]) -> String {
    let mut out = String::new();
    for (i, p) in parts.iter().enumerate() {
        let body = if i == 0 {
            p.as_str()
        } else {
            p.split_once('\n').map_or("", |(_, rest)| rest)
        };
        out.push_str(body);
    }
    out
}

pub fn curve(a: CurveArgs, args: Vec<String>) -> Result<()> {
    let mut run = Run::new(&a.output.out, "curve", args, &a)?;
    let s = open(&mut run, &a.data)?;
    let ev = evaluator(&s.corpus, &a.data)?;
    let pool = selector(&a.selector)?;
    let mut parts = Vec::new();
    for source in &s.sources {
        let points = sampling_curve(
            &ev,
            source,
            &pool,
            &a.xs.0,
            a.repetitions,
            a.seed,
            a.mode,
            a.aggregation,
        )?;
        let name = source.id().name;
        for p in &points {
            println!(
                "{name}\tx={}\tmean={:.4}\tci=[{:.4}, {:.4}]",
                p.x, p.mean, p.ci_low, p.ci_high
            );
        }
        parts.push(curve_to_tsv(&name, pool.expr(), &points));
    }
    run.write("curve.tsv", &concat(&parts))?;
    run.finish()
}

pub fn mix(a: MixArgs, args: Vec<String>) -> Result<()> {
    let mut run = Run::new(&a.output.out, "mix", args, &a)?;
    let s = open(&mut run, &a.data)?;
    let ev = evaluator(&s.corpus, &a.data)?;
    let mut parts = Vec::new();
    for source in &s.sources {
        let points = mixing_curve(&ev, source, a.from, a.to, &a.fractions, a.seed)?;
        let name = source.id().name;
        for p in &points {
            println!(
                "{name}\tfraction={}\tfrom_{}={}\ttau={:.4}",
                p.fraction, a.to, p.segments_from_b, p.tau
            );
        }
        parts.push(mixing_to_tsv(&name, a.from, a.to, &points));
    }
    run.write("mix.tsv", &concat(&parts))?;
    run.finish()
}

fn levels_or_default(levels: &[VendorLevel]) -> Vec<VendorLevel> {
    if levels.is_empty() {
        default_levels()
    } else {
        levels.to_vec()
    }
}

#[derive(Serialize)]
struct AllocationSummary {
    segments: usize,
    budget: f64,
    cost: f64,
    utility: f64,
    references: usize,
    refs_per_segment: f64,
    steps: usize,
    promotions: usize,
    rejected: usize,
    stop: reftrade::allocator::StopReason,
    replay_matches: bool,
}

pub fn allocate(a: AllocateArgs, args: Vec<String>) -> Result<()> {
    let mut run = Run::new(&a.output.out, "allocate", args, &a)?;
    let corpus = a.corpus.as_deref().map(load_corpus).transpose()?;
    let problem = match &a.problem {
        Some(path) => AllocationProblem::from_json_file(path).map_err(|e| match e {
            reftrade::Error::Io { .. } => CliError::Data(e.to_string()),
            e => CliError::Usage(e.to_string()),
        })?,
        None => {
            let segments: Vec<String> = match (&corpus, a.segments) {
                (Some(c), _) => c.segments().iter().map(|s| s.id.clone()).collect(),
                (None, Some(n)) => (1..=n).map(|i| format!("s{i}")).collect(),
                (None, None) => return Err(CliError::Usage("pass --problem, --corpus or --segments".into())),
            };
            let budget = a
                .budget
                .ok_or_else(|| CliError::Usage("--budget is required without --problem".into()))?
                .resolve(segments.len());
            AllocationProblem {
                segments,
                levels: levels_or_default(&a.levels.levels),
                budget,
                lambda: a.lambda,
                temperature: a.levels.temperature,
                patience: a.levels.patience,
                seed: a.levels.seed,
            }
        }
    };
    problem.validate()?;
    run.resolve("problem", &problem);
    let (alloc, trace) = run_allocator(&problem)?;
    let replay_matches = trace.replay(&problem)? == alloc;
    let summary = AllocationSummary {
        segments: problem.segments.len(),
        budget: problem.budget,
        cost: alloc.cost(),
        utility: alloc.utility(),
        references: alloc.reference_count(),
        refs_per_segment: alloc.refs_per_segment(),
        steps: trace.steps.len(),
        promotions: trace.promotions(),
        rejected: trace.rejected,
        stop: trace.stop,
        replay_matches,
    };
    println!(
        "cost={} utility={} refs_per_segment={:.3} steps={} promotions={} rejected={} stop={} replay={}",
        summary.cost,
        summary.utility,
        summary.refs_per_segment,
        summary.steps,
        summary.promotions,
        summary.rejected,
        serde_json::to_value(summary.stop)
            .expect("enum serializes")
            .as_str()
            .unwrap_or_default(),
        if replay_matches { "ok" } else { "MISMATCH" },
    );
    run.write(
        "problem.json",
        &(serde_json::to_string_pretty(&problem).expect("problem serializes") + "\n"),
    )?;
    run.write("allocation.tsv", &alloc.to_tsv())?;
    run.write("trace.tsv", &trace.to_tsv(&alloc))?;

    if let Some(corpus) = &corpus {
        if problem.levels.iter().all(|l| l.id.parse::<Level>().is_ok()) {
            let tables = ingest(corpus, &a.scores, a.orientation)?;
            let sources = resolve_metrics(&mut run, &a.metrics, tables);
            let ev = Evaluator::new(corpus, reftrade::metaeval::DEFAULT_THRESHOLD, Default::default())?;
            let results = sources
                .iter()
                .map(|s| evaluate_allocation(&ev, s, &alloc))
                .collect::<reftrade::Result<Vec<CorrelationResult>>>()?;
            for r in &results {
                println!("{}\ttau={:.4}", r.metric, r.tau());
            }
            run.write("allocation_tau.tsv", &correlations_to_tsv(&results))?;
        } else {
            run.warn("level ids are not corpus levels (R1, R2, ...); allocation not correlated".into());
        }
    }
    run.summarize(&summary);
    run.finish()?;
    if replay_matches {
        Ok(())
    } else {
        Err(CliError::Data("trace replay does not reproduce the allocation".into()))
    }
}

pub fn grid(a: GridArgs, args: Vec<String>) -> Result<()> {
    let mut run = Run::new(&a.output.out, "grid", args, &a)?;
    let s = open(&mut run, &a.data)?;
    let ev = evaluator(&s.corpus, &a.data)?;
    let n = s.corpus.segments().len();
    let config = GridConfig {
        levels: levels_or_default(&a.levels.levels),
        budgets: a.budgets.iter().map(|b| b.resolve(n)).collect(),
        lambdas: a.lambdas.clone(),
        temperature: a.levels.temperature,
        patience: a.levels.patience,
        seeds_per_cell: a.seeds_per_cell,
        seed: a.levels.seed,
    };
    for source in &s.sources {
        let result = grid_experiment(&ev, source, &config)?;
        for c in result.cells.iter().filter(|c| c.argmax) {
            println!(
                "{}\tbudget={}\tbest_lambda={}\tmean_tau={:.4}",
                result.metric, c.budget, c.lambda, c.mean_tau
            );
        }
        run.write(&format!("grid_{}.tsv", slug(&result.metric)), &result.to_tsv())?;
    }
    run.resolve("grid", &config);
    run.finish()
}

pub fn score(a: ScoreArgs, args: Vec<String>) -> Result<()> {
    let mut run = Run::new(&a.output.out, "score", args, &a)?;
    let s = open(&mut run, &a.data)?;
    let selection = selector(&a.selector)?.select(&s.corpus)?;
    for source in &s.sources {
        let MetricSource::Native(metric) = source else {
            run.warn(format!("{} is ingested, not computed; skipped", source.id().name));
            continue;
        };
        let table = score_all(&s.corpus, *metric, &selection)?;
        let stem = format!("scores_{}", slug(metric.name()));
        run.write(&format!("{stem}.tsv"), &table.to_tsv())?;
        run.write(&format!("{stem}.json"), &table.sidecar_json())?;
        if !table.warnings().is_empty() {
            run.warn(format!(
                "{}: {} degenerate inputs scored 0",
                metric.name(),
                table.warnings().len()
            ));
            let mut w = String::from("system_id\tseg_id\tref_key\twarning\n");
            for r in table.warnings() {
                let _ = writeln!(w, "{}\t{}\t{}\t{}", r.system, r.segment, r.reference, r.warning);
            }
            run.write(&format!("{stem}_warnings.tsv"), &w)?;
        }
        println!(
            "{}\tcells={}\tmean={:.3}",
            metric.name(),
            table.len(),
            table.mean().unwrap_or(f64::NAN)
        );
    }
    run.finish()
}

pub fn pairs(a: PairsArgs, args: Vec<String>) -> Result<()> {
    let mut run = Run::new(&a.output.out, "pairs", args, &a)?;
    let corpus = load_corpus(&a.corpus)?;
    let pairs = build_darr_pairs(&corpus, a.threshold)?;
    println!("pairs={}", pairs.len());
    run.write("pairs.tsv", &pairs_to_tsv(&corpus, &pairs))?;
    run.summarize(&json!({ "pairs": pairs.len() }));
    run.finish()
}

/// Recorded arguments of a manifest, with `--out` replaced when asked.
pub fn rerun_args(a: &RerunArgs) -> Result<Vec<String>> {
    let path = if a.manifest.is_dir() {
        a.manifest.join(MANIFEST)
    } else {
        a.manifest.clone()
    };
    let text =
        std::fs::read_to_string(&path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("invalid manifest {}: {e}", path.display())))?;
    let recorded: Vec<String> = value
        .get("args")
        .and_then(|v| v.as_array())
        .and_then(|v| v.iter().map(|s| s.as_str().map(String::from)).collect())
        .ok_or_else(|| CliError::Data(format!("{} has no argument list", path.display())))?;
    let Some(out) = &a.out else { return Ok(recorded) };
    let mut args = Vec::with_capacity(recorded.len() + 2);
    let mut it = recorded.into_iter();
    while let Some(arg) = it.next() {
        if arg == "--out" {
            it.next();
        } else if !arg.starts_with("--out=") {
            args.push(arg);
        }
    }
    args.push("--out".into());
    args.push(out.to_string_lossy().into_owned());
    Ok(args)
}
