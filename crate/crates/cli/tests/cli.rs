use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn reftrade(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reftrade"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Runs a subcommand on the fixture corpus into a fresh directory.
fn on_corpus(command: &str, extra: &[&str], out: &Path) -> Output {
    let corpus = fixture("tiny");
    let mut args = vec![
        command,
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    reftrade(&args)
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[test]
fn import_prints_counts() {
    let o = reftrade(&["import", "--corpus", fixture("tiny").to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "segments=8 docs=2 systems=4 refs=32 postedits=64");
}

#[test]
fn import_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = reftrade(&[
        "import",
        "--corpus",
        fixture("tiny").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["segments.tsv", "references.tsv", "systems.tsv", "human.tsv"] {
        assert_eq!(read(dir.path(), f), read(&fixture("tiny"), f), "{f}");
    }
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn missing_corpus_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = reftrade(&[
        "table2",
        "--corpus",
        "/no/such/corpus",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not found"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for args in [
        vec![
            "allocate",
            "--segments",
            "3",
            "--budget",
            "6",
            "--lambda",
            "1.5",
            "--out",
            out,
        ],
        vec![
            "allocate",
            "--segments",
            "3",
            "--budget",
            "6",
            "--temperature",
            "0",
            "--out",
            out,
        ],
        vec!["allocate", "--segments", "3", "--budget", "2", "--out", out],
        vec!["allocate", "--segments", "3", "--budget", "lots", "--out", out],
        vec!["allocate", "--budget", "3", "--out", out],
        vec!["table2", "--aggregation", "median", "--corpus", "x"],
        vec!["frobnicate"],
    ] {
        let o = reftrade(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
    let o = on_corpus("table2", &["--selector", "R{1,"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn table2_has_one_row_per_native_metric_and_column_per_level() {
    let dir = tempfile::tempdir().unwrap();
    let o = on_corpus("table2", &[], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let table = read(dir.path(), "table2.tsv");
    let lines: Vec<Vec<&str>> = table.lines().map(|l| l.split('\t').collect()).collect();
    assert_eq!(lines[0], ["metric", "R1", "R2", "R3", "R4"]);
    let names: Vec<&str> = lines[1..].iter().map(|l| l[0]).collect();
    assert_eq!(names, ["BLEU", "chrF", "TER"]);
    for row in &lines[1..] {
        assert_eq!(row.len(), 5);
        for v in &row[1..] {
            let tau: f64 = v.parse().unwrap();
            assert!((-1.0..=1.0).contains(&tau));
        }
    }
    let manifest: serde_json::Value = serde_json::from_str(&read(dir.path(), "manifest.json")).unwrap();
    assert_eq!(manifest["command"], "table2");
    assert_eq!(
        manifest["resolved"]["columns"],
        serde_json::json!(["R1", "R2", "R3", "R4"])
    );
    assert_eq!(
        manifest["outputs"],
        serde_json::json!(["table2.tsv", "correlations.tsv"])
    );
}

#[test]
fn missing_neural_metric_is_omitted_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let o = on_corpus("table2", &["--metrics", "bleu,comet22"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("comet22"));
    let table = read(dir.path(), "table2.tsv");
    assert_eq!(table.lines().count(), 2);
    let manifest = read(dir.path(), "manifest.json");
    assert!(manifest.contains("no scores for metric `comet22`"));
}

#[test]
fn exported_scores_are_ingestible() {
    let dir = tempfile::tempdir().unwrap();
    let scores = dir.path().join("scores");
    assert!(on_corpus("score", &["--metrics", "chrf"], &scores).status.success());
    // rename so the ingested column does not shadow native chrF
    let ext = dir.path().join("ext.tsv");
    fs::copy(scores.join("scores_chrf.tsv"), &ext).unwrap();

    let t = dir.path().join("t");
    let o = on_corpus("table2", &["--scores", ext.to_str().unwrap()], &t);
    assert_eq!(o.status.code(), Some(2), "no sidecar and no orientation");

    let o = on_corpus(
        "table2",
        &[
            "--scores",
            ext.to_str().unwrap(),
            "--orientation",
            "higher",
            "--metrics",
            "chrf,ext",
        ],
        &t,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let table = read(&t, "table2.tsv");
    let rows: Vec<&str> = table.lines().skip(1).collect();
    assert_eq!(rows[0].split_once('\t').unwrap().1, rows[1].split_once('\t').unwrap().1);
}

#[test]
fn curve_is_deterministic_across_runs_and_threads() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = ["--x", "1-10", "--repetitions", "4", "--seed", "9"];
    assert!(on_corpus("curve", &args, &a).status.success());
    let corpus = fixture("tiny");
    let mut threaded = vec![
        "--threads",
        "1",
        "curve",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
    ];
    threaded.extend_from_slice(&args);
    assert!(reftrade(&threaded).status.success());
    assert_eq!(read(&a, "curve.tsv"), read(&b, "curve.tsv"));
    assert_eq!(read(&a, "curve.tsv").lines().count(), 1 + 3 * 10);
}

#[test]
fn rerun_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(on_corpus("mix", &["--seed", "5", "--fractions", "0.3,0.6"], &a)
        .status
        .success());
    let o = reftrade(&[
        "rerun",
        a.join("manifest.json").to_str().unwrap(),
        "--out",
        b.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(read(&a, "mix.tsv"), read(&b, "mix.tsv"));
}

#[test]
fn grid_at_minimal_budget_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let o = on_corpus(
        "grid",
        &[
            "--metrics",
            "chrf",
            "--budget",
            "1x",
            "--lambda",
            "0,0.35,0.7",
            "--seeds-per-cell",
            "3",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let grid = read(dir.path(), "grid_chrf.tsv");
    let rows: Vec<Vec<&str>> = grid.lines().skip(1).map(|l| l.split('\t').collect()).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[0] == "8" && r[2] == rows[0][2] && r[3] == "1"));
}

#[test]
fn allocate_two_segment_problem() {
    let dir = tempfile::tempdir().unwrap();
    let o = reftrade(&[
        "allocate",
        "--problem",
        fixture("two_segments.json").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("replay=ok"));
    let trace = read(dir.path(), "trace.tsv");
    assert!(trace.starts_with("step\taction\tseg_id\tlevel_from\tlevel_to\tcost_after\tutility_after\n"));
    let alloc = read(dir.path(), "allocation.tsv");
    assert!(alloc.starts_with("level\tseg_id\n"));
    let manifest: serde_json::Value = serde_json::from_str(&read(dir.path(), "manifest.json")).unwrap();
    assert_eq!(manifest["summary"]["replay_matches"], true);
    assert!(manifest["summary"]["cost"].as_f64().unwrap() <= 4.0);
}

#[test]
fn allocate_on_corpus_correlates_the_result() {
    let dir = tempfile::tempdir().unwrap();
    let o = on_corpus("allocate", &["--budget", "2x", "--seed", "1"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let taus = read(dir.path(), "allocation_tau.tsv");
    assert_eq!(taus.lines().count(), 4);
    assert!(taus.lines().nth(1).unwrap().contains("allocation\tavg"));
}

#[test]
fn reports_have_expected_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let t3 = dir.path().join("t3");
    assert!(on_corpus("table3", &[], &t3).status.success());
    let table3 = read(&t3, "table3.tsv");
    assert_eq!(table3.lines().next().unwrap(), "metric\tR1\tR2\tR3\tR4\tRx:avg\tRx:max");
    assert!(table3.lines().last().unwrap().starts_with("mean\t"));

    let t5 = dir.path().join("t5");
    assert!(on_corpus("table5", &[], &t5).status.success());
    let table5 = read(&t5, "table5.tsv");
    assert_eq!(
        table5.lines().next().unwrap(),
        "metric\tR1\tR2\tR3\tR4\tR1^PE\tR2^PE\tR3^PE\tR4^PE"
    );
    let ter: f64 = table5
        .lines()
        .nth(3)
        .unwrap()
        .split('\t')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(ter < 0.0, "TER is negated by default");

    let pe = dir.path().join("pe");
    assert!(on_corpus("pe-diff", &[], &pe).status.success());
    let diff = read(&pe, "pe_diff.tsv");
    assert_eq!(diff.lines().next().unwrap(), "proficiency\tmetric\tR1\tR2\tR3\tR4\tRx");
    assert!(diff.lines().any(|l| l.starts_with("layman\tmean\t")));
    assert!(diff.lines().any(|l| l.starts_with("professional\tBLEU\t")));

    let pairs = dir.path().join("pairs");
    let corpus = fixture("tiny");
    let o = reftrade(&[
        "pairs",
        "--corpus",
        corpus.to_str().unwrap(),
        "--out",
        pairs.to_str().unwrap(),
    ]);
    let n: usize = stdout(&o).trim().strip_prefix("pairs=").unwrap().parse().unwrap();
    assert_eq!(read(&pairs, "pairs.tsv").lines().count(), n + 1);
}

#[test]
fn inputs_are_left_untouched() {
    let snapshot = |dir: &Path| -> Vec<(PathBuf, Vec<u8>)> {
        let mut files: Vec<_> = fs::read_dir(dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .map(|p| (p.clone(), fs::read(&p).unwrap()))
            .collect();
        files.sort();
        files
    };
    let before = snapshot(&fixture("tiny"));
    let dir = tempfile::tempdir().unwrap();
    assert!(on_corpus("score", &["--metrics", "bleu"], dir.path()).status.success());
    assert!(on_corpus("table2", &["--metrics", "bleu"], dir.path()).status.success());
    assert_eq!(snapshot(&fixture("tiny")), before);
}
