//! Canonical on-disk layout of a corpus directory.
//!
//! ```text
//! segments.tsv    doc_id  seg_id  source
//! references.tsv  seg_id  level   editor_proficiency  editor_id  text
//! systems.tsv     system_id  seg_id  text
//! human.tsv       system_id  seg_id  da_score
//! corpus.json     declared counts, checked on import (optional)
//! ```
//!
//! Every TSV starts with its header line. Fields are tab-separated, never
//! quoted, one record per line; text fields may therefore not contain tabs
//! or newlines.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusCounts, Editor, Level, Proficiency};
use crate::error::{Error, Result};

pub(crate) const SEGMENTS_HEADER: &str = "doc_id\tseg_id\tsource";
pub(crate) const REFERENCES_HEADER: &str = "seg_id\tlevel\teditor_proficiency\teditor_id\ttext";
pub(crate) const SYSTEMS_HEADER: &str = "system_id\tseg_id\ttext";
pub(crate) const HUMAN_HEADER: &str = "system_id\tseg_id\tda_score";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorpusFormat {
    /// The TSV + JSON directory layout described at module level.
    Canonical,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "canonical" | "tsv" => Ok(CorpusFormat::Canonical),
            _ => Err(Error::InvalidArgument(format!("unknown corpus format `{s}`"))),
        }
    }
}

/// Contents of `corpus.json`. Absent fields are not checked.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeclaredCounts {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segments: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub documents: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub systems: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub references: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post_edits: Option<usize>,
}

impl DeclaredCounts {
    pub fn from_counts(counts: CorpusCounts) -> Self {
        DeclaredCounts {
            name: None,
            segments: Some(counts.segments),
            documents: Some(counts.documents),
            systems: Some(counts.systems),
            references: Some(counts.references),
            post_edits: Some(counts.post_edits),
        }
    }

    fn check(&self, actual: CorpusCounts) -> Result<()> {
        let pairs = [
            ("segments", self.segments, actual.segments),
            ("documents", self.documents, actual.documents),
            ("systems", self.systems, actual.systems),
            ("references", self.references, actual.references),
            ("post_edits", self.post_edits, actual.post_edits),
        ];
        for (what, declared, found) in pairs {
            if let Some(d) = declared {
                if d != found {
                    return Err(Error::Inconsistent(format!(
                        "corpus.json declares {d} {what}, found {found}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One parsed TSV line with its 1-based line number.
pub(crate) struct Row<'a> {
    pub line: usize,
    pub fields: Vec<&'a str>,
}

/// Splits a headed TSV body into rows of exactly `header`'s width.
pub(crate) fn parse_tsv<'a>(path: &Path, content: &'a str, header: &str) -> Result<Vec<Row<'a>>> {
    let width = header.split('\t').count();
    let mut lines = content.lines().enumerate();
    match lines.next() {
        Some((_, first)) if first.trim_end_matches('\r') == header => {}
        Some((_, first)) => {
            return Err(Error::malformed(
                path,
                1,
                format!("expected header `{header}`, found `{first}`"),
            ))
        }
        None => return Ok(Vec::new()),
    }
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != width {
            return Err(Error::malformed(
                path,
                i + 1,
                format!("expected {width} tab-separated fields, found {}", fields.len()),
            ));
        }
        rows.push(Row { line: i + 1, fields });
    }
    Ok(rows)
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Reads a corpus from `dir` and validates every invariant.
pub fn import_corpus(dir: &Path, format: CorpusFormat) -> Result<Corpus> {
    match format {
        CorpusFormat::Canonical => import_canonical(dir),
    }
}

fn import_canonical(dir: &Path) -> Result<Corpus> {
    if !dir.is_dir() {
        return Err(Error::io(
            dir,
            std::io::Error::new(std::io::ErrorKind::NotFound, "corpus directory not found"),
        ));
    }
    let seg_path = dir.join("segments.tsv");
    if !seg_path.exists() {
        return Err(Error::NoSegments);
    }
    let mut builder = Corpus::builder();

    let content = read_to_string(&seg_path)?;
    let rows = parse_tsv(&seg_path, &content, SEGMENTS_HEADER)?;
    if rows.is_empty() {
        return Err(Error::NoSegments);
    }
    for row in &rows {
        let [doc, seg, source] = row.fields[..] else {
            unreachable!()
        };
        require_nonempty(&seg_path, row.line, &[("doc_id", doc), ("seg_id", seg)])?;
        builder.segment(doc, seg, source);
    }

    let ref_path = dir.join("references.tsv");
    let content = read_to_string(&ref_path)?;
    for row in parse_tsv(&ref_path, &content, REFERENCES_HEADER)? {
        let [seg, level, prof, editor_id, text] = row.fields[..] else {
            unreachable!()
        };
        let at = |e: Error| Error::malformed(&ref_path, row.line, e.to_string());
        let level: Level = level.parse().map_err(at)?;
        let editor = match (prof, editor_id) {
            ("", "") => None,
            ("", _) | (_, "") => {
                return Err(Error::malformed(
                    &ref_path,
                    row.line,
                    "editor_proficiency and editor_id must both be set or both be empty",
                ))
            }
            (p, id) => Some(Editor {
                proficiency: p.parse::<Proficiency>().map_err(at)?,
                id: id.to_string(),
            }),
        };
        builder.reference(seg, level, editor, text);
    }

    let sys_path = dir.join("systems.tsv");
    let content = read_to_string(&sys_path)?;
    for row in parse_tsv(&sys_path, &content, SYSTEMS_HEADER)? {
        let [sys, seg, text] = row.fields[..] else {
            unreachable!()
        };
        require_nonempty(&sys_path, row.line, &[("system_id", sys), ("seg_id", seg)])?;
        builder.hypothesis(sys, seg, text);
    }

    let human_path = dir.join("human.tsv");
    let content = read_to_string(&human_path)?;
    for row in parse_tsv(&human_path, &content, HUMAN_HEADER)? {
        let [sys, seg, score] = row.fields[..] else {
            unreachable!()
        };
        let score: f64 = score
            .parse()
            .map_err(|_| Error::malformed(&human_path, row.line, format!("invalid da_score `{score}`")))?;
        if !score.is_finite() {
            return Err(Error::malformed(&human_path, row.line, "da_score must be finite"));
        }
        builder.human(sys, seg, score);
    }

    let corpus = builder.build()?;
    if let Some(seg) = corpus.segments().iter().find(|s| s.references.is_empty()) {
        return Err(Error::Inconsistent(format!("segment {} has no reference", seg.id)));
    }

    let header_path = dir.join("corpus.json");
    if header_path.exists() {
        let declared: DeclaredCounts =
            serde_json::from_str(&read_to_string(&header_path)?).map_err(|source| Error::Json {
                path: header_path.clone(),
                source,
            })?;
        declared.check(corpus.counts())?;
    }
    Ok(corpus)
}

fn require_nonempty(path: &Path, line: usize, fields: &[(&str, &str)]) -> Result<()> {
    for (name, value) in fields {
        if value.is_empty() {
            return Err(Error::malformed(path, line, format!("empty {name}")));
        }
    }
    Ok(())
}

fn check_field(what: &str, value: &str) -> Result<()> {
    if value.contains(['\t', '\n', '\r']) {
        return Err(Error::InvalidArgument(format!(
            "{what} contains a tab or newline and cannot be written unquoted: {value:?}"
        )));
    }
    Ok(())
}

/// Writes the corpus in canonical order so that import(export(c)) == c.
pub fn export_corpus(corpus: &Corpus, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut segs = String::from(SEGMENTS_HEADER);
    segs.push('\n');
    let mut refs = String::from(REFERENCES_HEADER);
    refs.push('\n');
    let mut hyps = String::from(SYSTEMS_HEADER);
    hyps.push('\n');
    let mut human = String::from(HUMAN_HEADER);
    human.push('\n');

    for (i, seg) in corpus.segments().iter().enumerate() {
        check_field("source", &seg.source)?;
        segs.push_str(&format!("{}\t{}\t{}\n", seg.document, seg.id, seg.source));
        for r in &seg.references {
            check_field("reference", &r.text)?;
            let (prof, id) = match &r.editor {
                Some(e) => (e.proficiency.as_str(), e.id.as_str()),
                None => ("", ""),
            };
            refs.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", seg.id, r.level, prof, id, r.text));
        }
        for (j, sys) in corpus.systems().iter().enumerate() {
            check_field("hypothesis", &seg.hypotheses[j])?;
            hyps.push_str(&format!("{sys}\t{}\t{}\n", seg.id, seg.hypotheses[j]));
            if let Some(score) = corpus.human_score(i, j) {
                human.push_str(&format!("{sys}\t{}\t{score}\n", seg.id));
            }
        }
    }

    let header = serde_json::to_string_pretty(&DeclaredCounts::from_counts(corpus.counts())).expect("counts serialize");
    for (name, body) in [
        ("segments.tsv", segs),
        ("references.tsv", refs),
        ("systems.tsv", hyps),
        ("human.tsv", human),
        ("corpus.json", header + "\n"),
    ] {
        write_file(&dir.join(name), body.as_bytes())?;
    }
    Ok(())
}

pub(crate) fn write_file(path: &PathBuf, bytes: &[u8]) -> Result<()> {
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}
