//! In-memory multi-reference corpus: sources, references per vendor level
//! (originals and post-edits), system hypotheses and raw DA scores.
//!
//! A [`Corpus`] is immutable once built. Text is stored exactly as received;
//! every normalization step belongs to the metric that needs it.

pub(crate) mod io;
mod selector;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{export_corpus, import_corpus, CorpusFormat, DeclaredCounts};
pub use selector::{Selection, Selector};

/// Vendor level of a reference, `R1`, `R2`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Level(u8);

impl Level {
    pub fn new(number: u8) -> Self {
        Level(number)
    }

    pub fn number(self) -> u8 {
        self.0
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.0)
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.strip_prefix('R')
            .and_then(|n| n.parse::<u8>().ok())
            .map(Level)
            .ok_or_else(|| Error::InvalidArgument(format!("invalid level `{s}` (expected R<number>)")))
    }
}

impl Serialize for Level {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Level {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Post-editor proficiency, ordered from least to most professional.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Proficiency {
    Layman,
    Student,
    Professional,
}

impl Proficiency {
    pub const ALL: [Proficiency; 3] = [Proficiency::Layman, Proficiency::Student, Proficiency::Professional];

    pub fn as_str(self) -> &'static str {
        match self {
            Proficiency::Layman => "layman",
            Proficiency::Student => "student",
            Proficiency::Professional => "professional",
        }
    }
}

impl fmt::Display for Proficiency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Proficiency {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "layman" => Ok(Proficiency::Layman),
            "student" => Ok(Proficiency::Student),
            "professional" => Ok(Proficiency::Professional),
            _ => Err(Error::InvalidArgument(format!("unknown proficiency `{s}`"))),
        }
    }
}

/// The annotator who post-edited a reference.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Editor {
    pub proficiency: Proficiency,
    pub id: String,
}

/// Identifies one reference of a segment: a level plus, for post-edits, the
/// editor. `NoReference` keys scores of reference-free (QE) metrics.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RefKey {
    NoReference,
    Reference { level: Level, editor: Option<Editor> },
}

impl RefKey {
    pub fn original(level: Level) -> Self {
        RefKey::Reference { level, editor: None }
    }

    pub fn post_edit(level: Level, proficiency: Proficiency, id: impl Into<String>) -> Self {
        RefKey::Reference {
            level,
            editor: Some(Editor {
                proficiency,
                id: id.into(),
            }),
        }
    }

    pub fn level(&self) -> Option<Level> {
        match self {
            RefKey::NoReference => None,
            RefKey::Reference { level, .. } => Some(*level),
        }
    }

    pub fn editor(&self) -> Option<&Editor> {
        match self {
            RefKey::Reference { editor: Some(e), .. } => Some(e),
            _ => None,
        }
    }
}

/// Formats as `R3`, `R3+layman:a07` or `none`.
impl fmt::Display for RefKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RefKey::NoReference => f.write_str("none"),
            RefKey::Reference { level, editor: None } => write!(f, "{level}"),
            RefKey::Reference { level, editor: Some(e) } => write!(f, "{level}+{}:{}", e.proficiency, e.id),
        }
    }
}

impl FromStr for RefKey {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "none" {
            return Ok(RefKey::NoReference);
        }
        match s.split_once('+') {
            None => Ok(RefKey::original(s.parse()?)),
            Some((level, editor)) => {
                let (prof, id) = editor
                    .split_once(':')
                    .ok_or_else(|| Error::InvalidArgument(format!("invalid reference key `{s}`")))?;
                if id.is_empty() {
                    return Err(Error::InvalidArgument(format!(
                        "invalid reference key `{s}`: empty editor id"
                    )));
                }
                Ok(RefKey::post_edit(level.parse()?, prof.parse()?, id))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub level: Level,
    pub editor: Option<Editor>,
    pub text: String,
}

impl Reference {
    pub fn key(&self) -> RefKey {
        RefKey::Reference {
            level: self.level,
            editor: self.editor.clone(),
        }
    }

    pub fn is_post_edit(&self) -> bool {
        self.editor.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub id: String,
    pub document: String,
    pub source: String,
    /// Sorted by reference key: level, then originals before post-edits.
    pub references: Vec<Reference>,
    /// One hypothesis per system, aligned with [`Corpus::systems`].
    pub hypotheses: Vec<String>,
}

impl Segment {
    pub fn reference(&self, key: &RefKey) -> Option<&Reference> {
        let level = key.level()?;
        self.references
            .iter()
            .find(|r| r.level == level && r.editor.as_ref() == key.editor())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusCounts {
    pub segments: usize,
    pub documents: usize,
    pub systems: usize,
    pub references: usize,
    pub post_edits: usize,
}

impl fmt::Display for CorpusCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "segments={} docs={} systems={} refs={} postedits={}",
            self.segments, self.documents, self.systems, self.references, self.post_edits
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    documents: Vec<String>,
    segments: Vec<Segment>,
    systems: Vec<String>,
    /// `human[segment][system]`, raw 0-100 DA.
    human: Vec<Vec<Option<f64>>>,
}

impl Corpus {
    pub fn builder() -> CorpusBuilder {
        CorpusBuilder::default()
    }

    pub fn documents(&self) -> &[String] {
        &self.documents
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn systems(&self) -> &[String] {
        &self.systems
    }

    pub fn segment_index(&self, id: &str) -> Option<usize> {
        self.segments.iter().position(|s| s.id == id)
    }

    pub fn system_index(&self, id: &str) -> Option<usize> {
        self.systems.iter().position(|s| s == id)
    }

    /// Raw DA score of `system` on `segment` (both indices).
    pub fn human_score(&self, segment: usize, system: usize) -> Option<f64> {
        self.human[segment][system]
    }

    /// All reference levels that occur anywhere in the corpus, ascending.
    pub fn levels(&self) -> Vec<Level> {
        let set: BTreeSet<Level> = self
            .segments
            .iter()
            .flat_map(|s| s.references.iter().map(|r| r.level))
            .collect();
        set.into_iter().collect()
    }

    pub fn counts(&self) -> CorpusCounts {
        let (mut refs, mut pes) = (0, 0);
        for r in self.segments.iter().flat_map(|s| &s.references) {
            if r.is_post_edit() {
                pes += 1;
            } else {
                refs += 1;
            }
        }
        CorpusCounts {
            segments: self.segments.len(),
            documents: self.documents.len(),
            systems: self.systems.len(),
            references: refs,
            post_edits: pes,
        }
    }

    /// Every (proficiency, editor id) found among post-edits.
    pub fn editors(&self) -> Vec<Editor> {
        let set: BTreeSet<Editor> = self
            .segments
            .iter()
            .flat_map(|s| s.references.iter().filter_map(|r| r.editor.clone()))
            .collect();
        set.into_iter().collect()
    }
}

/// Accumulates records in any order and validates them into a [`Corpus`].
#[derive(Debug, Default)]
pub struct CorpusBuilder {
    segments: Vec<(String, String, String)>,
    references: Vec<(String, Reference)>,
    hypotheses: Vec<(String, String, String)>,
    human: Vec<(String, String, f64)>,
}

impl CorpusBuilder {
    pub fn segment(&mut self, document: &str, id: &str, source: &str) -> &mut Self {
        self.segments.push((document.into(), id.into(), source.into()));
        self
    }

    pub fn reference(&mut self, segment: &str, level: Level, editor: Option<Editor>, text: &str) -> &mut Self {
        self.references.push((
            segment.into(),
            Reference {
                level,
                editor,
                text: text.into(),
            },
        ));
        self
    }

    pub fn hypothesis(&mut self, system: &str, segment: &str, text: &str) -> &mut Self {
        self.hypotheses.push((system.into(), segment.into(), text.into()));
        self
    }

    pub fn human(&mut self, system: &str, segment: &str, score: f64) -> &mut Self {
        self.human.push((system.into(), segment.into(), score));
        self
    }

    pub fn build(&self) -> Result<Corpus> {
        if self.segments.is_empty() {
            return Err(Error::NoSegments);
        }
        let mut documents: Vec<String> = Vec::new();
        let mut seg_index: HashMap<&str, usize> = HashMap::new();
        let mut segments = Vec::with_capacity(self.segments.len());
        for (doc, id, source) in &self.segments {
            if seg_index.insert(id.as_str(), segments.len()).is_some() {
                return Err(Error::Inconsistent(format!("duplicate segment id {id}")));
            }
            if !documents.contains(doc) {
                documents.push(doc.clone());
            }
            segments.push(Segment {
                id: id.clone(),
                document: doc.clone(),
                source: source.clone(),
                references: Vec::new(),
                hypotheses: Vec::new(),
            });
        }
        let lookup = |id: &str| {
            seg_index
                .get(id)
                .copied()
                .ok_or_else(|| Error::Inconsistent(format!("unknown segment id {id}")))
        };

        for (seg, reference) in &self.references {
            let i = lookup(seg)?;
            let key = reference.key();
            if segments[i].references.iter().any(|r| r.key() == key) {
                return Err(Error::Inconsistent(format!(
                    "duplicate reference {key} for segment {seg}"
                )));
            }
            segments[i].references.push(reference.clone());
        }
        for s in &mut segments {
            s.references.sort_by_key(|r| r.key());
        }

        let systems: Vec<String> = self
            .hypotheses
            .iter()
            .map(|(sys, _, _)| sys.clone())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let sys_index: HashMap<&str, usize> = systems.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut hyps: Vec<Vec<Option<String>>> = vec![vec![None; systems.len()]; segments.len()];
        for (sys, seg, text) in &self.hypotheses {
            let i = lookup(seg)?;
            let slot = &mut hyps[i][sys_index[sys.as_str()]];
            if slot.is_some() {
                return Err(Error::Inconsistent(format!(
                    "duplicate hypothesis for system {sys}, segment {seg}"
                )));
            }
            *slot = Some(text.clone());
        }
        for (seg, row) in segments.iter_mut().zip(hyps) {
            seg.hypotheses = row
                .into_iter()
                .zip(&systems)
                .map(|(h, sys)| {
                    h.ok_or_else(|| {
                        Error::Inconsistent(format!("missing hypothesis for system {sys}, segment {}", seg.id))
                    })
                })
                .collect::<Result<_>>()?;
        }

        let mut human = vec![vec![None; systems.len()]; segments.len()];
        for (sys, seg, score) in &self.human {
            let i = lookup(seg)?;
            let j = *sys_index
                .get(sys.as_str())
                .ok_or_else(|| Error::Inconsistent(format!("human score for unknown system {sys}")))?;
            if !score.is_finite() {
                return Err(Error::Inconsistent(format!("non-finite human score for {sys}, {seg}")));
            }
            if human[i][j].replace(*score).is_some() {
                return Err(Error::Inconsistent(format!(
                    "duplicate human score for system {sys}, segment {seg}"
                )));
            }
        }

        Ok(Corpus {
            documents,
            segments,
            systems,
            human,
        })
    }
}
