//! Sentence-level string metrics and per-(system, segment, reference) score
//! tables, including ingestion of externally computed (neural) scores.

pub mod bleu;
pub mod chrf;
mod table;
pub mod ter;
pub mod tokenize;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use table::{ingest_scores, score_all, ScoreTable, ScoreWarningRecord, SCORES_HEADER};

/// Whether larger values mean better translations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    #[serde(alias = "higher-better")]
    Higher,
    #[serde(alias = "lower-better")]
    Lower,
}

impl Orientation {
    /// Maps a value so that larger is always better.
    pub fn oriented(self, value: f64) -> f64 {
        match self {
            Orientation::Higher => value,
            Orientation::Lower => -value,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Higher => Orientation::Lower,
            Orientation::Lower => Orientation::Higher,
        }
    }
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "higher" | "higher-better" => Ok(Orientation::Higher),
            "lower" | "lower-better" => Ok(Orientation::Lower),
            _ => Err(Error::InvalidArgument(format!(
                "invalid orientation `{s}` (expected higher or lower)"
            ))),
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::Higher => "higher",
            Orientation::Lower => "lower",
        })
    }
}

/// Why a score was computed on degenerate input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreWarning {
    EmptyHypothesis,
    EmptyReference,
}

impl fmt::Display for ScoreWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreWarning::EmptyHypothesis => "empty hypothesis",
            ScoreWarning::EmptyReference => "empty reference",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricOutput {
    pub value: f64,
    pub warning: Option<ScoreWarning>,
}

/// Metrics computed natively from strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NativeMetric {
    Bleu,
    Chrf,
    Ter,
}

impl NativeMetric {
    pub const ALL: [NativeMetric; 3] = [NativeMetric::Bleu, NativeMetric::Chrf, NativeMetric::Ter];

    pub fn name(self) -> &'static str {
        match self {
            NativeMetric::Bleu => "BLEU",
            NativeMetric::Chrf => "chrF",
            NativeMetric::Ter => "TER",
        }
    }

    pub fn orientation(self) -> Orientation {
        match self {
            NativeMetric::Ter => Orientation::Lower,
            _ => Orientation::Higher,
        }
    }

    pub fn id(self) -> MetricId {
        MetricId::new(self.name(), self.orientation())
    }

    /// Scores one hypothesis against one reference. `None` means the score
    /// is undefined (TER against an empty reference).
    pub fn score(self, hypothesis: &str, reference: &str) -> Option<MetricOutput> {
        match self {
            NativeMetric::Bleu => Some(bleu::sentence_bleu(hypothesis, reference)),
            NativeMetric::Chrf => Some(chrf::sentence_chrf(hypothesis, reference)),
            NativeMetric::Ter => ter::sentence_ter(hypothesis, reference),
        }
    }
}

impl FromStr for NativeMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bleu" => Ok(NativeMetric::Bleu),
            "chrf" => Ok(NativeMetric::Chrf),
            "ter" => Ok(NativeMetric::Ter),
            _ => Err(Error::InvalidArgument(format!(
                "unknown metric `{s}` (expected bleu, chrf or ter)"
            ))),
        }
    }
}

impl fmt::Display for NativeMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Name and orientation of any metric, native or external.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MetricId {
    pub name: String,
    pub orientation: Orientation,
}

impl MetricId {
    pub fn new(name: impl Into<String>, orientation: Orientation) -> Self {
        MetricId {
            name: name.into(),
            orientation,
        }
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}
