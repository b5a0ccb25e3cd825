use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Location of a record inside an input file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Locus {
    pub path: PathBuf,
    pub line: usize,
}

impl std::fmt::Display for Locus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.path.display(), self.line)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{locus}: {message}")]
    Malformed { locus: Locus, message: String },

    #[error("invalid json in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("no segments")]
    NoSegments,

    #[error("no scores")]
    NoScores,

    #[error("corpus inconsistency: {0}")]
    Inconsistent(String),

    #[error("invalid selector `{expr}`: {message}")]
    Selector { expr: String, message: String },

    #[error("selector `{selector}` resolves to no reference for segment {segment}")]
    EmptySelection { selector: String, segment: String },

    #[error("missing human score for system {system} on segment {segment}")]
    MissingHumanScore { system: String, segment: String },

    #[error("missing score for system {system}, segment {segment}, reference {reference}")]
    MissingScore {
        system: String,
        segment: String,
        reference: String,
    },

    #[error("empty reference: TER is undefined for segment {segment}")]
    EmptyReference { segment: String },

    #[error("no golden pairs: Kendall's tau is undefined")]
    NoPairs,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("budget below mandatory coverage: {budget} < {required}")]
    BudgetBelowCoverage { budget: f64, required: f64 },

    #[error("instance too large for exhaustive search: {segments} segments, {levels} levels")]
    InstanceTooLarge { segments: usize, levels: usize },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Malformed {
            locus: Locus {
                path: path.into(),
                line,
            },
            message: message.into(),
        }
    }
}
