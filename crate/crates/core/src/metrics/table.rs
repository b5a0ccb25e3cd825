use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{MetricId, NativeMetric, ScoreWarning};
use crate::corpus::io::{parse_tsv, read_to_string};
use crate::corpus::{Corpus, RefKey, Selection};
use crate::error::{Error, Result};

pub const SCORES_HEADER: &str = "system_id\tseg_id\tref_key\tvalue";

/// A degenerate input met while scoring.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreWarningRecord {
    pub system: String,
    pub segment: String,
    pub reference: RefKey,
    pub warning: ScoreWarning,
}

#[derive(Debug, Clone, PartialEq)]
struct Row {
    keys: Vec<RefKey>,
    /// `values[system][k]` scores reference `keys[k]`; empty when the system
    /// has no scores for this segment.
    values: Vec<Vec<f64>>,
}

/// Scores of one metric for every (system, segment, reference) cell of a
/// selection, indexed by corpus segment and system positions.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    metric: MetricId,
    system_ids: Vec<String>,
    segment_ids: Vec<String>,
    rows: Vec<Option<Row>>,
    warnings: Vec<ScoreWarningRecord>,
}

impl ScoreTable {
    pub fn metric(&self) -> &MetricId {
        &self.metric
    }

    pub fn warnings(&self) -> &[ScoreWarningRecord] {
        &self.warnings
    }

    pub fn segment_count(&self) -> usize {
        self.rows.len()
    }

    pub fn system_count(&self) -> usize {
        self.system_ids.len()
    }

    /// Reference keys scored for a segment, in canonical order.
    pub fn keys(&self, segment: usize) -> Option<&[RefKey]> {
        self.rows.get(segment)?.as_ref().map(|r| r.keys.as_slice())
    }

    /// Scores of one system on one segment, aligned with [`Self::keys`].
    pub fn values(&self, segment: usize, system: usize) -> Option<&[f64]> {
        let row = self.rows.get(segment)?.as_ref()?;
        let values = row.values.get(system)?;
        (!values.is_empty()).then_some(values.as_slice())
    }

    pub fn value(&self, segment: usize, system: usize, key: &RefKey) -> Option<f64> {
        let k = self.keys(segment)?.iter().position(|x| x == key)?;
        self.values(segment, system).map(|v| v[k])
    }

    /// Number of scored cells.
    pub fn len(&self) -> usize {
        self.rows
            .iter()
            .flatten()
            .map(|r| r.values.iter().map(Vec::len).sum::<usize>())
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Arithmetic mean over all cells.
    pub fn mean(&self) -> Option<f64> {
        let (sum, n) = self
            .rows
            .iter()
            .flatten()
            .flat_map(|r| r.values.iter().flatten())
            .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
        (n > 0).then(|| sum / n as f64)
    }

    /// Keeps only the selected references. Fails if a selected cell is
    /// missing for a segment the selection covers.
    pub fn restrict(&self, selection: &Selection) -> Result<ScoreTable> {
        if selection.per_segment.len() != self.rows.len() {
            return Err(Error::InvalidArgument(format!(
                "selection `{}` covers {} segments, table has {}",
                selection.name,
                selection.per_segment.len(),
                self.rows.len()
            )));
        }
        let picks = selection
            .per_segment
            .iter()
            .enumerate()
            .map(|(s, wanted)| {
                let missing = |key: &RefKey| Error::MissingScore {
                    system: self.system_ids.first().cloned().unwrap_or_default(),
                    segment: self.segment_ids[s].clone(),
                    reference: key.to_string(),
                };
                let row = self.rows[s].as_ref();
                wanted
                    .iter()
                    .map(|key| {
                        row.and_then(|r| r.keys.iter().position(|k| k == key))
                            .ok_or_else(|| missing(key))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(self.pick(&picks))
    }

    /// Keeps, per segment, the references at the given positions of
    /// [`Self::keys`]. Segments without a row stay empty.
    pub fn pick(&self, positions: &[Vec<usize>]) -> ScoreTable {
        let rows = self
            .rows
            .iter()
            .zip(positions)
            .map(|(row, pos)| {
                row.as_ref().map(|r| Row {
                    keys: pos.iter().map(|&k| r.keys[k].clone()).collect(),
                    values: r
                        .values
                        .iter()
                        .map(|v| {
                            if v.is_empty() {
                                Vec::new()
                            } else {
                                pos.iter().map(|&k| v[k]).collect()
                            }
                        })
                        .collect(),
                })
            })
            .collect();
        ScoreTable {
            metric: self.metric.clone(),
            system_ids: self.system_ids.clone(),
            segment_ids: self.segment_ids.clone(),
            rows,
            warnings: self.warnings.clone(),
        }
    }

    /// Cells as `(system, segment, reference, value)` in canonical order:
    /// system id, segment id, reference key.
    pub fn cells(&self) -> Vec<(&str, &str, &RefKey, f64)> {
        let mut out = Vec::with_capacity(self.len());
        for (s, row) in self.rows.iter().enumerate() {
            let Some(row) = row else { continue };
            for (y, values) in row.values.iter().enumerate() {
                for (key, &v) in row.keys.iter().zip(values) {
                    out.push((self.system_ids[y].as_str(), self.segment_ids[s].as_str(), key, v));
                }
            }
        }
        out.sort_by(|a, b| (a.0, a.1, a.2).cmp(&(b.0, b.1, b.2)));
        out
    }

    /// TSV with a `metric` column, one line per cell, canonical order.
    /// Cells in the layout [`ingest_scores`] reads back.
    pub fn to_tsv(&self) -> String {
        let mut out = format!("{SCORES_HEADER}\n");
        for (system, segment, key, value) in self.cells() {
            let _ = writeln!(out, "{system}\t{segment}\t{key}\t{value}");
        }
        out
    }

    /// The JSON sidecar naming the metric of [`ScoreTable::to_tsv`].
    pub fn sidecar_json(&self) -> String {
        let sidecar = Sidecar {
            name: self.metric.name.clone(),
            orientation: self.metric.orientation,
        };
        serde_json::to_string_pretty(&sidecar).expect("plain struct") + "\n"
    }
}

/// Scores every selected reference of every segment for every system.
/// Segments are scored in parallel; the result does not depend on the
/// thread count.
pub fn score_all(corpus: &Corpus, metric: NativeMetric, selection: &Selection) -> Result<ScoreTable> {
    if selection.per_segment.len() != corpus.segments().len() {
        return Err(Error::InvalidArgument(format!(
            "selection `{}` does not match the corpus",
            selection.name
        )));
    }
    type Scored = (Row, Vec<ScoreWarningRecord>);
    let rows: Vec<Scored> = corpus
        .segments()
        .par_iter()
        .zip(&selection.per_segment)
        .map(|(seg, keys)| -> Result<Scored> {
            let refs = keys
                .iter()
                .map(|key| match seg.reference(key) {
                    Some(r) => Ok(r),
                    None if *key == RefKey::NoReference => Err(Error::InvalidArgument(format!(
                        "{} needs a reference; selection `{}` includes `none`",
                        metric.name(),
                        selection.name
                    ))),
                    None => Err(Error::MissingScore {
                        system: String::new(),
                        segment: seg.id.clone(),
                        reference: key.to_string(),
                    }),
                })
                .collect::<Result<Vec<_>>>()?;
            let mut warnings = Vec::new();
            let mut values = Vec::with_capacity(seg.hypotheses.len());
            for (y, hyp) in seg.hypotheses.iter().enumerate() {
                let mut row = Vec::with_capacity(refs.len());
                for r in &refs {
                    let out = metric.score(hyp, &r.text).ok_or_else(|| Error::EmptyReference {
                        segment: seg.id.clone(),
                    })?;
                    if let Some(warning) = out.warning {
                        warnings.push(ScoreWarningRecord {
                            system: corpus.systems()[y].clone(),
                            segment: seg.id.clone(),
                            reference: r.key(),
                            warning,
                        });
                    }
                    row.push(out.value);
                }
                values.push(row);
            }
            Ok((
                Row {
                    keys: keys.clone(),
                    values,
                },
                warnings,
            ))
        })
        .collect::<Result<_>>()?;
    let mut warnings = Vec::new();
    let rows = rows
        .into_iter()
        .map(|(row, w)| {
            warnings.extend(w);
            Some(row)
        })
        .collect();
    Ok(ScoreTable {
        metric: metric.id(),
        system_ids: corpus.systems().to_vec(),
        segment_ids: corpus.segments().iter().map(|s| s.id.clone()).collect(),
        rows,
        warnings,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    name: String,
    orientation: super::Orientation,
}

/// Reads externally computed scores (`system_id, seg_id, ref_key, value`).
///
/// The metric name and orientation come from `metric` or, when absent, from
/// a JSON sidecar next to the file (`scores.tsv` -> `scores.json`) holding
/// `{"name": ..., "orientation": "higher" | "lower"}`. Every key must
/// resolve against the corpus, and a system scored on a segment must be
/// scored on the same references as every other system there.
pub fn ingest_scores(corpus: &Corpus, path: &Path, metric: Option<MetricId>) -> Result<ScoreTable> {
    let metric = match metric {
        Some(m) => m,
        None => {
            let sidecar = path.with_extension("json");
            if !sidecar.exists() {
                return Err(Error::InvalidArgument(format!(
                    "no metric name for {}: pass one or provide {}",
                    path.display(),
                    sidecar.display()
                )));
            }
            let s: Sidecar = serde_json::from_str(&read_to_string(&sidecar)?).map_err(|source| Error::Json {
                path: sidecar.clone(),
                source,
            })?;
            MetricId::new(s.name, s.orientation)
        }
    };

    let content = read_to_string(path)?;
    if content.trim().is_empty() {
        return Err(Error::NoScores);
    }
    let records = parse_tsv(path, &content, SCORES_HEADER)?;
    if records.is_empty() {
        return Err(Error::NoScores);
    }

    let n_systems = corpus.systems().len();
    let mut cells: Vec<BTreeMap<RefKey, Vec<Option<f64>>>> = vec![BTreeMap::new(); corpus.segments().len()];
    for rec in &records {
        let bad = |msg: String| Error::malformed(path, rec.line, msg);
        let (system, segment, key, value) = (rec.fields[0], rec.fields[1], rec.fields[2], rec.fields[3]);
        let y = corpus
            .system_index(system)
            .ok_or_else(|| bad(format!("unknown system `{system}`")))?;
        let s = corpus
            .segment_index(segment)
            .ok_or_else(|| bad(format!("unknown segment `{segment}`")))?;
        let key: RefKey = key.parse().map_err(|e: Error| bad(e.to_string()))?;
        if key != RefKey::NoReference && corpus.segments()[s].reference(&key).is_none() {
            return Err(bad(format!("unknown reference `{key}` for segment {segment}")));
        }
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| bad(format!("invalid value `{value}`")))?;
        if !v.is_finite() {
            return Err(bad(format!("non-finite value `{value}`")));
        }
        let slot = &mut cells[s].entry(key.clone()).or_insert_with(|| vec![None; n_systems])[y];
        if slot.is_some() {
            return Err(bad(format!(
                "duplicate score for system {system}, segment {segment}, reference {key}"
            )));
        }
        *slot = Some(v);
    }

    let mut rows = Vec::with_capacity(cells.len());
    for (s, by_key) in cells.into_iter().enumerate() {
        if by_key.is_empty() {
            rows.push(None);
            continue;
        }
        let keys: Vec<RefKey> = by_key.keys().cloned().collect();
        let mut values = vec![Vec::new(); n_systems];
        for (y, out) in values.iter_mut().enumerate() {
            if by_key.values().all(|v| v[y].is_none()) {
                continue;
            }
            for (key, v) in &by_key {
                out.push(v[y].ok_or_else(|| Error::MissingScore {
                    system: corpus.systems()[y].clone(),
                    segment: corpus.segments()[s].id.clone(),
                    reference: key.to_string(),
                })?);
            }
        }
        rows.push(Some(Row { keys, values }));
    }
    Ok(ScoreTable {
        metric,
        system_ids: corpus.systems().to_vec(),
        segment_ids: corpus.segments().iter().map(|s| s.id.clone()).collect(),
        rows,
        warnings: Vec::new(),
    })
}
