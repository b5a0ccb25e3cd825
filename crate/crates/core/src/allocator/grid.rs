//! Correlation of allocated reference sets and the budget x lambda grid.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::{allocate, check_budget, validate_levels, Allocation, AllocationProblem, VendorLevel};
use crate::corpus::{Level, RefKey, Selection};
use crate::error::{Error, Result};
use crate::metaeval::{mean_ci, Aggregation, CorrelationResult, Evaluator, MetricSource};
use crate::metrics::ScoreTable;
use crate::rng::derive_seed;

/// The original references of each segment's assigned levels.
fn allocation_selection(ev: &Evaluator, alloc: &Allocation) -> Result<Selection> {
    let corpus = ev.corpus();
    let position: HashMap<&str, usize> = alloc
        .segments()
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let levels = alloc
        .levels()
        .iter()
        .map(|l| l.id.parse::<Level>())
        .collect::<Result<Vec<_>>>()?;
    let mut per_segment = Vec::with_capacity(corpus.segments().len());
    for seg in corpus.segments() {
        let &s = position
            .get(seg.id.as_str())
            .ok_or_else(|| Error::InvalidArgument(format!("allocation does not cover segment {}", seg.id)))?;
        let mut keys: Vec<RefKey> = levels
            .iter()
            .enumerate()
            .filter(|&(l, _)| alloc.contains(l, s))
            .map(|(_, &level)| RefKey::original(level))
            .collect();
        if let Some(k) = keys.iter().find(|k| seg.reference(k).is_none()) {
            return Err(Error::InvalidArgument(format!(
                "level {k} has no reference for segment {}",
                seg.id
            )));
        }
        if keys.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "segment {} has no assigned level",
                seg.id
            )));
        }
        keys.sort();
        per_segment.push(keys);
    }
    Ok(Selection::new("allocation", per_segment))
}

/// Correlation with each segment's allocated references, averaged.
pub fn evaluate_allocation(ev: &Evaluator, source: &MetricSource, alloc: &Allocation) -> Result<CorrelationResult> {
    let selection = allocation_selection(ev, alloc)?;
    ev.correlate_selection(source, &selection, Aggregation::Avg)
}

fn evaluate_with_table(ev: &Evaluator, table: &ScoreTable, alloc: &Allocation) -> Result<f64> {
    let selection = allocation_selection(ev, alloc)?;
    Ok(ev
        .correlate_table(&table.restrict(&selection)?, "allocation", Aggregation::Avg)?
        .tau())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridConfig {
    pub levels: Vec<VendorLevel>,
    pub budgets: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub temperature: f64,
    pub patience: usize,
    pub seeds_per_cell: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub budget: f64,
    pub lambda: f64,
    pub mean_tau: f64,
    pub mean_refs_per_segment: f64,
    /// Best mean tau for this budget (first lambda on ties).
    pub argmax: bool,
    pub taus: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridResult {
    pub metric: String,
    /// Budget-major order.
    pub cells: Vec<GridCell>,
}

pub const GRID_HEADER: &str = "budget\tlambda\tmean_tau\tmean_refs_per_segment\targmax_flag";

impl GridResult {
    pub fn to_tsv(&self) -> String {
        let mut out = format!("{GRID_HEADER}\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                c.budget,
                c.lambda,
                c.mean_tau,
                c.mean_refs_per_segment,
                u8::from(c.argmax)
            );
        }
        out
    }

    pub fn cell(&self, budget: f64, lambda: f64) -> Option<&GridCell> {
        self.cells.iter().find(|c| c.budget == budget && c.lambda == lambda)
    }
}

/// Allocates and evaluates every (budget, lambda) cell over several seeds.
/// Cells run in parallel; each repetition's seed derives from the base seed
/// and the cell coordinates.
pub fn grid_experiment(ev: &Evaluator, source: &MetricSource, config: &GridConfig) -> Result<GridResult> {
    validate_levels(&config.levels)?;
    if config.seeds_per_cell == 0 {
        return Err(Error::InvalidArgument("seeds per cell must be positive".into()));
    }
    if config.budgets.is_empty() || config.lambdas.is_empty() {
        return Err(Error::InvalidArgument("empty budget or lambda grid".into()));
    }
    let corpus = ev.corpus();
    let segments: Vec<String> = corpus.segments().iter().map(|s| s.id.clone()).collect();
    for &b in &config.budgets {
        check_budget(b, segments.len(), &config.levels)?;
    }

    let full = Allocation::from_members(
        &segments,
        config.levels.clone(),
        vec![vec![true; segments.len()]; config.levels.len()],
    );
    let table = source.scores(corpus, &allocation_selection(ev, &full)?)?;

    let coords: Vec<(usize, usize)> = (0..config.budgets.len())
        .flat_map(|b| (0..config.lambdas.len()).map(move |l| (b, l)))
        .collect();
    let mut cells = coords
        .par_iter()
        .map(|&(b, l)| -> Result<GridCell> {
            let mut taus = Vec::with_capacity(config.seeds_per_cell);
            let mut refs = 0.0;
            for rep in 0..config.seeds_per_cell {
                let problem = AllocationProblem {
                    segments: segments.clone(),
                    levels: config.levels.clone(),
                    budget: config.budgets[b],
                    lambda: config.lambdas[l],
                    temperature: config.temperature,
                    patience: config.patience,
                    seed: derive_seed(config.seed, &[b as u64, l as u64, rep as u64]),
                };
                let (alloc, _) = allocate(&problem)?;
                taus.push(evaluate_with_table(ev, &table, &alloc)?);
                refs += alloc.refs_per_segment();
            }
            Ok(GridCell {
                budget: config.budgets[b],
                lambda: config.lambdas[l],
                mean_tau: mean_ci(&taus).0,
                mean_refs_per_segment: refs / config.seeds_per_cell as f64,
                argmax: false,
                taus,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    for row in cells.chunks_mut(config.lambdas.len()) {
        let best = row
            .iter()
            .enumerate()
            .fold(0, |best, (i, c)| if c.mean_tau > row[best].mean_tau { i } else { best });
        row[best].argmax = true;
    }
    Ok(GridResult {
        metric: source.id().name,
        cells,
    })
}
