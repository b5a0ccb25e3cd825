//! Budgeted allocation of source segments to reference vendor levels.
//!
//! Every segment starts at the cheapest level. Each step then either adds a
//! reference (a segment at a level it lacks) or, with probability `lambda`,
//! promotes a segment from a lower-utility level to a higher-utility one.
//! Candidates are drawn with weight `sigmoid(utility - cost)^(1/t)` for the
//! destination and `sigmoid(cost - utility)^(1/t)` for the promoted-from
//! level. Steps that would exceed the budget are rejected and count against
//! the patience; the run ends when the budget is spent, patience runs out or
//! every segment sits at every level.

mod exact;
mod grid;

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::io::read_to_string;
use crate::error::{Error, Result};
use crate::rng::rng;

pub use exact::{brute_force_allocate, MAX_EXACT_LEVELS, MAX_EXACT_SEGMENTS};
pub use grid::{evaluate_allocation, grid_experiment, GridCell, GridConfig, GridResult, GRID_HEADER};

pub const DEFAULT_PATIENCE: usize = 1000;
pub const DEFAULT_TEMPERATURE: f64 = 1.0;

/// A reference vendor with a per-segment price and an observed usefulness
/// of its references for evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VendorLevel {
    pub id: String,
    pub cost: f64,
    pub utility: f64,
}

impl VendorLevel {
    pub fn new(id: impl Into<String>, cost: f64, utility: f64) -> Self {
        VendorLevel {
            id: id.into(),
            cost,
            utility,
        }
    }
}

/// The four vendor levels of the study: costs 1, 1, 2, 3 and utilities
/// 1, 2, 4, 3 for `R1`..`R4`.
pub fn default_levels() -> Vec<VendorLevel> {
    vec![
        VendorLevel::new("R1", 1.0, 1.0),
        VendorLevel::new("R2", 1.0, 2.0),
        VendorLevel::new("R3", 2.0, 4.0),
        VendorLevel::new("R4", 3.0, 3.0),
    ]
}

fn default_temperature() -> f64 {
    DEFAULT_TEMPERATURE
}

fn default_patience() -> usize {
    DEFAULT_PATIENCE
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllocationProblem {
    pub segments: Vec<String>,
    pub levels: Vec<VendorLevel>,
    pub budget: f64,
    pub lambda: f64,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default)]
    pub seed: u64,
}

/// Slack for float cost sums.
fn tolerance(budget: f64) -> f64 {
    1e-9 * budget.abs().max(1.0)
}

pub(crate) fn validate_levels(levels: &[VendorLevel]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::InvalidArgument("no vendor levels".into()));
    }
    for (i, l) in levels.iter().enumerate() {
        if !(l.cost.is_finite() && l.cost > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "level {} has non-positive cost {}",
                l.id, l.cost
            )));
        }
        if !(l.utility.is_finite() && l.utility > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "level {} has non-positive utility {}",
                l.id, l.utility
            )));
        }
        if levels[..i].iter().any(|o| o.id == l.id) {
            return Err(Error::InvalidArgument(format!("duplicate level {}", l.id)));
        }
    }
    Ok(())
}

pub(crate) fn validate_segments(segments: &[String]) -> Result<()> {
    if segments.is_empty() {
        return Err(Error::NoSegments);
    }
    let mut sorted: Vec<&String> = segments.iter().collect();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument(format!("duplicate segment {}", w[0])));
    }
    Ok(())
}

/// Cheapest possible full coverage.
pub fn minimum_budget(segments: usize, levels: &[VendorLevel]) -> f64 {
    segments as f64 * levels.iter().map(|l| l.cost).fold(f64::INFINITY, f64::min)
}

pub(crate) fn check_budget(budget: f64, segments: usize, levels: &[VendorLevel]) -> Result<()> {
    let required = minimum_budget(segments, levels);
    if !budget.is_finite() || budget < required - tolerance(required) {
        return Err(Error::BudgetBelowCoverage { budget, required });
    }
    Ok(())
}

impl AllocationProblem {
    pub fn new(segments: Vec<String>, levels: Vec<VendorLevel>, budget: f64) -> Self {
        AllocationProblem {
            segments,
            levels,
            budget,
            lambda: 0.5,
            temperature: DEFAULT_TEMPERATURE,
            patience: DEFAULT_PATIENCE,
            seed: 0,
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        serde_json::from_str(&read_to_string(path)?).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> Result<()> {
        validate_segments(&self.segments)?;
        validate_levels(&self.levels)?;
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidArgument(format!("lambda {} outside [0, 1]", self.lambda)));
        }
        if !(self.temperature.is_finite() && self.temperature > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "temperature must be positive, got {}",
                self.temperature
            )));
        }
        if self.patience == 0 {
            return Err(Error::InvalidArgument("patience must be positive".into()));
        }
        check_budget(self.budget, self.segments.len(), &self.levels)
    }
}

/// Which segments hold a reference from which level. Levels are kept in
/// ascending cost order (ties keep input order).
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    segments: Vec<String>,
    levels: Vec<VendorLevel>,
    /// `members[level][segment]`
    members: Vec<Vec<bool>>,
}

pub(crate) fn sorted_levels(levels: &[VendorLevel]) -> Vec<VendorLevel> {
    let mut sorted = levels.to_vec();
    sorted.sort_by(|a, b| a.cost.total_cmp(&b.cost));
    sorted
}

impl Allocation {
    /// Every segment at the cheapest level only.
    pub fn cheapest(segments: &[String], levels: &[VendorLevel]) -> Self {
        let levels = sorted_levels(levels);
        let mut members = vec![vec![false; segments.len()]; levels.len()];
        members[0].iter_mut().for_each(|m| *m = true);
        Allocation {
            segments: segments.to_vec(),
            levels,
            members,
        }
    }

    pub(crate) fn from_members(segments: &[String], levels: Vec<VendorLevel>, members: Vec<Vec<bool>>) -> Self {
        Allocation {
            segments: segments.to_vec(),
            levels,
            members,
        }
    }

    pub fn segments(&self) -> &[String] {
        &self.segments
    }

    pub fn levels(&self) -> &[VendorLevel] {
        &self.levels
    }

    pub fn contains(&self, level: usize, segment: usize) -> bool {
        self.members[level][segment]
    }

    /// Segment ids assigned to a level id, in segment order.
    pub fn segments_at(&self, level_id: &str) -> Vec<&str> {
        let Some(l) = self.levels.iter().position(|l| l.id == level_id) else {
            return Vec::new();
        };
        self.segments
            .iter()
            .zip(&self.members[l])
            .filter(|(_, &m)| m)
            .map(|(s, _)| s.as_str())
            .collect()
    }

    /// Level ids assigned to a segment position, in level order.
    pub fn levels_of(&self, segment: usize) -> Vec<&str> {
        self.levels
            .iter()
            .zip(&self.members)
            .filter(|(_, m)| m[segment])
            .map(|(l, _)| l.id.as_str())
            .collect()
    }

    pub fn reference_count(&self) -> usize {
        self.members.iter().flatten().filter(|&&m| m).count()
    }

    pub fn refs_per_segment(&self) -> f64 {
        self.reference_count() as f64 / self.segments.len() as f64
    }

    pub fn cost(&self) -> f64 {
        self.levels
            .iter()
            .zip(&self.members)
            .map(|(l, m)| m.iter().filter(|&&x| x).count() as f64 * l.cost)
            .sum()
    }

    pub fn utility(&self) -> f64 {
        self.levels
            .iter()
            .zip(&self.members)
            .map(|(l, m)| m.iter().filter(|&&x| x).count() as f64 * l.utility)
            .sum()
    }

    /// Coverage and budget; per-level uniqueness holds by construction.
    pub fn check(&self, budget: f64) -> Result<()> {
        for (s, id) in self.segments.iter().enumerate() {
            if !self.members.iter().any(|m| m[s]) {
                return Err(Error::Inconsistent(format!("segment {id} has no reference")));
            }
        }
        let cost = self.cost();
        if cost > budget + tolerance(budget) {
            return Err(Error::Inconsistent(format!(
                "allocation cost {cost} exceeds budget {budget}"
            )));
        }
        Ok(())
    }

    fn apply(&mut self, tx: Transaction) -> Result<()> {
        match tx {
            Transaction::Add { segment, level } => self.set(level, segment, true),
            Transaction::Promote { segment, from, to } => {
                if self.levels[from].utility >= self.levels[to].utility {
                    return Err(Error::Inconsistent(format!(
                        "promotion from {} to {} does not raise utility",
                        self.levels[from].id, self.levels[to].id
                    )));
                }
                self.set(to, segment, true)?;
                self.set(from, segment, false)
            }
        }
    }

    fn set(&mut self, level: usize, segment: usize, value: bool) -> Result<()> {
        let slot = self
            .members
            .get_mut(level)
            .and_then(|m| m.get_mut(segment))
            .ok_or_else(|| Error::Inconsistent(format!("no level {level} or segment {segment}")))?;
        if *slot == value {
            return Err(Error::Inconsistent(format!(
                "segment {} is {} level {}",
                self.segments[segment],
                if value { "already at" } else { "not at" },
                self.levels[level].id
            )));
        }
        *slot = value;
        Ok(())
    }

    /// `level, seg_id` lines in level then segment order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("level\tseg_id\n");
        for (l, m) in self.levels.iter().zip(&self.members) {
            for (s, _) in self.segments.iter().zip(m).filter(|(_, &x)| x) {
                let _ = writeln!(out, "{}\t{s}", l.id);
            }
        }
        out
    }
}

/// A committed step; indices refer to [`Allocation::segments`] and
/// [`Allocation::levels`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transaction {
    Add { segment: usize, level: usize },
    Promote { segment: usize, from: usize, to: usize },
}

impl Transaction {
    fn cost_delta(self, levels: &[VendorLevel]) -> f64 {
        match self {
            Transaction::Add { level, .. } => levels[level].cost,
            Transaction::Promote { from, to, .. } => levels[to].cost - levels[from].cost,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub transaction: Transaction,
    pub cost_after: f64,
    pub utility_after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    /// No budget left above the current cost.
    BudgetReached,
    /// The allowed number of rejected attempts was used up.
    PatienceExhausted,
    /// Every segment already sits at every level.
    CandidatesExhausted,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AllocationTrace {
    pub steps: Vec<TraceStep>,
    pub rejected: usize,
    pub final_cost: f64,
    pub final_utility: f64,
    pub stop: StopReason,
}

pub const TRACE_HEADER: &str = "step\taction\tseg_id\tlevel_from\tlevel_to\tcost_after\tutility_after";

impl AllocationTrace {
    /// Rebuilds the final allocation from the cheapest start.
    pub fn replay(&self, problem: &AllocationProblem) -> Result<Allocation> {
        let mut alloc = Allocation::cheapest(&problem.segments, &problem.levels);
        for step in &self.steps {
            alloc.apply(step.transaction)?;
        }
        Ok(alloc)
    }

    pub fn promotions(&self) -> usize {
        self.steps
            .iter()
            .filter(|s| matches!(s.transaction, Transaction::Promote { .. }))
            .count()
    }

    pub fn to_tsv(&self, alloc: &Allocation) -> String {
        let mut out = format!("{TRACE_HEADER}\n");
        let (segs, levels) = (alloc.segments(), alloc.levels());
        for (i, step) in self.steps.iter().enumerate() {
            let (action, seg, from, to) = match step.transaction {
                Transaction::Add { segment, level } => ("add", segment, "", &levels[level].id),
                Transaction::Promote { segment, from, to } => {
                    ("promote", segment, levels[from].id.as_str(), &levels[to].id)
                }
            };
            let _ = writeln!(
                out,
                "{}\t{action}\t{}\t{from}\t{to}\t{}\t{}",
                i + 1,
                segs[seg],
                step.cost_after,
                step.utility_after
            );
        }
        out
    }
}

/// `ln(sigmoid(z))`, stable for large |z|.
fn log_sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        -(-z).exp().ln_1p()
    } else {
        z - z.exp().ln_1p()
    }
}

/// Draws an index with probability proportional to `exp(log_weights)`.
fn sample_log_weighted<R: Rng>(log_weights: &[(usize, f64)], rng: &mut R) -> usize {
    let max = log_weights.iter().map(|w| w.1).fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_weights.iter().map(|w| (w.1 - max).exp()).collect();
    let mut r = rng.random::<f64>() * weights.iter().sum::<f64>();
    for (w, &(i, _)) in weights.iter().zip(log_weights) {
        if r < *w {
            return i;
        }
        r -= w;
    }
    log_weights[log_weights.len() - 1].0
}

/// Draws a (segment, level) pair the segment does not hold yet. Every pair
/// at a level shares that level's weight.
fn sample_destination<R: Rng>(alloc: &Allocation, temperature: f64, rng: &mut R) -> Option<(usize, usize)> {
    let candidates: Vec<(usize, f64)> = alloc
        .levels
        .iter()
        .zip(&alloc.members)
        .enumerate()
        .filter_map(|(l, (level, m))| {
            let open = m.iter().filter(|&&x| !x).count();
            (open > 0).then(|| {
                (
                    l,
                    (open as f64).ln() + log_sigmoid(level.utility - level.cost) / temperature,
                )
            })
        })
        .collect();
    if candidates.is_empty() {
        return None;
    }
    let level = sample_log_weighted(&candidates, rng);
    let open: Vec<usize> = (0..alloc.segments.len())
        .filter(|&s| !alloc.members[level][s])
        .collect();
    Some((open[rng.random_range(0..open.len())], level))
}

/// Runs the stochastic allocator.
pub fn allocate(problem: &AllocationProblem) -> Result<(Allocation, AllocationTrace)> {
    problem.validate()?;
    let budget = problem.budget;
    let tol = tolerance(budget);
    let mut alloc = Allocation::cheapest(&problem.segments, &problem.levels);
    let mut rng = rng(problem.seed);
    let mut steps = Vec::new();
    let mut rejected = 0usize;

    let stop = loop {
        let cost = alloc.cost();
        if cost >= budget - tol {
            break StopReason::BudgetReached;
        }
        if rejected >= problem.patience {
            break StopReason::PatienceExhausted;
        }
        let promote = rng.random::<f64>() < problem.lambda;
        let Some((segment, to)) = sample_destination(&alloc, problem.temperature, &mut rng) else {
            break StopReason::CandidatesExhausted;
        };
        let tx = if promote {
            let target = alloc.levels[to].utility;
            let sources: Vec<(usize, f64)> = alloc
                .levels
                .iter()
                .enumerate()
                .filter(|&(l, level)| alloc.members[l][segment] && level.utility < target)
                .map(|(l, level)| (l, log_sigmoid(level.cost - level.utility) / problem.temperature))
                .collect();
            if sources.is_empty() {
                rejected += 1;
                continue;
            }
            Transaction::Promote {
                segment,
                from: sample_log_weighted(&sources, &mut rng),
                to,
            }
        } else {
            Transaction::Add { segment, level: to }
        };
        if cost + tx.cost_delta(&alloc.levels) > budget + tol {
            rejected += 1;
            continue;
        }
        alloc.apply(tx)?;
        steps.push(TraceStep {
            transaction: tx,
            cost_after: alloc.cost(),
            utility_after: alloc.utility(),
        });
    };

    let trace = AllocationTrace {
        steps,
        rejected,
        final_cost: alloc.cost(),
        final_utility: alloc.utility(),
        stop,
    };
    Ok((alloc, trace))
}
