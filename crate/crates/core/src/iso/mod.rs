//! Heuristic sub-graph matching of an observed planogram into a reference one.
//!
//! The solver repeatedly runs a greedy pass seeded by the best remaining
//! hypothesis, keeps the most confident solution, and removes the seed so the
//! next pass starts from a different pairing. Passes that provably cannot beat
//! the incumbent are cut short.

mod confidence;
mod hypothesis;
mod search;

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{ObservedPlanogram, ReferencePlanogram, ShelfGraph, Solution};

pub use confidence::confidence;
pub(crate) use confidence::{confidence_of, ObservedLayout};
pub use hypothesis::{coherence_score, create_hypotheses, HypothesisSet};
pub use search::{bound, find_solution, find_solution_traced, FoundSolution, SearchState};

use search::Search;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("no hypotheses to search")]
    NoHypotheses,
    #[error("no hypothesis scores at least tau = {0}")]
    BelowThreshold(f64),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("no reference planograms given")]
    NoReferences,
    #[error("invalid solver parameter: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverParams {
    /// Minimum hypothesis score for acceptance.
    pub tau: f64,
    /// Confidence lost per displaced pair of observed components.
    pub lambda_penalty: f64,
    /// Branch-and-bound cut-offs. Disabling them never changes the result.
    pub pruning: bool,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self { tau: 0.25, lambda_penalty: 1.0, pruning: true }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(0.0..=1.0).contains(&self.tau) {
            return Err(SolveError::InvalidParams(format!("tau must be in [0, 1], got {}", self.tau)));
        }
        if !(self.lambda_penalty >= 0.0) {
            return Err(SolveError::InvalidParams(format!("lambda must be >= 0, got {}", self.lambda_penalty)));
        }
        Ok(())
    }
}

/// Bounding rectangle of matched reference grid positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridExtent {
    pub min_row: i32,
    pub min_col: i32,
    pub max_row: i32,
    pub max_col: i32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub hypotheses: usize,
    pub passes: usize,
    pub abandoned: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    pub solution: Solution,
    pub consistent_obs_nodes: BTreeSet<String>,
    pub missing_ref_nodes: BTreeSet<String>,
    pub localization: Option<GridExtent>,
    pub stats: SearchStats,
}

impl MatchResult {
    pub fn confidence(&self) -> f64 {
        self.solution.confidence
    }

    fn from_solution(solution: Solution, reference: &ReferencePlanogram, stats: SearchStats) -> Self {
        let consistent_obs_nodes = solution.assignments().iter().map(|a| a.obs_node.clone()).collect();
        let matched: BTreeSet<&str> = solution.assignments().iter().map(|a| a.ref_node.as_str()).collect();
        let missing_ref_nodes = reference
            .nodes()
            .iter()
            .filter(|n| !matched.contains(n.node_id.as_str()))
            .map(|n| n.node_id.clone())
            .collect();
        let localization = localize(&solution, reference);
        Self { solution, consistent_obs_nodes, missing_ref_nodes, localization, stats }
    }
}

pub(crate) fn localize(solution: &Solution, reference: &ReferencePlanogram) -> Option<GridExtent> {
    let mut positions = solution
        .assignments()
        .iter()
        .filter_map(|a| reference.index_of(&a.ref_node))
        .map(|r| reference.grid_pos(r));
    let first = positions.next()?;
    let init = GridExtent { min_row: first.row, min_col: first.col, max_row: first.row, max_col: first.col };
    Some(positions.fold(init, |e, p| GridExtent {
        min_row: e.min_row.min(p.row),
        min_col: e.min_col.min(p.col),
        max_row: e.max_row.max(p.row),
        max_col: e.max_col.max(p.col),
    }))
}

/// Match `observed` into `reference`.
///
/// Never fails on data: with no usable hypotheses the result has an empty
/// solution and every reference node missing.
pub fn solve(
    reference: &ReferencePlanogram,
    observed: &ObservedPlanogram,
    params: &SolverParams,
) -> Result<MatchResult, SolveError> {
    params.validate()?;
    let hyps = create_hypotheses(reference, observed);
    let mut stats = SearchStats { hypotheses: hyps.len(), ..Default::default() };
    let search = Search::new(&hyps, reference, observed, params);

    let mut pool = vec![true; hyps.len()];
    let mut remaining = hyps.len();
    let mut c_max = 0.0;
    let mut best = Solution::empty();

    while remaining > 0 {
        if params.pruning && search.pool_bound(&pool, 0) <= c_max {
            break;
        }
        let Some(raw) = search.run(&pool, c_max, None) else { break };
        stats.passes += 1;
        if raw.abandoned {
            stats.abandoned += 1;
        }
        if raw.confidence > c_max {
            let found = search.finish(&raw);
            c_max = found.confidence;
            best = found.solution;
        }
        let seed = raw.picks[0].0;
        pool[seed] = false;
        remaining -= 1;
    }

    Ok(MatchResult::from_solution(best, reference, stats))
}

/// Match `observed` against several references (e.g. one per aisle) and keep
/// the most confident; ties go to the lowest index.
pub fn solve_multi(
    references: &[ReferencePlanogram],
    observed: &ObservedPlanogram,
    params: &SolverParams,
) -> Result<(usize, MatchResult), SolveError> {
    if references.is_empty() {
        return Err(SolveError::NoReferences);
    }
    let results = references
        .par_iter()
        .map(|r| solve(r, observed, params))
        .collect::<Result<Vec<_>, _>>()?;
    let mut best = 0;
    for (i, r) in results.iter().enumerate().skip(1) {
        if r.confidence() > results[best].confidence() {
            best = i;
        }
    }
    let result = results.into_iter().nth(best).expect("index in range");
    Ok((best, result))
}
