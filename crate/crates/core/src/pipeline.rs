//! The three checking stages glued together: graph building, matching
//! against the reference planogram(s), verification of what is missing.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::builder::{build_observed, BuildError, BuilderParams};
use crate::eval::Stage;
use crate::iso::{solve, solve_multi, MatchResult, SolveError, SolverParams};
use crate::model::{Detection, ObservedPlanogram, ReferencePlanogram, ShelfGraph};
use crate::verify::{verify_all, Matcher, VerifyError, VerifyOutcome, VerifyParams};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineParams {
    pub builder: BuilderParams,
    pub solver: SolverParams,
    pub verify: VerifyParams,
}

/// Wall-clock milliseconds per stage.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub build_ms: f64,
    pub isomorphism_ms: f64,
    pub verify_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    /// Index of the reference that matched best (0 with a single reference).
    pub reference_index: usize,
    pub detections: Vec<Detection>,
    pub observed: ObservedPlanogram,
    pub matched: MatchResult,
    pub verification: VerifyOutcome,
    pub timings: Timings,
}

impl PipelineOutput {
    /// The detections that survive up to `stage`.
    pub fn stage_detections(&self, stage: Stage) -> Vec<Detection> {
        match stage {
            Stage::Detection => self.detections.clone(),
            Stage::Consistency => nodes_in(&self.observed, self.matched.solution.assignments().iter().map(|a| &a.obs_node)),
            Stage::Verification => nodes_in(
                &self.verification.observed,
                self.verification.solution.assignments().iter().map(|a| &a.obs_node),
            ),
        }
    }
}

fn nodes_in<'a>(observed: &ObservedPlanogram, ids: impl Iterator<Item = &'a String>) -> Vec<Detection> {
    ids.filter_map(|id| observed.index_of(id)).map(|ix| observed.node(ix).detection.clone()).collect()
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1000.0
}

/// Run all stages on one image's detections.
///
/// With several references the best-matching one is used for verification.
pub fn run_pipeline(
    references: &[ReferencePlanogram],
    detections: &[Detection],
    matcher: &dyn Matcher,
    params: &PipelineParams,
) -> Result<PipelineOutput, PipelineError> {
    if references.is_empty() {
        return Err(SolveError::NoReferences.into());
    }
    let start = Instant::now();
    let observed = build_observed(detections, &params.builder)?;
    let build_ms = ms(start);

    let t = Instant::now();
    let (reference_index, matched) = if references.len() == 1 {
        (0, solve(&references[0], &observed, &params.solver)?)
    } else {
        solve_multi(references, &observed, &params.solver)?
    };
    let isomorphism_ms = ms(t);

    let t = Instant::now();
    let verification = verify_all(&references[reference_index], &observed, &matched, matcher, &params.verify)?;
    let verify_ms = ms(t);

    Ok(PipelineOutput {
        reference_index,
        detections: detections.to_vec(),
        observed,
        matched,
        verification,
        timings: Timings { build_ms, isomorphism_ms, verify_ms, total_ms: ms(start) },
    })
}
