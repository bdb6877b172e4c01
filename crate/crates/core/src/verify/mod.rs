//! Product verification: look for each unmatched reference facing where its
//! matched neighbors say it should be, and either add it to the observed
//! planogram or report a compliance issue.

mod proposal;
mod zncc;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::iso::MatchResult;
use crate::model::{
    iou, Assignment, BBox, Detection, Direction, ModelError, ObservedNode, ObservedPlanogram, Point, ProductId,
    ReferencePlanogram, ShelfGraph, Solution,
};

pub use proposal::{Matcher, NoMatcher, OracleMatcher, Proposal, ProposalQuery};
pub use zncc::{zncc, zncc_at, zncc_match, ZnccMatcher, DEFAULT_SCALES};

/// Prefix of the ids given to observed nodes created by verification.
pub const VERIFIED_PREFIX: &str = "verify:";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("target {0:?} has no matched neighbors")]
    Unconstrained(String),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("invalid verification parameter: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifyParams {
    /// ROI enlargement per side, as a fraction of the expected item size.
    pub roi_margin: f64,
    pub accept_threshold: f64,
    pub overlap_iou_max: f64,
}

impl Default for VerifyParams {
    fn default() -> Self {
        Self { roi_margin: 0.5, accept_threshold: 0.5, overlap_iou_max: 0.3 }
    }
}

impl VerifyParams {
    pub fn validate(&self) -> Result<(), VerifyError> {
        if !(self.roi_margin >= 0.0 && self.roi_margin.is_finite()) {
            return Err(VerifyError::InvalidParams(format!("roi_margin must be >= 0, got {}", self.roi_margin)));
        }
        if !(0.0..=1.0).contains(&self.accept_threshold) {
            return Err(VerifyError::InvalidParams(format!(
                "accept_threshold must be in [0, 1], got {}",
                self.accept_threshold
            )));
        }
        if !(0.0..=1.0).contains(&self.overlap_iou_max) {
            return Err(VerifyError::InvalidParams(format!(
                "overlap_iou_max must be in [0, 1], got {}",
                self.overlap_iou_max
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IssueReason {
    NoProposals,
    AllOverlapping,
    BestScoreBelowThreshold,
}

impl std::fmt::Display for IssueReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            IssueReason::NoProposals => "no-proposals",
            IssueReason::AllOverlapping => "all-overlapping",
            IssueReason::BestScoreBelowThreshold => "best-score-below-threshold",
        })
    }
}

/// A planned facing that could be neither matched nor verified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplianceIssue {
    pub ref_node: String,
    pub expected_product: ProductId,
    /// `None` when no matched neighbor constrains where the item should be.
    pub expected_roi: Option<BBox>,
    pub reason: IssueReason,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub best_score: Option<f64>,
}

fn assigned_neighbors<'a>(
    target: usize,
    solution: &'a Solution,
    reference: &'a ReferencePlanogram,
) -> impl Iterator<Item = (Direction, usize, &'a str)> + 'a {
    Direction::ALL.into_iter().filter_map(move |d| {
        let rn = reference.neighbor(target, d)?;
        let on = solution.obs_for(reference.node_id(rn))?;
        Some((d, rn, on))
    })
}

/// The missing facing with the most matched neighbors; ties go to the
/// smallest id. `None` when `missing` is empty.
pub fn select_target(missing: &BTreeSet<String>, solution: &Solution, reference: &ReferencePlanogram) -> Option<String> {
    let mut best: Option<(&String, usize)> = None;
    for id in missing {
        let count = reference.index_of(id).map_or(0, |ix| assigned_neighbors(ix, solution, reference).count());
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((id, count));
        }
    }
    best.map(|(id, _)| id.clone())
}

/// Where the missing facing `target` should appear in the image.
///
/// Each matched neighbor in direction `d` votes for its own center moved by
/// the mean observed edge length towards `opposite(d)`; the votes are
/// averaged. The size is the neighbors' pixel size, rescaled by metric size
/// ratios when both are known, enlarged by `roi_margin` on each side.
pub fn estimate_roi(
    target: &str,
    solution: &Solution,
    reference: &ReferencePlanogram,
    observed: &ObservedPlanogram,
    params: &VerifyParams,
) -> Result<BBox, VerifyError> {
    let t = reference.index_of(target).ok_or_else(|| VerifyError::UnknownNode(target.to_string()))?;
    let neighbors: Vec<(Direction, usize, usize)> = assigned_neighbors(t, solution, reference)
        .map(|(d, rn, on)| {
            observed.index_of(on).map(|o| (d, rn, o)).ok_or_else(|| VerifyError::UnknownNode(on.to_string()))
        })
        .collect::<Result<_, _>>()?;
    if neighbors.is_empty() {
        return Err(VerifyError::Unconstrained(target.to_string()));
    }

    let n = neighbors.len() as f64;
    let step = observed.mean_edge_length().unwrap_or_else(|| {
        neighbors.iter().map(|&(_, _, o)| (observed.bbox(o).w + observed.bbox(o).h) / 2.0).sum::<f64>() / n
    });
    let (mut cx, mut cy) = (0.0, 0.0);
    for &(d, _, o) in &neighbors {
        let c = observed.bbox(o).center();
        let (ux, uy) = d.opposite().unit();
        cx += c.x + ux * step;
        cy += c.y + uy * step;
    }

    let target_metric = reference.metric_size(t);
    let (mut w, mut h) = (0.0, 0.0);
    for &(_, rn, o) in &neighbors {
        let b = observed.bbox(o);
        match (target_metric, reference.metric_size(rn)) {
            (Some(tm), Some(nm)) => {
                w += b.w * tm.width_mm / nm.width_mm;
                h += b.h * tm.height_mm / nm.height_mm;
            }
            _ => {
                w += b.w;
                h += b.h;
            }
        }
    }
    let grow = 1.0 + 2.0 * params.roi_margin;
    Ok(BBox::centered(Point::new(cx / n, cy / n), w / n * grow, h / n * grow)?)
}

/// Mean of a position term (1 at the ROI center, 0 at half its diagonal or
/// beyond) and the raw score normalized by `declared_max`, or by the largest
/// raw score among `proposals` when undeclared (1 if that is 0).
pub fn score_proposal(p: &Proposal, roi: &BBox, proposals: &[Proposal], declared_max: Option<f64>) -> f64 {
    let half_diag = roi.diagonal() / 2.0;
    let dist = p.bbox.center().distance(&roi.center());
    let position = if half_diag > 0.0 { (1.0 - dist / half_diag).max(0.0) } else { 0.0 };
    let norm = declared_max.unwrap_or_else(|| proposals.iter().map(|q| q.raw_score).fold(0.0, f64::max));
    let norm = if norm > 0.0 { norm } else { 1.0 };
    let confidence = (p.raw_score / norm).clamp(0.0, 1.0);
    (position + confidence) / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOutcome {
    pub observed: ObservedPlanogram,
    pub solution: Solution,
    pub issues: Vec<ComplianceIssue>,
    /// Assignments added by verification, in acceptance order.
    pub verified: Vec<Assignment>,
}

enum Step {
    Accept(Proposal, f64),
    Issue(IssueReason, Option<f64>),
}

/// Resolve every reference facing left unmatched by `matched`: each ends up
/// either assigned to a newly accepted proposal or reported in exactly one
/// compliance issue.
pub fn verify_all(
    reference: &ReferencePlanogram,
    observed: &ObservedPlanogram,
    matched: &MatchResult,
    matcher: &dyn Matcher,
    params: &VerifyParams,
) -> Result<VerifyOutcome, VerifyError> {
    params.validate()?;
    let mut observed = observed.clone();
    let mut solution = matched.solution.clone();
    let mut pending: BTreeSet<String> = reference
        .nodes()
        .iter()
        .filter(|n| solution.obs_for(&n.node_id).is_none())
        .map(|n| n.node_id.clone())
        .collect();
    let mut issues = Vec::new();
    let mut verified = Vec::new();

    while let Some(target) = select_target(&pending, &solution, reference) {
        let t = reference.index_of(&target).expect("pending ids come from the reference");
        if assigned_neighbors(t, &solution, reference).next().is_none() {
            // Nothing constrains the remaining targets any more.
            for id in std::mem::take(&mut pending) {
                let ix = reference.index_of(&id).expect("reference id");
                issues.push(ComplianceIssue {
                    ref_node: id,
                    expected_product: reference.product(ix).clone(),
                    expected_roi: None,
                    reason: IssueReason::NoProposals,
                    best_score: None,
                });
            }
            break;
        }
        pending.remove(&target);

        let roi = estimate_roi(&target, &solution, reference, &observed, params)?;
        let product = reference.product(t).clone();
        let query = ProposalQuery { ref_node: &target, product: &product, roi };
        let proposals: Vec<Proposal> =
            matcher.find_proposals(&query).into_iter().filter(|p| p.bbox.intersects(&roi)).collect();

        let step = if proposals.is_empty() {
            Step::Issue(IssueReason::NoProposals, None)
        } else {
            let taken: Vec<BBox> = solution
                .assignments()
                .iter()
                .filter_map(|a| observed.index_of(&a.obs_node))
                .map(|o| *observed.bbox(o))
                .collect();
            let free: Vec<&Proposal> = proposals
                .iter()
                .filter(|p| taken.iter().all(|b| iou(&p.bbox, b) <= params.overlap_iou_max))
                .collect();
            let best = free
                .iter()
                .map(|p| (**p, score_proposal(p, &roi, &proposals, matcher.max_raw_score())))
                .fold(None, |acc: Option<(Proposal, f64)>, (p, s)| match acc {
                    Some((_, bs)) if bs >= s => acc,
                    _ => Some((p, s)),
                });
            match best {
                None => Step::Issue(IssueReason::AllOverlapping, None),
                Some((p, s)) if s >= params.accept_threshold => Step::Accept(p, s),
                Some((_, s)) => Step::Issue(IssueReason::BestScoreBelowThreshold, Some(s)),
            }
        };

        match step {
            Step::Accept(p, score) => {
                let node_id = format!("{VERIFIED_PREFIX}{target}");
                let detection = Detection::new(node_id.clone(), product.clone(), p.bbox, p.raw_score)?;
                let links: Vec<(Direction, String)> =
                    assigned_neighbors(t, &solution, reference).map(|(d, _, on)| (d, on.to_string())).collect();
                let o = observed.push_node(ObservedNode { node_id: node_id.clone(), detection })?;
                for (d, on) in links {
                    let other = observed.index_of(&on).expect("assigned observed node");
                    observed.link(o, d, other);
                }
                let a = Assignment { ref_node: target.clone(), obs_node: node_id, score };
                solution.insert(a.clone());
                verified.push(a);
            }
            Step::Issue(reason, best_score) => issues.push(ComplianceIssue {
                ref_node: target.clone(),
                expected_product: product,
                expected_roi: Some(roi),
                reason,
                best_score,
            }),
        }
    }

    Ok(VerifyOutcome { observed, solution, issues, verified })
}

#[cfg(test)]
mod tests;
