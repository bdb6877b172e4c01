use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::model::{BBox, ProductId};
use crate::sim::GroundTruthScene;

/// A candidate location for a sought product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub bbox: BBox,
    pub raw_score: f64,
}

/// What the verifier is looking for and where.
#[derive(Debug, Clone, Copy)]
pub struct ProposalQuery<'a> {
    pub ref_node: &'a str,
    pub product: &'a ProductId,
    pub roi: BBox,
}

/// Source of detection proposals inside a region of interest.
pub trait Matcher: Sync {
    fn name(&self) -> &str;

    /// Proposals whose boxes intersect `query.roi`.
    fn find_proposals(&self, query: &ProposalQuery<'_>) -> Vec<Proposal>;

    /// Normalization constant for raw scores; `None` means per-query max.
    fn max_raw_score(&self) -> Option<f64> {
        None
    }
}

/// Answers from ground truth: the true box of the queried facing, if the
/// item is on the shelf and its box meets the ROI.
#[derive(Debug, Clone, Default)]
pub struct OracleMatcher {
    items: HashMap<String, (ProductId, BBox)>,
}

impl OracleMatcher {
    pub fn new(items: impl IntoIterator<Item = (String, ProductId, BBox)>) -> Self {
        Self { items: items.into_iter().map(|(n, p, b)| (n, (p, b))).collect() }
    }

    pub fn from_scene(scene: &GroundTruthScene) -> Self {
        Self::new(scene.items.iter().map(|i| (i.node_id.clone(), i.product.clone(), i.bbox)))
    }
}

impl Matcher for OracleMatcher {
    fn name(&self) -> &str {
        "oracle"
    }

    fn find_proposals(&self, query: &ProposalQuery<'_>) -> Vec<Proposal> {
        match self.items.get(query.ref_node) {
            Some((product, bbox)) if product == query.product && bbox.intersects(&query.roi) => {
                vec![Proposal { bbox: *bbox, raw_score: 1.0 }]
            }
            _ => Vec::new(),
        }
    }

    fn max_raw_score(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Never proposes anything: every missing facing becomes an issue.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoMatcher;

impl Matcher for NoMatcher {
    fn name(&self) -> &str {
        "none"
    }

    fn find_proposals(&self, _query: &ProposalQuery<'_>) -> Vec<Proposal> {
        Vec::new()
    }
}
