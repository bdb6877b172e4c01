use std::collections::HashSet;

use serde::{Deserialize, Serialize};

/// Candidate pairing of a reference facing with an observed detection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub ref_node: String,
    pub obs_node: String,
    pub score: f64,
}

/// An accepted pairing; `score` is the hypothesis score when it was picked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub ref_node: String,
    pub obs_node: String,
    pub score: f64,
}

/// A self-consistent set of assignments, injective in both directions.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Solution {
    assignments: Vec<Assignment>,
    pub confidence: f64,
    pub seed: Option<Hypothesis>,
}

impl Solution {
    /// Fails with the offending node id if a reference or observed node is used twice.
    pub fn new(mut assignments: Vec<Assignment>, confidence: f64, seed: Option<Hypothesis>) -> Result<Self, String> {
        let mut refs = HashSet::new();
        let mut obs = HashSet::new();
        for a in &assignments {
            if !refs.insert(a.ref_node.as_str()) {
                return Err(a.ref_node.clone());
            }
            if !obs.insert(a.obs_node.as_str()) {
                return Err(a.obs_node.clone());
            }
        }
        assignments.sort_by(|a, b| a.ref_node.cmp(&b.ref_node));
        Ok(Self { assignments, confidence, seed })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Sorted by reference node id.
    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn obs_for(&self, ref_node: &str) -> Option<&str> {
        self.assignments
            .binary_search_by(|a| a.ref_node.as_str().cmp(ref_node))
            .ok()
            .map(|i| self.assignments[i].obs_node.as_str())
    }

    pub fn contains_obs(&self, obs_node: &str) -> bool {
        self.assignments.iter().any(|a| a.obs_node == obs_node)
    }

    /// Insert keeping the ref-node order. Returns false if either node is already used.
    pub(crate) fn insert(&mut self, a: Assignment) -> bool {
        if self.contains_obs(&a.obs_node) {
            return false;
        }
        match self.assignments.binary_search_by(|x| x.ref_node.cmp(&a.ref_node)) {
            Ok(_) => false,
            Err(pos) => {
                self.assignments.insert(pos, a);
                true
            }
        }
    }
}
